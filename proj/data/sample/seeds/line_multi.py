# chart_type: multi_line
# arity: multi
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

x = [2019, 2020, 2021, 2022]
left = {"north": [3, 4, 6, 7], "south": [2, 2, 3, 5]}
right = {"north": [10, 9, 9, 8], "south": [7, 8, 8, 9]}

fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharex=True)
for name, ys in left.items():
    axes[0].plot(x, ys, marker="o", label=name)
axes[0].set_title("Installs (k)")
for name, ys in right.items():
    axes[1].plot(x, ys, marker="s", label=name)
axes[1].set_title("Returns (%)")
for ax in axes:
    ax.legend()
fig.tight_layout()
fig.savefig(OUTPUT_PATH)
