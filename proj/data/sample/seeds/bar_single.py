# chart_type: bar
# arity: single
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

labels = ["A", "B", "C", "D"]
values = [12, 30, 18, 25]

fig, ax = plt.subplots(figsize=(6, 4))
bars = ax.bar(labels, values, color="#4C72B0")
ax.bar_label(bars)
ax.set_ylabel("Value")
ax.set_title("Example bar chart")
fig.tight_layout()
fig.savefig(OUTPUT_PATH)
