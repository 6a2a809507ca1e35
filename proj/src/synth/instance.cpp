#include "chartkit/synth/instance.hpp"

#include <array>
#include <fstream>

#include "chartkit/synth/png.hpp"
#include "chartkit/synth/prompts.hpp"
#include "chartkit/text.hpp"
#include "json.hpp"

namespace chartkit::synth {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::Pending: return "pending";
    case CandidateStatus::Rendered: return "rendered";
    case CandidateStatus::Failed: return "failed";
  }
  return "pending";
}

std::optional<std::string> extract_code_block(std::string_view completion) {
  const auto open = completion.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = completion.find('\n', open + 3);
  if (body == std::string_view::npos) return std::nullopt;
  // The closing fence must start a line.
  std::size_t pos = body + 1;
  while (pos <= completion.size()) {
    const auto eol = completion.find('\n', pos);
    const auto line = text::trim(completion.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    if (line.starts_with("```")) return std::string(completion.substr(body + 1, pos - body - 1));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return std::nullopt;
}

CodeCandidate generate_plot_code(LlmClient& client, const std::string& prompt) {
  auto completion = client.complete(prompt);
  return candidate_from_completion(prompt, std::move(completion));
}

CodeCandidate candidate_from_completion(std::string prompt, std::string completion) {
  CodeCandidate c;
  c.prompt = std::move(prompt);
  c.completion = std::move(completion);
  auto code = extract_code_block(c.completion);
  if (!code || text::is_blank(*code)) throw NoCodeBlock("completion contains no fenced code block");
  c.code = std::move(*code);
  return c;
}

void execute_candidates(Executor& executor, std::span<CodeCandidate> candidates, std::chrono::milliseconds timeout,
                        const fs::path& image_dir) {
  for (auto& c : candidates) {
    if (c.status != CandidateStatus::Pending) continue;
    ExecRequest req;
    req.id = c.id;
    req.code = c.code;
    req.timeout_ms = timeout.count();
    req.output_path = (image_dir / (c.id + ".png")).string();
    const auto resp = executor.run(req);
    switch (resp.status) {
      case ExecStatus::Ok:
        if (decode_png(resp.image_path)) {
          c.status = CandidateStatus::Rendered;
          c.image_path = resp.image_path;
        } else {
          c.status = CandidateStatus::Failed;
          c.failure = "executor reported success but the image does not decode: " + resp.image_path;
        }
        break;
      case ExecStatus::Error:
        c.status = CandidateStatus::Failed;
        c.failure = resp.error_text.empty() ? "execution failed" : resp.error_text;
        break;
      case ExecStatus::Timeout:
        c.status = CandidateStatus::Failed;
        c.failure = "timeout";
        c.timed_out = true;
        break;
    }
  }
}

namespace {

enum Field { kQuestion, kThink, kAnswer, kNone };

// Recognizes "QUESTION:", "**Think:**", "Answer :" and similar at line start.
Field label_of(std::string_view line, std::string_view& rest) {
  auto s = text::trim(line);
  if (s.starts_with("**")) s.remove_prefix(2);
  static constexpr std::array<std::string_view, 3> names = {"question", "think", "answer"};
  for (int f = 0; f < 3; ++f) {
    const auto name = names[static_cast<std::size_t>(f)];
    if (s.size() < name.size() || text::to_lower_ascii(s.substr(0, name.size())) != name) continue;
    auto tail = s.substr(name.size());
    if (tail.starts_with("**")) tail.remove_prefix(2);
    tail = text::trim(tail);
    if (!tail.starts_with(':')) continue;
    tail.remove_prefix(1);
    if (tail.starts_with("**")) tail.remove_prefix(2);
    rest = tail;
    return static_cast<Field>(f);
  }
  return kNone;
}

}  // namespace

InstanceFields parse_instance_completion(std::string_view completion) {
  std::array<std::optional<std::string>, 3> fields;
  Field current = kNone;
  for (const auto& line : text::split_lines(completion)) {
    std::string_view rest;
    const auto f = label_of(line, rest);
    if (f != kNone) {
      auto& slot = fields[static_cast<std::size_t>(f)];
      if (slot) throw MalformedCompletion("section label repeated in completion");
      slot = std::string(rest);
      current = f;
    } else if (current != kNone) {
      auto& slot = *fields[static_cast<std::size_t>(current)];
      slot += "\n";
      slot += line;
    }
  }
  static constexpr std::array<std::string_view, 3> labels = {"QUESTION", "THINK", "ANSWER"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!fields[i]) throw MalformedCompletion("completion has no " + std::string(labels[i]) + " section");
  }
  return {std::string(text::trim(*fields[0])), std::string(text::trim(*fields[1])),
          std::string(text::trim(*fields[2]))};
}

RawInstance instance_request(const CodeCandidate& candidate) {
  if (candidate.status != CandidateStatus::Rendered) {
    throw PreconditionError("instance generation needs a rendered candidate: " + candidate.id);
  }
  RawInstance raw;
  raw.id = candidate.id;
  raw.image_path = candidate.image_path;
  raw.code = candidate.code;
  raw.chart_type = candidate.chart_type;
  raw.arity = candidate.arity;
  raw.prompt = compose_instance_prompt(candidate.code, candidate.chart_type, candidate.arity);
  return raw;
}

void fill_instance_fields(RawInstance& raw) {
  auto fields = parse_instance_completion(raw.completion);
  raw.question = std::move(fields.question);
  raw.think = std::move(fields.think);
  raw.answer = std::move(fields.answer);
}

RawInstance generate_instance(LlmClient& client, const CodeCandidate& candidate) {
  auto raw = instance_request(candidate);
  raw.completion = client.complete(raw.prompt);
  fill_instance_fields(raw);
  return raw;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Unassigned: return "unassigned";
    case Split::Sft: return "sft";
    case Split::Rl: return "rl";
  }
  return "unassigned";
}

Split parse_split(std::string_view s) {
  if (s == "sft") return Split::Sft;
  if (s == "rl") return Split::Rl;
  if (s == "unassigned") return Split::Unassigned;
  throw ConfigError("unknown split: " + std::string(s));
}

std::string ReasoningInstance::response() const { return reward::serialize_response(think, answer.raw); }

std::string_view to_string(ValidationError::Kind k) {
  switch (k) {
    case ValidationError::Kind::BadFormat: return "bad_format";
    case ValidationError::Kind::BadImage: return "bad_image";
    case ValidationError::Kind::EmptyField: return "empty_field";
  }
  return "bad_format";
}

ReasoningInstance validate_instance(const RawInstance& raw) {
  using K = ValidationError::Kind;
  if (text::is_blank(raw.question)) throw ValidationError(K::EmptyField, "question is empty");
  if (text::is_blank(raw.think)) throw ValidationError(K::EmptyField, "think is empty");
  if (text::is_blank(raw.answer)) throw ValidationError(K::EmptyField, "answer is empty");

  const auto serialized = reward::serialize_response(raw.think, raw.answer);
  const auto parsed = reward::parse_response(serialized);
  if (!parsed) {
    throw ValidationError(K::BadFormat,
                          "tagged response does not parse: " + std::string(reward::to_string(parsed.error)));
  }
  if (parsed.response->think != raw.think || parsed.response->answer != raw.answer) {
    throw ValidationError(K::BadFormat, "tagged response does not round-trip");
  }
  if (!decode_png(raw.image_path)) throw ValidationError(K::BadImage, "image does not decode: " + raw.image_path);

  ReasoningInstance inst;
  inst.id = raw.id;
  inst.image = raw.image_path;
  inst.code = raw.code;
  inst.question = raw.question;
  inst.think = raw.think;
  inst.answer = reward::GoldAnswer::classify(raw.answer);
  inst.arity = raw.arity;
  inst.chart_type = raw.chart_type;
  return inst;
}

std::string to_jsonl_line(const ReasoningInstance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["image"] = inst.image;
  j["code"] = inst.code;
  j["question"] = inst.question;
  j["think"] = inst.think;
  j["answer"] = inst.answer.raw;
  j["answer_kind"] = reward::to_string(inst.answer.kind);
  j["arity"] = to_string(inst.arity);
  j["chart_type"] = inst.chart_type;
  j["split"] = to_string(inst.split);
  return j.dump();
}

ReasoningInstance from_jsonl_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ReasoningInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.image = j.value("image", std::string{});
    inst.code = j.value("code", std::string{});
    inst.question = j.at("question").get<std::string>();
    inst.think = j.value("think", std::string{});
    inst.answer = reward::GoldAnswer::classify(j.at("answer").get<std::string>());
    if (j.contains("answer_kind")) {
      const auto kind = j["answer_kind"].get<std::string>();
      if (kind != "numeric" && kind != "text") throw ConfigError("unknown answer_kind: " + kind);
      if (kind == "text") inst.answer.kind = reward::GoldAnswer::Kind::Text;
      if (kind == "numeric" && !inst.answer.is_numeric()) {
        throw ConfigError("answer_kind is numeric but answer does not parse as a number: " + inst.answer.raw);
      }
    }
    inst.arity = parse_arity(j.at("arity").get<std::string>());
    inst.chart_type = j.value("chart_type", std::string{});
    inst.split = parse_split(j.value("split", std::string("unassigned")));
    if (inst.id.empty()) throw ConfigError("instance id is empty");
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance line: ") + e.what());
  }
}

void write_instances(const fs::path& path, const std::vector<ReasoningInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += to_jsonl_line(inst);
    out += '\n';
  }
  text::write_file(path.string(), out);
}

std::vector<ReasoningInstance> read_instances(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read instance file: " + path.string());
  std::vector<ReasoningInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(from_jsonl_line(line));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace chartkit::synth
