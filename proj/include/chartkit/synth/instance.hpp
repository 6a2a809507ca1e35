#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartkit/error.hpp"
#include "chartkit/reward/reward.hpp"
#include "chartkit/synth/executor.hpp"
#include "chartkit/synth/llm.hpp"
#include "chartkit/synth/sources.hpp"

namespace chartkit::synth {

class NoCodeBlock : public Error {
 public:
  using Error::Error;
};

class MalformedCompletion : public Error {
 public:
  using Error::Error;
};

enum class CandidateStatus { Pending, Rendered, Failed };

std::string_view to_string(CandidateStatus s);

struct CodeCandidate {
  std::string id;
  std::string code;
  std::string chart_type;
  Arity arity = Arity::Single;
  std::string table_id;
  std::string seed_id;

  CandidateStatus status = CandidateStatus::Pending;
  std::string image_path;  // set iff Rendered
  std::string failure;     // set iff Failed; "timeout" for timeouts
  bool timed_out = false;

  std::string prompt;
  std::string completion;
};

// Body of the first ``` fenced block (any info string), or nullopt.
std::optional<std::string> extract_code_block(std::string_view completion);

// Throws LlmError or NoCodeBlock. Provenance fields are left to the caller.
CodeCandidate generate_plot_code(LlmClient& client, const std::string& prompt);
// The same without the call: wraps an existing completion. Throws NoCodeBlock.
CodeCandidate candidate_from_completion(std::string prompt, std::string completion);

// Runs every Pending candidate once. Output images go to
// "<image_dir>/<candidate id>.png". A candidate is only Rendered when the
// executor reports ok and the image decodes.
void execute_candidates(Executor& executor, std::span<CodeCandidate> candidates, std::chrono::milliseconds timeout,
                        const std::filesystem::path& image_dir);

struct RawInstance {
  std::string id;
  std::string image_path;
  std::string code;
  std::string chart_type;
  Arity arity = Arity::Single;
  std::string question;
  std::string think;
  std::string answer;

  std::string prompt;
  std::string completion;
};

struct InstanceFields {
  std::string question;
  std::string think;
  std::string answer;
};

// Labelled-section parser: "QUESTION:", "THINK:" and "ANSWER:" at the start of
// a line (case-insensitive, optional surrounding "**"). A section runs until
// the next label. Throws MalformedCompletion when a label is missing or
// repeated. Contents are trimmed and may be empty.
InstanceFields parse_instance_completion(std::string_view completion);

// Throws PreconditionError unless the candidate is Rendered, LlmError,
// MalformedCompletion.
RawInstance generate_instance(LlmClient& client, const CodeCandidate& candidate);
// Fills everything but the question/think/answer fields and calls nothing.
RawInstance instance_request(const CodeCandidate& candidate);
// Parses raw.completion into the three fields. Throws MalformedCompletion.
void fill_instance_fields(RawInstance& raw);

enum class Split { Unassigned, Sft, Rl };

std::string_view to_string(Split s);  // "unassigned" | "sft" | "rl"
Split parse_split(std::string_view s);

struct ReasoningInstance {
  std::string id;
  std::string image;  // as stored; relative to the dataset directory when written by the pipeline
  std::string code;
  std::string question;
  std::string think;
  reward::GoldAnswer answer;
  Arity arity = Arity::Single;
  std::string chart_type;
  Split split = Split::Unassigned;

  // "<think>T</think><answer>A</answer>"
  std::string response() const;
};

class ValidationError : public Error {
 public:
  enum class Kind { BadFormat, BadImage, EmptyField };

  ValidationError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(ValidationError::Kind k);  // "bad_format" | "bad_image" | "empty_field"

// Checks, in order: non-empty fields, response grammar (the tagged response
// must parse back to the same spans), image decodability.
ReasoningInstance validate_instance(const RawInstance& raw);

// Instance JSONL. Field order is fixed:
// id, image, code, question, think, answer, answer_kind, arity, chart_type, split.
std::string to_jsonl_line(const ReasoningInstance& inst);
ReasoningInstance from_jsonl_line(std::string_view line);  // throws ConfigError
void write_instances(const std::filesystem::path& path, const std::vector<ReasoningInstance>& instances);
std::vector<ReasoningInstance> read_instances(const std::filesystem::path& path);  // throws ConfigError

}  // namespace chartkit::synth
