#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/batch.hpp"
#include "sqg/kb.hpp"

namespace sqg {

/// Fixed instruction strings, one per mode, with `{question}`, `{answer}`
/// and `{K}` slots.
struct PromptTemplate {
  Mode id;
  std::string_view instruction_pattern;
  /// True when the source question goes in the separate input field
  /// rather than inside the instruction.
  bool question_in_input;
};

const PromptTemplate& prompt_template(Mode mode);

/// Fills the template for `mode`. K is ignored for one_to_one, whose
/// instruction has no slots. Throws InvalidArgument for an empty question,
/// a missing answer under intention_enhanced, or K < 1 for batch modes.
std::string render_prompt(Mode mode, std::string_view question,
                          std::optional<std::string_view> answer, int k);

/// Completion-endpoint prompt text: the instruction, followed by the input
/// on its own line when the mode has one.
std::string render_completion_prompt(Mode mode, std::string_view question,
                                     std::optional<std::string_view> answer, int k);

/// Numbered one-per-line list ("1. a\n2. b") used for batch targets.
std::string join_numbered(const std::vector<std::string>& questions);

struct TrainingSample {
  std::string instruction;
  std::string input;
  std::string output;
  std::string sample_id;
  std::string pair_id;
  Mode paradigm = Mode::one_to_one;
  /// The question the sample is conditioned on. For batch paradigms it is
  /// embedded in the instruction and `input` stays empty.
  std::string source_question;
  std::vector<std::string> targets;

  bool operator==(const TrainingSample&) const = default;
};

struct TrainingOptions {
  Mode paradigm = Mode::context_aware;
  /// Targets per batch sample. Ignored for one_to_one.
  std::size_t targets_per_sample = 20;
  /// Absent means every ordered pair for one_to_one and one sample per
  /// question for batch paradigms.
  std::optional<std::size_t> samples_per_pair = 30;
  std::uint64_t seed = 0;
};

/// Builds fine-tuning samples from a knowledge base.
///
/// one_to_one draws ordered pairs (q_i, q_j), i != j, without replacement
/// from the pair's questions. Batch paradigms rotate the input question
/// through the pair (starting from the source question) and draw
/// `targets_per_sample` distinct other questions, kept in pair order.
/// Pairs too small for the paradigm are skipped with a warning; throws
/// InvalidArgument when no pair is usable.
std::vector<TrainingSample> build_training_samples(const KnowledgeBase& kb,
                                                   const TrainingOptions& options);

/// The exported shape of a sample.
struct FinetuneRecord {
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const FinetuneRecord&) const = default;
};

FinetuneRecord to_record(const TrainingSample& sample);

/// Writes one `{"instruction","input","output"}` object per line. Throws
/// InvalidArgument (and creates no file) for an empty sample list.
void export_finetune_jsonl(const std::vector<TrainingSample>& samples,
                           const std::filesystem::path& path);

std::vector<FinetuneRecord> read_finetune_jsonl(const std::filesystem::path& path);

}  // namespace sqg
