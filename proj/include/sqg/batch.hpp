#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqg {

/// Generation paradigm. Also names the prompt template used for it.
enum class Mode { one_to_one, context_aware, intention_enhanced };

std::string_view to_string(Mode mode);
/// Accepts the canonical names plus the short aliases "one", "context" and
/// "intention". Throws InvalidArgument otherwise.
Mode parse_mode(std::string_view name);

struct SamplingParams {
  std::optional<double> temperature = 0.9;
  std::optional<int> top_k = 5;
  std::optional<double> top_p;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;

  /// Settings used for the SimBERT/RoFORMER-style baselines.
  static SamplingParams retrieval_model_defaults() { return {}; }
  /// Leaves every sampling knob unset so the endpoint applies its own
  /// defaults; only max_tokens is always sent.
  static SamplingParams llm_defaults();

  bool operator==(const SamplingParams&) const = default;
};

struct CallFailure {
  std::size_t call_index = 0;
  std::string cause;
};

/// Candidate questions produced for one source pair.
struct GenerationBatch {
  std::string pair_id;
  Mode mode = Mode::context_aware;
  std::size_t requested = 0;
  std::size_t per_call = 1;
  std::vector<std::string> raw_responses;
  std::vector<std::string> questions;
  SamplingParams sampling;
  std::string provider_id;
  std::size_t calls = 0;
  std::vector<CallFailure> failures;
  /// Parsed item count differed from the requested per-call count.
  std::size_t parse_deviations = 0;
  bool underfilled = false;
  std::chrono::milliseconds elapsed{0};
};

}  // namespace sqg
