#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sqg/batch.hpp"
#include "sqg/error.hpp"
#include "sqg/kb.hpp"
#include "sqg/provider.hpp"

namespace sqg {

/// Every provider call of a batch failed.
class BatchError : public Error {
 public:
  explicit BatchError(std::vector<CallFailure> failures);
  const std::vector<CallFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<CallFailure> failures_;
};

/// Splits a model's list output into questions. Handles one question per
/// line, with or without enumeration markers ("1.", "1、", "1)", "- ",
/// circled numerals). Throws ParseError when nothing is left.
std::vector<std::string> parse_multi_question(std::string_view raw, std::size_t expected_k);

/// Drops the source question and repeats, comparing normalized forms.
/// Keeps first occurrences in order.
std::vector<std::string> dedup(const std::vector<std::string>& questions,
                               std::string_view source_question);

inline constexpr std::size_t kDefaultPerCall = 20;

struct GenerationOptions {
  /// Concurrent provider calls per wave.
  std::size_t parallelism = 1;
  /// Batch generation may spend this many times the minimum call count.
  std::size_t retry_factor = 3;
};

/// n independent one-to-one completions of the source question.
///
/// When params.seed is set, call i is sent with seed + i. Failed calls are
/// recorded in the batch; throws BatchError only when every call fails.
GenerationBatch generate_one_to_one(CompletionProvider& provider, std::string_view source_question,
                                    std::size_t n, const SamplingParams& params,
                                    const GenerationOptions& options = {});

/// Repeated K-per-call batch prompts until n unique questions are collected
/// or the call budget runs out, in which case the batch is marked
/// underfilled. Seeds follow the same per-call offset rule.
GenerationBatch generate_batch(CompletionProvider& provider, const QAPair& qa, std::size_t n,
                               Mode mode, std::size_t per_call, const SamplingParams& params,
                               const GenerationOptions& options = {});

/// Dispatches on mode; per_call is ignored for one_to_one.
GenerationBatch generate(CompletionProvider& provider, const QAPair& qa, std::size_t n, Mode mode,
                         std::size_t per_call, const SamplingParams& params,
                         const GenerationOptions& options = {});

}  // namespace sqg
