#include "sqg/generate.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <optional>
#include <unordered_set>

#include "sqg/log.hpp"
#include "sqg/prompt.hpp"
#include "sqg/text.hpp"

namespace sqg {

namespace {

std::string summarize(const std::vector<CallFailure>& failures) {
  std::string msg = "all " + std::to_string(failures.size()) + " provider call(s) failed";
  if (!failures.empty()) msg += "; first: " + failures.front().cause;
  return msg;
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// Enumeration marker at the head of a line, if any: digits followed by a
// list delimiter, a bullet, or a circled numeral.
std::size_t marker_length(const std::vector<char32_t>& cps) {
  std::size_t i = 0;
  if (!cps.empty() && cps[0] >= U'①' && cps[0] <= U'⑳') return 1;
  if (!cps.empty() && (cps[0] == U'-' || cps[0] == U'*' || cps[0] == U'•')) {
    if (cps.size() > 1 && text::is_space(cps[1])) return 2;
    return 0;
  }
  bool paren = false;
  if (!cps.empty() && (cps[0] == U'(' || cps[0] == U'（')) {
    paren = true;
    i = 1;
  }
  const std::size_t digits_start = i;
  while (i < cps.size() && is_digit(cps[i])) ++i;
  if (i == digits_start || i - digits_start > 3 || i >= cps.size()) return 0;
  const char32_t d = cps[i];
  if (paren) return (d == U')' || d == U'）') ? i + 1 : 0;
  if (d == U')' || d == U'）' || d == U'、' || d == U':' || d == U'：') return i + 1;
  if (d == U'.' || d == U'．') {
    // "1.5倍" is a number, not a marker.
    if (i + 1 < cps.size() && is_digit(cps[i + 1])) return 0;
    return i + 1;
  }
  return 0;
}

}  // namespace

BatchError::BatchError(std::vector<CallFailure> failures)
    : Error(summarize(failures)), failures_(std::move(failures)) {}

std::vector<std::string> parse_multi_question(std::string_view raw, std::size_t expected_k) {
  std::vector<std::string> items;
  for (const auto& line : text::split_lines(raw)) {
    auto cps = text::decode_utf8(text::trim(line));
    const std::size_t skip = marker_length(cps);
    cps.erase(cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(skip));
    std::string item = text::trim(text::encode_utf8(cps));
    if (!item.empty()) items.push_back(std::move(item));
  }
  if (items.empty()) throw ParseError("no question found in model output: " + std::string(raw), 0, 0);
  if (items.size() != expected_k) {
    log::write(log::Level::debug, "parsed " + std::to_string(items.size()) +
                                      " question(s), expected " + std::to_string(expected_k));
  }
  return items;
}

std::vector<std::string> dedup(const std::vector<std::string>& questions,
                               std::string_view source_question) {
  std::unordered_set<std::string> seen{text::normalize(source_question)};
  std::vector<std::string> out;
  for (const auto& q : questions) {
    if (seen.insert(text::normalize(q)).second) out.push_back(q);
  }
  return out;
}

namespace {

struct CallResult {
  std::optional<std::string> text;
  std::string error;
};

SamplingParams params_for_call(const SamplingParams& base, std::size_t index) {
  SamplingParams p = base;
  if (p.seed) p.seed = *p.seed + static_cast<std::int64_t>(index);
  return p;
}

// Issues calls [first, first+count) and returns results in index order.
std::vector<CallResult> run_wave(CompletionProvider& provider, const std::string& prompt,
                                 const SamplingParams& params, std::size_t first, std::size_t count,
                                 std::size_t parallelism) {
  auto one = [&](std::size_t index) {
    CallResult r;
    try {
      r.text = provider.complete(prompt, params_for_call(params, index));
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  };
  std::vector<CallResult> results(count);
  if (parallelism <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = one(first + i);
    return results;
  }
  for (std::size_t start = 0; start < count; start += parallelism) {
    const std::size_t end = std::min(count, start + parallelism);
    std::vector<std::future<CallResult>> futures;
    for (std::size_t i = start; i < end; ++i)
      futures.push_back(std::async(std::launch::async, one, first + i));
    for (std::size_t i = start; i < end; ++i) results[i] = futures[i - start].get();
  }
  return results;
}

}  // namespace

GenerationBatch generate_one_to_one(CompletionProvider& provider, std::string_view source_question,
                                    std::size_t n, const SamplingParams& params,
                                    const GenerationOptions& options) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  params.validate();
  const auto started = std::chrono::steady_clock::now();
  GenerationBatch batch;
  batch.mode = Mode::one_to_one;
  batch.requested = n;
  batch.per_call = 1;
  batch.sampling = params;
  batch.provider_id = provider.id();

  const std::string prompt =
      render_completion_prompt(Mode::one_to_one, source_question, std::nullopt, 1);
  const auto results = run_wave(provider, prompt, params, 0, n, options.parallelism);
  batch.calls = n;
  std::vector<std::string> parsed;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.text) {
      batch.failures.push_back({i, r.error});
      continue;
    }
    batch.raw_responses.push_back(*r.text);
    try {
      auto items = parse_multi_question(*r.text, 1);
      if (items.size() != 1) ++batch.parse_deviations;
      parsed.push_back(std::move(items.front()));
    } catch (const ParseError&) {
      batch.failures.push_back({i, "empty response"});
    }
  }
  if (batch.failures.size() == n) throw BatchError(std::move(batch.failures));
  batch.questions = dedup(parsed, source_question);
  batch.underfilled = batch.questions.size() < n;
  batch.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return batch;
}

GenerationBatch generate_batch(CompletionProvider& provider, const QAPair& qa, std::size_t n,
                               Mode mode, std::size_t per_call, const SamplingParams& params,
                               const GenerationOptions& options) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (per_call < 1) throw InvalidArgument("per-call count must be >= 1");
  if (mode == Mode::one_to_one) throw InvalidArgument("generate_batch needs a batch mode");
  params.validate();
  const auto started = std::chrono::steady_clock::now();

  GenerationBatch batch;
  batch.pair_id = qa.pair_id;
  batch.mode = mode;
  batch.requested = n;
  batch.per_call = per_call;
  batch.sampling = params;
  batch.provider_id = provider.id();

  const std::string& source = qa.source_question();
  const std::string prompt =
      render_completion_prompt(mode, source, qa.answer, static_cast<int>(per_call));
  const std::size_t min_calls = (n + per_call - 1) / per_call;
  const std::size_t budget = min_calls * std::max<std::size_t>(options.retry_factor, 1);

  std::vector<std::string> collected;
  std::size_t succeeded = 0;
  while (collected.size() < n && batch.calls < budget) {
    const std::size_t missing = n - collected.size();
    const std::size_t wave =
        std::min({std::max<std::size_t>(options.parallelism, 1),
                  (missing + per_call - 1) / per_call, budget - batch.calls});
    const auto results = run_wave(provider, prompt, params, batch.calls, wave, options.parallelism);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const std::size_t index = batch.calls + i;
      const auto& r = results[i];
      if (!r.text) {
        batch.failures.push_back({index, r.error});
        continue;
      }
      batch.raw_responses.push_back(*r.text);
      std::vector<std::string> items;
      try {
        items = parse_multi_question(*r.text, per_call);
      } catch (const ParseError&) {
        batch.failures.push_back({index, "empty response"});
        continue;
      }
      ++succeeded;
      if (items.size() != per_call) ++batch.parse_deviations;
      collected.insert(collected.end(), items.begin(), items.end());
      collected = dedup(collected, source);
    }
    batch.calls += wave;
  }
  if (succeeded == 0) throw BatchError(std::move(batch.failures));
  if (collected.size() > n) collected.resize(n);
  batch.underfilled = collected.size() < n;
  if (batch.underfilled) {
    log::warn("pair " + qa.pair_id + ": collected " + std::to_string(collected.size()) + " of " +
              std::to_string(n) + " questions within " + std::to_string(budget) + " calls");
  }
  batch.questions = std::move(collected);
  batch.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return batch;
}

GenerationBatch generate(CompletionProvider& provider, const QAPair& qa, std::size_t n, Mode mode,
                         std::size_t per_call, const SamplingParams& params,
                         const GenerationOptions& options) {
  if (mode == Mode::one_to_one) {
    auto batch = generate_one_to_one(provider, qa.source_question(), n, params, options);
    batch.pair_id = qa.pair_id;
    return batch;
  }
  return generate_batch(provider, qa, n, mode, per_call, params, options);
}

}  // namespace sqg
