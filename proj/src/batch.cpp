#include "sqg/batch.hpp"

#include <cmath>

#include "sqg/error.hpp"

namespace sqg {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::one_to_one: return "one_to_one";
    case Mode::context_aware: return "context_aware";
    case Mode::intention_enhanced: return "intention_enhanced";
  }
  return "context_aware";
}

Mode parse_mode(std::string_view name) {
  if (name == "one_to_one" || name == "one") return Mode::one_to_one;
  if (name == "context_aware" || name == "context") return Mode::context_aware;
  if (name == "intention_enhanced" || name == "intention") return Mode::intention_enhanced;
  throw InvalidArgument("unknown mode: " + std::string(name));
}

void SamplingParams::validate() const {
  if (temperature && !(*temperature >= 0.0 && std::isfinite(*temperature)))
    throw InvalidArgument("temperature must be a non-negative number");
  if (top_k && *top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) throw InvalidArgument("top_p must be in (0, 1]");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
}

SamplingParams SamplingParams::llm_defaults() {
  SamplingParams p;
  p.temperature.reset();
  p.top_k.reset();
  return p;
}

}  // namespace sqg
