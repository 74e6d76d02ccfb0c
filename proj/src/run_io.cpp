#include "sqg/run_io.hpp"

#include <nlohmann/json.hpp>

#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

namespace {

json sampling_to_json(const SamplingParams& p) {
  json j{{"max_tokens", p.max_tokens}};
  j["temperature"] = p.temperature ? json(*p.temperature) : json(nullptr);
  j["top_k"] = p.top_k ? json(*p.top_k) : json(nullptr);
  j["top_p"] = p.top_p ? json(*p.top_p) : json(nullptr);
  j["seed"] = p.seed ? json(*p.seed) : json(nullptr);
  return j;
}

SamplingParams sampling_from_json(const json& j) {
  SamplingParams p;
  p.max_tokens = j.at("max_tokens").get<int>();
  p.temperature = j.at("temperature").is_null() ? std::nullopt
                                                : std::optional(j["temperature"].get<double>());
  p.top_k = j.at("top_k").is_null() ? std::nullopt : std::optional(j["top_k"].get<int>());
  p.top_p = j.at("top_p").is_null() ? std::nullopt : std::optional(j["top_p"].get<double>());
  p.seed = j.at("seed").is_null() ? std::nullopt : std::optional(j["seed"].get<std::int64_t>());
  return p;
}

}  // namespace

std::string batch_record_to_json(const BatchRecord& r) {
  const auto& b = r.batch;
  json failures = json::array();
  for (const auto& f : b.failures) failures.push_back({{"call", f.call_index}, {"cause", f.cause}});
  json j{{"run_id", r.run_id},
         {"pair_id", b.pair_id},
         {"mode", std::string(to_string(b.mode))},
         {"source_question", r.source_question},
         {"answer", r.answer},
         {"requested", b.requested},
         {"per_call", b.per_call},
         {"calls", b.calls},
         {"underfilled", b.underfilled},
         {"parse_deviations", b.parse_deviations},
         {"provider_id", b.provider_id},
         {"sampling", sampling_to_json(b.sampling)},
         {"questions", b.questions},
         {"raw_responses", b.raw_responses},
         {"failures", std::move(failures)}};
  return j.dump();
}

BatchRecord batch_record_from_json(std::string_view line) {
  const auto j = json::parse(line);
  BatchRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.source_question = j.value("source_question", "");
  r.answer = j.value("answer", "");
  auto& b = r.batch;
  b.pair_id = j.at("pair_id").get<std::string>();
  b.mode = parse_mode(j.at("mode").get<std::string>());
  b.requested = j.at("requested").get<std::size_t>();
  b.per_call = j.at("per_call").get<std::size_t>();
  b.calls = j.value("calls", std::size_t{0});
  b.underfilled = j.value("underfilled", false);
  b.parse_deviations = j.value("parse_deviations", std::size_t{0});
  b.provider_id = j.value("provider_id", "");
  if (j.contains("sampling")) b.sampling = sampling_from_json(j["sampling"]);
  b.questions = j.at("questions").get<std::vector<std::string>>();
  if (j.contains("raw_responses"))
    b.raw_responses = j["raw_responses"].get<std::vector<std::string>>();
  if (j.contains("failures"))
    for (const auto& f : j["failures"])
      b.failures.push_back({f.at("call").get<std::size_t>(), f.at("cause").get<std::string>()});
  return r;
}

void write_batches(const std::filesystem::path& path, const std::vector<BatchRecord>& records) {
  std::string out;
  for (const auto& r : records) out += batch_record_to_json(r) + "\n";
  write_file(path, out);
}

std::vector<BatchRecord> read_batches(const std::filesystem::path& path) {
  std::vector<BatchRecord> out;
  std::size_t lineno = 0, offset = 0;
  for (const auto& line : text::split_lines(read_file(path))) {
    ++lineno;
    if (!text::trim(line).empty()) {
      try {
        out.push_back(batch_record_from_json(line));
      } catch (const json::exception& e) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno,
                         offset);
      }
    }
    offset += line.size() + 1;
  }
  return out;
}

}  // namespace sqg
