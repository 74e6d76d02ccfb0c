#include "sqg/provider.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "sqg/io.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

MockProvider::MockProvider(std::vector<MockRule> rules, std::string id)
    : rules_(std::move(rules)), cursors_(rules_.size(), 0), id_(std::move(id)) {
  for (const auto& r : rules_) {
    if (r.responses.empty())
      throw InvalidArgument("mock rule for prompt '" + r.prompt + "' has no responses");
  }
}

std::unique_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  return std::make_unique<MockProvider>(parse_mock_script(read_file(path)),
                                        "mock:" + path.filename().string());
}

std::string MockProvider::complete(const std::string& prompt, const SamplingParams& params) {
  std::lock_guard lock(mu_);
  std::ptrdiff_t hit = -1;
  for (std::size_t i = 0; i < rules_.size() && hit < 0; ++i)
    if (rules_[i].match == MockRule::Match::exact && rules_[i].prompt == prompt) hit = i;
  for (std::size_t i = 0; i < rules_.size() && hit < 0; ++i)
    if (rules_[i].match == MockRule::Match::prefix && prompt.starts_with(rules_[i].prompt)) hit = i;
  if (hit < 0) throw ProviderError("mock: no scripted response for prompt: " + prompt);

  const auto& responses = rules_[hit].responses;
  std::size_t pick;
  if (params.seed) {
    const auto s = static_cast<std::uint64_t>(*params.seed);
    pick = static_cast<std::size_t>(s % responses.size());
  } else {
    pick = cursors_[hit]++ % responses.size();
  }
  log_.push_back({prompt, params, responses[pick]});
  return responses[pick];
}

std::vector<MockCall> MockProvider::calls() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t MockProvider::call_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::vector<MockRule> parse_mock_script(std::string_view content) {
  std::vector<MockRule> rules;
  std::size_t lineno = 0, offset = 0;
  for (const auto& line : text::split_lines(content)) {
    ++lineno;
    if (!text::trim(line).empty()) {
      try {
        const auto j = json::parse(line);
        MockRule r;
        const auto match = j.value("match", std::string("exact"));
        if (match == "exact")
          r.match = MockRule::Match::exact;
        else if (match == "prefix")
          r.match = MockRule::Match::prefix;
        else
          throw ParseError("line " + std::to_string(lineno) + ": unknown match kind " + match,
                           lineno, offset);
        r.prompt = j.at("prompt").get<std::string>();
        r.responses = j.at("responses").get<std::vector<std::string>>();
        rules.push_back(std::move(r));
      } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno, offset);
      }
    }
    offset += line.size() + 1;
  }
  return rules;
}

std::string serialize_mock_script(const std::vector<MockRule>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += json{{"match", r.match == MockRule::Match::exact ? "exact" : "prefix"},
                {"prompt", r.prompt},
                {"responses", r.responses}}
               .dump();
    out += '\n';
  }
  return out;
}

std::pair<std::string, std::string> split_base_url(std::string_view url) {
  const auto scheme = url.find("://");
  const std::size_t host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string_view::npos) return {std::string(url), ""};
  std::string prefix(url.substr(slash));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {std::string(url.substr(0, slash)), prefix};
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw InvalidArgument("provider base URL is empty");
}

std::string HttpProvider::request_body(const std::string& prompt, const SamplingParams& params) {
  json body{{"prompt", prompt}, {"max_tokens", params.max_tokens}};
  if (params.temperature) body["temperature"] = *params.temperature;
  if (params.top_k) body["top_k"] = *params.top_k;
  if (params.top_p) body["top_p"] = *params.top_p;
  if (params.seed) body["seed"] = *params.seed;
  return body.dump();
}

std::string HttpProvider::complete(const std::string& prompt, const SamplingParams& params) {
  const auto [origin, prefix] = split_base_url(config_.base_url);
  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  auto res = client.Post(prefix + "/v1/complete", headers, request_body(prompt, params),
                         "application/json");
  if (!res) throw ProviderError("request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw ProviderError("provider returned HTTP " + std::to_string(res->status));
  try {
    const auto j = json::parse(res->body);
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string())
      throw ProviderError("provider response has no \"text\" field");
    return j["text"].get<std::string>();
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("provider response is not JSON: ") + e.what());
  }
}

}  // namespace sqg
