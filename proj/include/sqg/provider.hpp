#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/batch.hpp"
#include "sqg/error.hpp"

namespace sqg {

/// A failed completion call: transport error, timeout, non-2xx status or
/// malformed body.
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Text-completion backend. Implementations must be safe to call from
/// several threads at once and keep no conversation state between calls.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::string complete(const std::string& prompt, const SamplingParams& params) = 0;
  virtual std::string id() const = 0;
};

struct MockRule {
  enum class Match { exact, prefix };
  Match match = Match::exact;
  std::string prompt;
  std::vector<std::string> responses;
};

struct MockCall {
  std::string prompt;
  SamplingParams params;
  std::string response;

  bool operator==(const MockCall&) const = default;
};

/// Offline provider driven by a script of canned responses.
///
/// The first rule whose prompt matches (exact before prefix, then file
/// order) answers the call. When the call carries a seed the response is
/// `responses[seed % size]`; unseeded calls are served round-robin per
/// rule. An unmatched
/// prompt raises ProviderError.
class MockProvider final : public CompletionProvider {
 public:
  explicit MockProvider(std::vector<MockRule> rules, std::string id = "mock");

  /// Script file: JSONL of {"match": "exact"|"prefix", "prompt", "responses"}.
  static std::unique_ptr<MockProvider> from_file(const std::filesystem::path& path);

  std::string complete(const std::string& prompt, const SamplingParams& params) override;
  std::string id() const override { return id_; }

  std::vector<MockCall> calls() const;
  std::size_t call_count() const;

 private:
  std::vector<MockRule> rules_;
  std::vector<std::size_t> cursors_;
  std::string id_;
  mutable std::mutex mu_;
  std::vector<MockCall> log_;
};

std::vector<MockRule> parse_mock_script(std::string_view content);
std::string serialize_mock_script(const std::vector<MockRule>& rules);

struct HttpProviderConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080 or http://host/prefix
  std::string token;     // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{30000};
};

/// Client for `POST <base>/v1/complete`.
class HttpProvider final : public CompletionProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  std::string complete(const std::string& prompt, const SamplingParams& params) override;
  std::string id() const override { return "http:" + config_.base_url; }

  static std::string request_body(const std::string& prompt, const SamplingParams& params);

 private:
  HttpProviderConfig config_;
};

/// Splits "http://host:port/prefix" into the scheme+authority part and the
/// path prefix (without a trailing slash).
std::pair<std::string, std::string> split_base_url(std::string_view url);

}  // namespace sqg
