#include "sqg/embed.hpp"

#include <httplib.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "sqg/io.hpp"
#include "sqg/provider.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

void TokenEmbeddingSet::validate() const {
  if (vectors.empty()) throw InvalidArgument("token embedding set is empty");
  if (!tokens.empty() && tokens.size() != vectors.size())
    throw InvalidArgument("token and vector counts differ");
  const std::size_t d = vectors.front().size();
  if (d == 0) throw InvalidArgument("embedding dimension is zero");
  for (const auto& v : vectors)
    if (v.size() != d) throw InvalidArgument("embedding vectors have different dimensions");
}

std::vector<TokenEmbeddingSet> Embedder::embed_tokens(const std::vector<std::string>& texts) {
  std::vector<TokenEmbeddingSet> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_tokens(t));
  return out;
}

std::vector<Vector> Embedder::embed_sentences(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_sentence(t));
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("vector dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

double cosine(const Vector& a, const Vector& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

Vector unit(const Vector& v) {
  const double n = norm(v);
  if (n == 0.0) throw InvalidArgument("cannot normalize a zero vector");
  Vector out(v);
  for (auto& x : out) x /= n;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> characters(const std::string& s) {
  std::vector<std::string> out;
  for (char32_t cp : text::decode_utf8(s))
    if (!text::is_space(cp)) out.push_back(text::encode_utf8(cp));
  return out;
}

void add_scaled(Vector& acc, const Vector& v, double w) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t salt)
    : dimension_(dimension), salt_(salt) {
  if (dimension_ == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::string HashEmbedder::id() const {
  return "hash-embedder/d" + std::to_string(dimension_) + "/s" + std::to_string(salt_);
}

Vector HashEmbedder::feature_vector(std::string_view feature) const {
  std::uint64_t state = fnv1a(feature) ^ salt_;
  Vector v(dimension_);
  for (auto& x : v) {
    // 53 high bits -> [0, 1) -> [-1, 1)
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * u - 1.0;
  }
  return v;
}

TokenEmbeddingSet HashEmbedder::embed_tokens(const std::string& text) {
  const auto chars = characters(text);
  if (chars.empty()) throw EmbedderError("nothing to embed in '" + text + "'");
  TokenEmbeddingSet set;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    Vector v = feature_vector("u:" + chars[i]);
    const std::string left = i == 0 ? "^" : chars[i - 1];
    const std::string right = i + 1 == chars.size() ? "$" : chars[i + 1];
    add_scaled(v, feature_vector("b:" + left + chars[i]), 0.5);
    add_scaled(v, feature_vector("b:" + chars[i] + right), 0.5);
    set.tokens.push_back(chars[i]);
    set.vectors.push_back(std::move(v));
  }
  return set;
}

Vector HashEmbedder::embed_sentence(const std::string& text) {
  const auto chars = characters(text);
  if (chars.empty()) throw EmbedderError("nothing to embed in '" + text + "'");
  Vector v(dimension_, 0.0);
  for (std::size_t i = 0; i < chars.size(); ++i) {
    add_scaled(v, feature_vector("u:" + chars[i]), 1.0);
    if (i + 1 < chars.size()) add_scaled(v, feature_vector("b:" + chars[i] + chars[i + 1]), 1.0);
  }
  return v;
}

TableEmbedder::TableEmbedder(std::map<std::string, Vector> table, std::string id)
    : table_(std::move(table)), id_(std::move(id)) {}

Vector TableEmbedder::embed_sentence(const std::string& text) {
  auto it = table_.find(text);
  if (it == table_.end()) throw EmbedderError("no vector for '" + text + "'");
  return it->second;
}

TokenEmbeddingSet TableEmbedder::embed_tokens(const std::string& text) {
  return TokenEmbeddingSet{{text}, {embed_sentence(text)}};
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw InvalidArgument("embedder base URL is empty");
}

std::string HttpEmbedder::post(const std::string& body) {
  const auto [origin, prefix] = split_base_url(config_.base_url);
  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  client.set_connection_timeout(secs.count(), 0);
  client.set_read_timeout(secs.count(), 0);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  auto res = client.Post(prefix + "/v1/embed", headers, body, "application/json");
  if (!res) throw EmbedderError("embed request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw EmbedderError("embedder returned HTTP " + std::to_string(res->status));
  return res->body;
}

std::vector<TokenEmbeddingSet> HttpEmbedder::embed_tokens(const std::vector<std::string>& texts) {
  const json reply = [&] {
    try {
      return json::parse(post(json{{"texts", texts}, {"granularity", "token"}}.dump()));
    } catch (const json::parse_error& e) {
      throw EmbedderError(std::string("embedder response is not JSON: ") + e.what());
    }
  }();
  try {
    const auto& vectors = reply.at("vectors");
    if (vectors.size() != texts.size()) throw EmbedderError("embedder returned wrong text count");
    std::vector<TokenEmbeddingSet> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      out[i].vectors = vectors[i].get<std::vector<Vector>>();
      if (reply.contains("tokens") && !reply["tokens"].is_null())
        out[i].tokens = reply["tokens"][i].get<std::vector<std::string>>();
      else
        for (std::size_t k = 0; k < out[i].vectors.size(); ++k) out[i].tokens.push_back("#" + std::to_string(k));
      out[i].validate();
    }
    return out;
  } catch (const json::exception& e) {
    throw EmbedderError(std::string("malformed embedder response: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw EmbedderError(std::string("malformed embedder response: ") + e.what());
  }
}

std::vector<Vector> HttpEmbedder::embed_sentences(const std::vector<std::string>& texts) {
  try {
    const auto reply =
        json::parse(post(json{{"texts", texts}, {"granularity", "sentence"}}.dump()));
    auto vectors = reply.at("vectors").get<std::vector<Vector>>();
    if (vectors.size() != texts.size()) throw EmbedderError("embedder returned wrong text count");
    return vectors;
  } catch (const json::exception& e) {
    throw EmbedderError(std::string("malformed embedder response: ") + e.what());
  }
}

TokenEmbeddingSet HttpEmbedder::embed_tokens(const std::string& text) {
  return embed_tokens(std::vector<std::string>{text}).front();
}

Vector HttpEmbedder::embed_sentence(const std::string& text) {
  return embed_sentences(std::vector<std::string>{text}).front();
}

}  // namespace sqg
