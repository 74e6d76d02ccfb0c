#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/error.hpp"

namespace sqg {

using Vector = std::vector<double>;

/// Contextual token embeddings of one text.
struct TokenEmbeddingSet {
  std::vector<std::string> tokens;
  std::vector<Vector> vectors;

  std::size_t size() const { return vectors.size(); }
  std::size_t dimension() const { return vectors.empty() ? 0 : vectors.front().size(); }
  /// Throws InvalidArgument when empty, ragged, or tokens/vectors disagree.
  void validate() const;
};

class EmbedderError : public Error {
 public:
  using Error::Error;
};

/// Source of token-level (for BERTScore) and sentence-level (for retrieval)
/// embeddings. Implementations must tolerate concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual TokenEmbeddingSet embed_tokens(const std::string& text) = 0;
  virtual Vector embed_sentence(const std::string& text) = 0;
  virtual std::string id() const = 0;

  virtual std::vector<TokenEmbeddingSet> embed_tokens(const std::vector<std::string>& texts);
  virtual std::vector<Vector> embed_sentences(const std::vector<std::string>& texts);
};

/// Deterministic offline embedder built from hashed character features.
///
/// Tokens are the non-whitespace characters of the text. A token's vector
/// mixes the hashed vector of the character with those of its two
/// neighbouring bigrams, so the same character gets a different vector in
/// a different context. The sentence vector is the sum of hashed
/// character-unigram and bigram vectors. Identical strings always map to
/// identical vectors, and strings sharing characters land close together.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t salt = 0);

  TokenEmbeddingSet embed_tokens(const std::string& text) override;
  Vector embed_sentence(const std::string& text) override;
  std::string id() const override;
  using Embedder::embed_tokens;

  /// Pseudo-random vector with components in [-1, 1] keyed by `feature`.
  Vector feature_vector(std::string_view feature) const;

 private:
  std::size_t dimension_;
  std::uint64_t salt_;
};

/// Hand-assigned sentence vectors, for fixtures where the geometry must be
/// exact. Token embedding returns the whole text as one token carrying its
/// sentence vector. Unknown text raises EmbedderError.
class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, Vector> table, std::string id = "table");

  TokenEmbeddingSet embed_tokens(const std::string& text) override;
  Vector embed_sentence(const std::string& text) override;
  std::string id() const override { return id_; }
  using Embedder::embed_tokens;

 private:
  std::map<std::string, Vector> table_;
  std::string id_;
};

struct HttpEmbedderConfig {
  std::string base_url;
  std::string token;
  std::chrono::milliseconds timeout{30000};
};

/// Client for `POST <base>/v1/embed`.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config);

  TokenEmbeddingSet embed_tokens(const std::string& text) override;
  Vector embed_sentence(const std::string& text) override;
  std::vector<TokenEmbeddingSet> embed_tokens(const std::vector<std::string>& texts) override;
  std::vector<Vector> embed_sentences(const std::vector<std::string>& texts) override;
  std::string id() const override { return "http:" + config_.base_url; }

 private:
  std::string post(const std::string& body);
  HttpEmbedderConfig config_;
};

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
/// Cosine similarity; 0 when either vector is zero.
double cosine(const Vector& a, const Vector& b);
/// Throws InvalidArgument for a zero vector.
Vector unit(const Vector& v);

}  // namespace sqg
