#pragma once

// Reference implementations written independently of the library, used as
// oracles by the metric tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sqg::oracle {

/// Hand-rolled UTF-8 decoder (valid input only).
inline std::vector<std::uint32_t> code_points(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : 4;
    std::uint32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline bool blank(std::uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
         cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

/// Counts pooled character n-grams by listing them all, sorting, and
/// counting runs.
inline double distinct_n(const std::vector<std::string>& questions, std::size_t n) {
  std::vector<std::vector<std::uint32_t>> grams;
  for (const auto& q : questions) {
    std::vector<std::uint32_t> chars;
    for (auto cp : code_points(q))
      if (!blank(cp)) chars.push_back(cp);
    for (std::size_t i = 0; i + n <= chars.size(); ++i)
      grams.emplace_back(chars.begin() + i, chars.begin() + i + n);
  }
  if (grams.empty()) return 0.0;
  std::sort(grams.begin(), grams.end());
  std::size_t unique = 0;
  for (std::size_t i = 0; i < grams.size(); ++i)
    if (i == 0 || grams[i] != grams[i - 1]) ++unique;
  return static_cast<double>(unique) / static_cast<double>(grams.size());
}

using Vec = std::vector<double>;

inline double cos_sim(const Vec& a, const Vec& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

struct Prf {
  double p, r, f;
};

/// Greedy-matching BERTScore by exhaustive search over the cosine table.
inline Prf bertscore(const std::vector<Vec>& cand, const std::vector<Vec>& ref) {
  std::vector<std::vector<double>> table(cand.size(), std::vector<double>(ref.size()));
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j) table[i][j] = cos_sim(cand[i], ref[j]);
  double p = 0, r = 0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    double best = -2;
    for (std::size_t j = 0; j < ref.size(); ++j) best = std::max(best, table[i][j]);
    p += best;
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    double best = -2;
    for (std::size_t i = 0; i < cand.size(); ++i) best = std::max(best, table[i][j]);
    r += best;
  }
  p /= static_cast<double>(cand.size());
  r /= static_cast<double>(ref.size());
  // Opposite-signed or zero parts score 0.
  const double f = (p > 0 && r > 0) || (p < 0 && r < 0) ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

}  // namespace sqg::oracle
