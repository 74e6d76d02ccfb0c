#include "sqg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sqg/io.hpp"
#include "sqg/log.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw InvalidArgument("score matrix must be at least 1x1");
}

ScoreMatrix ScoreMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw InvalidArgument("score matrix is empty");
  ScoreMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw InvalidArgument("score matrix rows differ in length");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

double harmonic_f1(double precision, double recall) {
  if (precision == 0.0 || recall == 0.0) return 0.0;
  if ((precision > 0.0) != (recall > 0.0)) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::vector<Vector> unit_rows(const TokenEmbeddingSet& set) {
  std::vector<Vector> out;
  out.reserve(set.size());
  for (const auto& v : set.vectors) {
    const double n = norm(v);
    Vector u(v);
    if (n > 0.0)
      for (auto& x : u) x /= n;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

BertScore bertscore_parts(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference) {
  candidate.validate();
  reference.validate();
  if (candidate.dimension() != reference.dimension())
    throw InvalidArgument("candidate and reference embeddings differ in dimension");
  const auto c = unit_rows(candidate);
  const auto r = unit_rows(reference);

  std::vector<double> row_best(c.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> col_best(r.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double s = dot(c[i], r[j]);
      row_best[i] = std::max(row_best[i], s);
      col_best[j] = std::max(col_best[j], s);
    }
  }
  BertScore out;
  for (double s : row_best) out.precision += s;
  for (double s : col_best) out.recall += s;
  out.precision /= static_cast<double>(c.size());
  out.recall /= static_cast<double>(r.size());
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

double bertscore(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference) {
  return bertscore_parts(candidate, reference).f1;
}

double semantic_precision(const ScoreMatrix& scores) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double best = scores(i, 0);
    for (std::size_t j = 1; j < scores.cols(); ++j) best = std::max(best, scores(i, j));
    sum += best;
  }
  return sum / static_cast<double>(scores.rows());
}

double semantic_recall(const ScoreMatrix& scores) {
  double sum = 0.0;
  for (std::size_t j = 0; j < scores.cols(); ++j) {
    double best = scores(0, j);
    for (std::size_t i = 1; i < scores.rows(); ++i) best = std::max(best, scores(i, j));
    sum += best;
  }
  return sum / static_cast<double>(scores.cols());
}

double semantic_f1(double precision, double recall) { return harmonic_f1(precision, recall); }

std::vector<char32_t> ngram_units(std::string_view question) {
  std::vector<char32_t> out;
  for (char32_t cp : text::decode_utf8(question))
    if (!text::is_space(cp)) out.push_back(cp);
  return out;
}

double distinct_n(const std::vector<std::string>& questions, std::size_t n) {
  if (n == 0) throw InvalidArgument("n-gram order must be >= 1");
  std::set<std::u32string> unique;
  std::size_t total = 0;
  for (const auto& q : questions) {
    const auto units = ngram_units(q);
    if (units.size() < n) continue;
    for (std::size_t i = 0; i + n <= units.size(); ++i) {
      unique.emplace(units.begin() + static_cast<std::ptrdiff_t>(i),
                     units.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++total;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double distinct_avg(const std::vector<std::string>& questions) {
  return (distinct_n(questions, 1) + distinct_n(questions, 2)) / 2.0;
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::accept ? "accept" : "reject";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "accept") return Verdict::accept;
  if (name == "reject") return Verdict::reject;
  throw InvalidArgument("verdict must be accept or reject, got " + std::string(name));
}

double acceptance_ratio(const std::vector<ReviewMark>& marks) {
  if (marks.empty()) throw InvalidArgument("no review marks");
  std::unordered_set<std::string> seen;
  std::size_t accepted = 0;
  for (const auto& m : marks) {
    if (!seen.insert(m.item_id).second)
      throw InvalidArgument("item " + m.item_id + " marked more than once");
    if (m.verdict == Verdict::accept) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(marks.size());
}

namespace {

std::string permille_to_percent(long long permille) {
  const bool negative = permille < 0;
  if (negative) permille = -permille;
  return std::string(negative ? "-" : "") + std::to_string(permille / 10) + "." +
         std::to_string(permille % 10) + "%";
}

}  // namespace

std::string format_percent(double ratio) {
  // Half-up at the first decimal of the percentage; the small epsilon
  // absorbs binary representation error such as 0.1835 -> 0.18349999...
  const double scaled = ratio * 1000.0;
  return permille_to_percent(static_cast<long long>(std::floor(scaled + 0.5 + 1e-9)));
}

std::string format_percent(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) throw InvalidArgument("percentage of zero items");
  const auto num = static_cast<long long>(numerator) * 2000 + static_cast<long long>(denominator);
  return permille_to_percent(num / (2 * static_cast<long long>(denominator)));
}

ScoreMatrix score_matrix(const std::vector<TokenEmbeddingSet>& generated,
                         const std::vector<TokenEmbeddingSet>& references) {
  ScoreMatrix m(generated.size(), references.size());
  for (std::size_t i = 0; i < generated.size(); ++i)
    for (std::size_t j = 0; j < references.size(); ++j)
      m(i, j) = bertscore(generated[i], references[j]);
  return m;
}

std::vector<MetricsReport> evaluate_run(const std::vector<PairEvaluation>& pairs,
                                        Embedder& embedder, const std::vector<std::size_t>& counts,
                                        std::string_view label) {
  if (counts.empty()) throw InvalidArgument("no generation counts requested");
  for (auto n : counts)
    if (n == 0) throw InvalidArgument("generation count must be >= 1");
  const std::size_t max_n = *std::max_element(counts.begin(), counts.end());

  // Embed every distinct text once.
  std::unordered_map<std::string, TokenEmbeddingSet> cache;
  auto embedded = [&](const std::string& pair_id, const std::string& t) -> const TokenEmbeddingSet& {
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
    try {
      return cache.emplace(t, embedder.embed_tokens(t)).first->second;
    } catch (const std::exception& e) {
      throw EmbedderError("pair " + pair_id + ": " + e.what());
    }
  };

  struct Prepared {
    const PairEvaluation* pair;
    std::vector<const TokenEmbeddingSet*> gen;
    std::vector<TokenEmbeddingSet> refs;
  };
  std::vector<Prepared> prepared;
  for (const auto& p : pairs) {
    if (p.references.empty()) throw InvalidArgument("pair " + p.pair_id + " has no references");
    if (p.generated.empty()) {
      log::warn("pair " + p.pair_id + " has no generated questions; skipped");
      continue;
    }
    if (p.generated.size() < max_n) {
      log::warn("pair " + p.pair_id + " has " + std::to_string(p.generated.size()) +
                " generated questions, fewer than " + std::to_string(max_n) + "; truncated");
    }
    Prepared prep{&p, {}, {}};
    const std::size_t take = std::min(max_n, p.generated.size());
    for (std::size_t i = 0; i < take; ++i) prep.gen.push_back(&embedded(p.pair_id, p.generated[i]));
    for (const auto& r : p.references) prep.refs.push_back(embedded(p.pair_id, r));
    prepared.push_back(std::move(prep));
  }
  if (prepared.empty()) throw InvalidArgument("no pair has generated questions to evaluate");

  std::vector<MetricsReport> reports;
  for (auto n : counts) {
    MetricsReport rep;
    rep.label = std::string(label);
    rep.generated_count = n;
    rep.pairs = prepared.size();
    for (const auto& prep : prepared) {
      const std::size_t take = std::min(n, prep.gen.size());
      ScoreMatrix m(take, prep.refs.size());
      for (std::size_t i = 0; i < take; ++i)
        for (std::size_t j = 0; j < prep.refs.size(); ++j) m(i, j) = bertscore(*prep.gen[i], prep.refs[j]);
      const std::vector<std::string> texts(prep.pair->generated.begin(),
                                           prep.pair->generated.begin() + static_cast<std::ptrdiff_t>(take));
      rep.precision += semantic_precision(m);
      rep.recall += semantic_recall(m);
      rep.distinct_1 += distinct_n(texts, 1);
      rep.distinct_2 += distinct_n(texts, 2);
    }
    const auto k = static_cast<double>(prepared.size());
    rep.precision /= k;
    rep.recall /= k;
    rep.distinct_1 /= k;
    rep.distinct_2 /= k;
    rep.f1 = semantic_f1(rep.precision, rep.recall);
    rep.distinct_avg = (rep.distinct_1 + rep.distinct_2) / 2.0;
    reports.push_back(rep);
  }
  return reports;
}

std::string report_to_json(const std::vector<MetricsReport>& reports, std::string_view run_id) {
  json arr = json::array();
  for (const auto& r : reports) {
    json j{{"label", r.label},
           {"generated_count", r.generated_count},
           {"pairs", r.pairs},
           {"precision", r.precision},
           {"recall", r.recall},
           {"f1", r.f1},
           {"distinct_1", r.distinct_1},
           {"distinct_2", r.distinct_2},
           {"distinct_avg", r.distinct_avg},
           {"acceptance_ratio", nullptr}};
    if (r.acceptance_ratio) j["acceptance_ratio"] = *r.acceptance_ratio;
    arr.push_back(std::move(j));
  }
  json doc{{"run_id", std::string(run_id)}, {"manifest", "manifest.json"}, {"reports", arr}};
  return doc.dump(2) + "\n";
}

std::vector<MetricsReport> reports_from_json(std::string_view content) {
  std::vector<MetricsReport> out;
  try {
    const auto doc = json::parse(content);
    for (const auto& j : doc.at("reports")) {
      MetricsReport r;
      r.label = j.value("label", "");
      r.generated_count = j.at("generated_count").get<std::size_t>();
      r.pairs = j.value("pairs", std::size_t{0});
      r.precision = j.at("precision").get<double>();
      r.recall = j.at("recall").get<double>();
      r.f1 = j.at("f1").get<double>();
      r.distinct_1 = j.at("distinct_1").get<double>();
      r.distinct_2 = j.at("distinct_2").get<double>();
      r.distinct_avg = j.at("distinct_avg").get<double>();
      if (j.contains("acceptance_ratio") && !j["acceptance_ratio"].is_null())
        r.acceptance_ratio = j["acceptance_ratio"].get<double>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metrics file: ") + e.what(), 0, 0);
  }
  return out;
}

std::string render_table(const std::vector<MetricsReport>& rows) {
  const std::vector<std::string> headers{"Models",     "Precision",  "Recall",
                                         "F1-Score",   "Distinct-1", "Distinct-2",
                                         "Distinct-Avg", "Acceptance ratio"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::string label = r.label.empty() ? "n=" + std::to_string(r.generated_count) : r.label;
    cells.push_back({label, format_fixed(r.precision, 4), format_fixed(r.recall, 4),
                     format_fixed(r.f1, 4), format_fixed(r.distinct_1, 4),
                     format_fixed(r.distinct_2, 4), format_fixed(r.distinct_avg, 4),
                     r.acceptance_ratio ? format_percent(*r.acceptance_ratio) : "-"});
  }
  auto width = [](const std::string& s) { return text::decode_utf8(s).size(); };
  std::vector<std::size_t> w(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    w[c] = width(headers[c]);
    for (const auto& row : cells) w[c] = std::max(w[c], width(row[c]));
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t pad = w[c] - width(row[c]);
      if (c == 0) {
        out << row[c] << std::string(pad, ' ');
      } else {
        out << "  " << std::string(pad, ' ') << row[c];
      }
    }
    out << '\n';
  };
  emit(headers);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out << std::string(total + 2 * (w.size() - 1), '-') << '\n';
  for (const auto& row : cells) emit(row);
  return out.str();
}

std::string render_curve_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "n,precision,recall,f1,distinct_1,distinct_2,distinct_avg\n";
  for (const auto& r : reports) {
    out += std::to_string(r.generated_count) + "," + format_fixed(r.precision, 6) + "," +
           format_fixed(r.recall, 6) + "," + format_fixed(r.f1, 6) + "," +
           format_fixed(r.distinct_1, 6) + "," + format_fixed(r.distinct_2, 6) + "," +
           format_fixed(r.distinct_avg, 6) + "\n";
  }
  return out;
}

}  // namespace sqg
