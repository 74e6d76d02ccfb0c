#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/embed.hpp"

namespace sqg {

/// Generated-by-reference similarity table. Rows are generated questions,
/// columns are reference questions.
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws InvalidArgument for an empty or ragged table.
  static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Harmonic mean of two similarity scores. 0 when they have opposite signs
/// or either is 0.
double harmonic_f1(double precision, double recall);

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Greedy-matching BERTScore without idf weighting or rescaling: precision
/// averages each candidate token's best cosine against the reference
/// tokens, recall the reverse.
BertScore bertscore_parts(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference);

/// The F1 component of bertscore_parts; symmetric in its arguments.
double bertscore(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference);

/// Mean over generated rows of the row maximum.
double semantic_precision(const ScoreMatrix& scores);
/// Mean over reference columns of the column maximum.
double semantic_recall(const ScoreMatrix& scores);
double semantic_f1(double precision, double recall);

/// Characters that take part in n-grams: every code point except whitespace.
std::vector<char32_t> ngram_units(std::string_view question);

/// Unique / total character n-grams pooled over all questions. Questions
/// shorter than n contribute nothing; 0 when there are no n-grams at all.
double distinct_n(const std::vector<std::string>& questions, std::size_t n);

/// Mean of distinct-1 and distinct-2.
double distinct_avg(const std::vector<std::string>& questions);

enum class Verdict { accept, reject };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view name);

struct ReviewMark {
  std::string item_id;
  Verdict verdict = Verdict::reject;
  std::string note;
  std::string timestamp;

  bool operator==(const ReviewMark&) const = default;
};

/// Accepted marks over all marks. Throws InvalidArgument for an empty list
/// or two marks on the same item.
double acceptance_ratio(const std::vector<ReviewMark>& marks);

/// Percentage with one decimal, rounded half up: 0.84 -> "84.0%".
std::string format_percent(double ratio);
/// Same, computed exactly from integer counts.
std::string format_percent(std::size_t numerator, std::size_t denominator);

struct MetricsReport {
  std::string label;
  std::size_t generated_count = 0;
  std::size_t pairs = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double distinct_1 = 0.0;
  double distinct_2 = 0.0;
  double distinct_avg = 0.0;
  std::optional<double> acceptance_ratio;
};

/// Evaluation inputs for one source pair.
struct PairEvaluation {
  std::string pair_id;
  std::vector<std::string> generated;
  std::vector<std::string> references;
};

/// Builds one report per requested count: the first n generated questions
/// of each pair are scored against that pair's references, and per-pair
/// precision, recall and distinct values are macro-averaged. F1 is the
/// harmonic mean of the averaged precision and recall. Pairs with fewer
/// than n generated questions are evaluated on what they have.
std::vector<MetricsReport> evaluate_run(const std::vector<PairEvaluation>& pairs,
                                        Embedder& embedder, const std::vector<std::size_t>& counts,
                                        std::string_view label = "");

/// Score matrix of BERTScore-F1 between every generated and reference text.
ScoreMatrix score_matrix(const std::vector<TokenEmbeddingSet>& generated,
                         const std::vector<TokenEmbeddingSet>& references);

std::string report_to_json(const std::vector<MetricsReport>& reports, std::string_view run_id);
std::vector<MetricsReport> reports_from_json(std::string_view content);

/// Aligned plain-text table with the columns Precision, Recall, F1-Score,
/// Distinct-1, Distinct-2, Distinct-Avg and Acceptance ratio.
std::string render_table(const std::vector<MetricsReport>& rows);

/// CSV with header n,precision,recall,f1,distinct_1,distinct_2,distinct_avg.
std::string render_curve_csv(const std::vector<MetricsReport>& reports);

}  // namespace sqg
