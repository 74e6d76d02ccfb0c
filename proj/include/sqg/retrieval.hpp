#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/embed.hpp"
#include "sqg/kb.hpp"

namespace sqg {

/// Which generated questions join a pair's source questions in the index.
enum class Expansion { none, accepted_only, all };

std::string_view to_string(Expansion e);
Expansion parse_expansion(std::string_view name);

struct IndexEntry {
  std::string question;
  std::string pair_id;
  Vector vector;  // unit norm
};

/// Immutable after construction; safe to share between threads.
class QuestionIndex {
 public:
  QuestionIndex(std::vector<IndexEntry> entries, std::string embedder_id, std::string built_at);

  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& embedder_id() const { return embedder_id_; }
  const std::string& built_at() const { return built_at_; }

 private:
  std::vector<IndexEntry> entries_;
  std::string embedder_id_;
  std::string built_at_;
};

/// One entry per included question, in pair order then question order
/// (source questions before generated ones).
QuestionIndex build_index(const KnowledgeBase& kb, Embedder& embedder, Expansion expansion);

struct Match {
  std::string pair_id;
  std::string question;
  double score = 0.0;
  std::size_t entry = 0;
};

/// Highest-cosine entry; ties go to the earliest entry.
Match match(const QuestionIndex& index, const std::string& query, Embedder& embedder);
Match match_vector(const QuestionIndex& index, const Vector& query);

struct LabeledQuery {
  std::string query;
  std::string expected_pair_id;
};

std::vector<LabeledQuery> load_labeled_queries(const std::filesystem::path& path);

struct ConditionResult {
  Expansion condition = Expansion::none;
  double top1_accuracy = 0.0;
  std::size_t queries = 0;
  std::size_t index_size = 0;
  /// pair_id -> accuracy over the queries expecting that pair.
  std::map<std::string, double> per_pair;
};

struct AccuracyTable {
  std::vector<ConditionResult> rows;

  /// Per-pair accuracy of `condition` minus that of the first condition.
  std::map<std::string, double> deltas(std::size_t condition) const;
  /// CSV with header condition,top1_accuracy,n_queries.
  std::string to_csv() const;
};

/// Top-1 accuracy of each index condition over the labeled queries.
/// Throws InvalidArgument for an empty query list or a query whose expected
/// pair is not in the knowledge base.
AccuracyTable run_experiment(const KnowledgeBase& kb, Embedder& embedder,
                             const std::vector<LabeledQuery>& queries,
                             const std::vector<Expansion>& conditions);

}  // namespace sqg
