#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/batch.hpp"

namespace sqg {

enum class ReviewStatus { candidate, accepted, rejected };

std::string_view to_string(ReviewStatus status);
ReviewStatus parse_status(std::string_view name);

struct GeneratedQuestion {
  std::string text;
  std::string pair_id;
  Mode mode = Mode::context_aware;
  std::size_t batch_index = 0;
  std::size_t position = 0;
  ReviewStatus status = ReviewStatus::candidate;

  bool operator==(const GeneratedQuestion&) const = default;
};

/// An answer together with the questions that should retrieve it. The
/// first question is the source question used for generation.
struct QAPair {
  std::string pair_id;
  std::string answer;
  std::vector<std::string> questions;
  std::vector<std::string> tags;
  std::vector<GeneratedQuestion> generated;

  const std::string& source_question() const { return questions.front(); }
  /// Number of generated questions already attached (the next batch index).
  std::size_t batch_count() const;

  bool operator==(const QAPair&) const = default;
};

struct KbMetadata {
  std::string name;
  std::string created;  // ISO-8601 UTC
  std::string version;

  bool operator==(const KbMetadata&) const = default;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(KbMetadata metadata) : metadata_(std::move(metadata)) {}

  const KbMetadata& metadata() const { return metadata_; }
  KbMetadata& metadata() { return metadata_; }

  const std::vector<QAPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  /// Appends a pair after validating it. Throws InvalidArgument on an empty
  /// answer, an empty or duplicated question list, or a reused pair_id.
  void add(QAPair pair);

  const QAPair* find(std::string_view pair_id) const;
  QAPair* find_mutable(std::string_view pair_id);
  const QAPair& at(std::string_view pair_id) const;

  /// Rechecks every invariant; throws InvalidArgument on the first breach.
  void validate() const;

  bool operator==(const KnowledgeBase&) const = default;

 private:
  KbMetadata metadata_;
  std::vector<QAPair> pairs_;
};

/// Validates a single pair in isolation.
void validate_pair(const QAPair& pair);

/// Drops questions whose normalized form repeats an earlier one. Returns
/// the number removed.
std::size_t collapse_duplicates(std::vector<std::string>& questions);

enum class IngestFormat { jsonl, csv };

IngestFormat parse_ingest_format(std::string_view name);

/// Reads raw QA records. JSONL records carry answer, questions and the
/// optional pair_id and tags. CSV needs a header naming answer and
/// questions columns (pair_id and tags optional); list cells use '|'.
///
/// Duplicate questions inside a record are dropped with a warning. Bad
/// records are collected and reported together in an IngestError.
KnowledgeBase ingest_qa_pairs(const std::filesystem::path& path, IngestFormat format);

inline constexpr int kKbFormatVersion = 1;

/// Writes the canonical JSONL form: one header line, then one pair per line.
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

std::string serialize_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(std::string_view content);

/// Returns a copy of kb with the batch's questions appended as candidates.
/// Questions that normalize to an existing question or candidate of the
/// pair are skipped. Throws NotFound for an unknown pair_id.
KnowledgeBase attach_generated(const KnowledgeBase& kb, std::string_view pair_id,
                               const GenerationBatch& batch);

/// Moves one candidate to accepted or rejected. Throws StateError when the
/// question is not a candidate.
void set_review_status(KnowledgeBase& kb, std::string_view pair_id, std::size_t generated_index,
                       ReviewStatus status);

}  // namespace sqg
