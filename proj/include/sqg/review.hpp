#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/metrics.hpp"
#include "sqg/run_io.hpp"

namespace sqg {

struct ReviewItem {
  std::string item_id;
  std::string pair_id;
  std::string text;
  std::string source_question;
  std::string answer;

  bool operator==(const ReviewItem&) const = default;
};

/// Candidates of one generation run, in run order. Item ids are
/// "<pair_id>/<position>" with 1-based positions.
struct ReviewRun {
  std::string run_id;
  std::vector<ReviewItem> items;
};

ReviewRun review_run_from_batches(std::string_view run_id, const std::vector<BatchRecord>& batches);

/// Resolves a run id to its candidates, or nullopt for an unknown run.
using RunResolver = std::function<std::optional<ReviewRun>(std::string_view run_id)>;

/// Loads runs from `<root>/<run_id>/batches.jsonl`.
RunResolver directory_run_resolver(std::filesystem::path root);

struct ReviewSession {
  std::string session_id;
  std::string run_id;
  std::string reviewer_id;
  std::uint64_t seed = 0;
  std::vector<ReviewItem> queue;
  std::vector<ReviewMark> marks;
};

struct SessionStats {
  std::size_t total = 0;
  std::size_t marked = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t remaining = 0;
  /// Over the marks so far; absent before the first mark.
  std::optional<double> acceptance_ratio;

  bool operator==(const SessionStats&) const = default;
};

/// Stats of a queue of `total` items given its marks, recomputed from
/// scratch.
SessionStats replay_stats(std::size_t total, const std::vector<ReviewMark>& marks);

/// Review workflow state with durable, append-only logs.
///
/// `<state_dir>/sessions.jsonl` records session creation and
/// `<state_dir>/marks.jsonl` records marks, each appended and flushed
/// before the call returns. Constructing a service over an existing state
/// directory replays both logs. Mutations are serialized; reads may run
/// concurrently.
class ReviewService {
 public:
  ReviewService(RunResolver resolver, std::filesystem::path state_dir);

  /// Throws NotFound for an unknown run and InvalidArgument for a run
  /// without candidates.
  ReviewSession create_session(std::string_view run_id, std::string_view reviewer_id,
                               std::uint64_t seed);

  /// First unmarked item in queue order; nullopt once all are marked.
  std::optional<ReviewItem> next_item(std::string_view session_id) const;

  /// Throws NotFound for an unknown session or item, StateError when the
  /// item already has a mark.
  SessionStats submit_mark(std::string_view session_id, std::string_view item_id, Verdict verdict,
                           std::string_view note = "");

  SessionStats session_stats(std::string_view session_id) const;
  ReviewSession session(std::string_view session_id) const;
  std::vector<std::string> session_ids() const;

  const std::filesystem::path& mark_log() const { return mark_log_; }

 private:
  const ReviewSession& find(std::string_view session_id) const;
  ReviewSession& find(std::string_view session_id);
  ReviewSession build_session(std::string session_id, std::string_view run_id,
                              std::string_view reviewer_id, std::uint64_t seed) const;
  void replay();

  RunResolver resolver_;
  std::filesystem::path session_log_;
  std::filesystem::path mark_log_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ReviewSession, std::less<>> sessions_;
  std::size_t next_id_ = 1;
};

/// Mark-log line: {"session_id","item_id","verdict","note","ts"}.
std::string mark_to_json(std::string_view session_id, const ReviewMark& mark);

}  // namespace sqg
