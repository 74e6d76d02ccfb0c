#include "sqg/review.hpp"

#include <algorithm>
#include <mutex>
#include <nlohmann/json.hpp>

#include "sqg/io.hpp"
#include "sqg/log.hpp"
#include "sqg/random.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

ReviewRun review_run_from_batches(std::string_view run_id, const std::vector<BatchRecord>& batches) {
  ReviewRun run{std::string(run_id), {}};
  for (const auto& r : batches) {
    for (std::size_t i = 0; i < r.batch.questions.size(); ++i) {
      run.items.push_back({r.batch.pair_id + "/" + std::to_string(i + 1), r.batch.pair_id,
                           r.batch.questions[i], r.source_question, r.answer});
    }
  }
  return run;
}

RunResolver directory_run_resolver(std::filesystem::path root) {
  return [root = std::move(root)](std::string_view run_id) -> std::optional<ReviewRun> {
    if (run_id.empty() || run_id.find('/') != std::string_view::npos ||
        run_id.find("..") != std::string_view::npos)
      return std::nullopt;
    const auto path = root / std::string(run_id) / "batches.jsonl";
    if (!std::filesystem::exists(path)) return std::nullopt;
    return review_run_from_batches(run_id, read_batches(path));
  };
}

SessionStats replay_stats(std::size_t total, const std::vector<ReviewMark>& marks) {
  SessionStats s;
  s.total = total;
  s.marked = marks.size();
  for (const auto& m : marks) (m.verdict == Verdict::accept ? s.accepted : s.rejected)++;
  s.remaining = total - s.marked;
  if (!marks.empty()) s.acceptance_ratio = acceptance_ratio(marks);
  return s;
}

std::string mark_to_json(std::string_view session_id, const ReviewMark& mark) {
  return json{{"session_id", std::string(session_id)},
              {"item_id", mark.item_id},
              {"verdict", std::string(to_string(mark.verdict))},
              {"note", mark.note},
              {"ts", mark.timestamp}}
      .dump();
}

ReviewService::ReviewService(RunResolver resolver, std::filesystem::path state_dir)
    : resolver_(std::move(resolver)),
      session_log_(state_dir / "sessions.jsonl"),
      mark_log_(state_dir / "marks.jsonl") {
  std::filesystem::create_directories(state_dir);
  replay();
}

ReviewSession ReviewService::build_session(std::string session_id, std::string_view run_id,
                                           std::string_view reviewer_id, std::uint64_t seed) const {
  auto run = resolver_(run_id);
  if (!run) throw NotFound("unknown run: " + std::string(run_id));
  if (run->items.empty()) throw InvalidArgument("run " + std::string(run_id) + " has no candidates");
  ReviewSession s;
  s.session_id = std::move(session_id);
  s.run_id = std::string(run_id);
  s.reviewer_id = std::string(reviewer_id);
  s.seed = seed;
  s.queue = std::move(run->items);
  Rng rng(seed);
  rng.shuffle(s.queue);
  return s;
}

void ReviewService::replay() {
  if (std::filesystem::exists(session_log_)) {
    for (const auto& line : text::split_lines(read_file(session_log_))) {
      if (text::trim(line).empty()) continue;
      const auto j = json::parse(line);
      auto s = build_session(j.at("session_id").get<std::string>(), j.at("run_id").get<std::string>(),
                             j.at("reviewer_id").get<std::string>(), j.at("seed").get<std::uint64_t>());
      sessions_.emplace(s.session_id, std::move(s));
      ++next_id_;
    }
  }
  if (std::filesystem::exists(mark_log_)) {
    for (const auto& line : text::split_lines(read_file(mark_log_))) {
      if (text::trim(line).empty()) continue;
      const auto j = json::parse(line);
      auto it = sessions_.find(j.at("session_id").get<std::string>());
      if (it == sessions_.end()) {
        log::warn("mark log references unknown session; line ignored");
        continue;
      }
      ReviewMark m{j.at("item_id").get<std::string>(), parse_verdict(j.at("verdict").get<std::string>()),
                   j.value("note", ""), j.value("ts", "")};
      auto& marks = it->second.marks;
      const bool dup = std::any_of(marks.begin(), marks.end(),
                                   [&](const ReviewMark& x) { return x.item_id == m.item_id; });
      if (!dup) marks.push_back(std::move(m));
    }
  }
}

ReviewSession ReviewService::create_session(std::string_view run_id, std::string_view reviewer_id,
                                            std::uint64_t seed) {
  std::unique_lock lock(mu_);
  auto s = build_session("s" + std::to_string(next_id_), run_id, reviewer_id, seed);
  append_line(session_log_, json{{"session_id", s.session_id},
                                 {"run_id", s.run_id},
                                 {"reviewer_id", s.reviewer_id},
                                 {"seed", s.seed},
                                 {"ts", utc_timestamp()}}
                                .dump());
  ++next_id_;
  auto [it, _] = sessions_.emplace(s.session_id, s);
  return it->second;
}

const ReviewSession& ReviewService::find(std::string_view session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("unknown session: " + std::string(session_id));
  return it->second;
}

ReviewSession& ReviewService::find(std::string_view session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("unknown session: " + std::string(session_id));
  return it->second;
}

std::optional<ReviewItem> ReviewService::next_item(std::string_view session_id) const {
  std::shared_lock lock(mu_);
  const auto& s = find(session_id);
  for (const auto& item : s.queue) {
    const bool marked = std::any_of(s.marks.begin(), s.marks.end(),
                                    [&](const ReviewMark& m) { return m.item_id == item.item_id; });
    if (!marked) return item;
  }
  return std::nullopt;
}

SessionStats ReviewService::submit_mark(std::string_view session_id, std::string_view item_id,
                                        Verdict verdict, std::string_view note) {
  std::unique_lock lock(mu_);
  auto& s = find(session_id);
  const bool known = std::any_of(s.queue.begin(), s.queue.end(),
                                 [&](const ReviewItem& i) { return i.item_id == item_id; });
  if (!known) throw NotFound("item " + std::string(item_id) + " is not in session " + s.session_id);
  const bool marked = std::any_of(s.marks.begin(), s.marks.end(),
                                  [&](const ReviewMark& m) { return m.item_id == item_id; });
  if (marked) throw StateError("item " + std::string(item_id) + " is already marked");
  ReviewMark m{std::string(item_id), verdict, std::string(note), utc_timestamp()};
  append_line(mark_log_, mark_to_json(s.session_id, m));
  s.marks.push_back(std::move(m));
  return replay_stats(s.queue.size(), s.marks);
}

SessionStats ReviewService::session_stats(std::string_view session_id) const {
  std::shared_lock lock(mu_);
  const auto& s = find(session_id);
  return replay_stats(s.queue.size(), s.marks);
}

ReviewSession ReviewService::session(std::string_view session_id) const {
  std::shared_lock lock(mu_);
  return find(session_id);
}

std::vector<std::string> ReviewService::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace sqg
