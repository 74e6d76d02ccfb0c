#include <doctest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/review.hpp"
#include "sqg/review_http.hpp"
#include "sqg/text.hpp"
#include "support.hpp"

using namespace sqg;
using nlohmann::json;
using sqg::test::TempDir;

namespace {

ReviewRun make_run(std::size_t n) {
  ReviewRun run{"r", {}};
  for (std::size_t i = 1; i <= n; ++i)
    run.items.push_back({"p/" + std::to_string(i), "p", "候选" + std::to_string(i), "源问题", "答案"});
  return run;
}

RunResolver resolver() {
  return [](std::string_view id) -> std::optional<ReviewRun> {
    if (id == "r100") return make_run(100);
    if (id == "r10") return make_run(10);
    if (id == "empty") return make_run(0);
    return std::nullopt;
  };
}

std::size_t log_lines(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return 0;
  std::size_t n = 0;
  for (const auto& l : text::split_lines(read_file(p))) n += !text::trim(l).empty();
  return n;
}

}  // namespace

TEST_SUITE("review service") {
  TEST_CASE("session over a 100-candidate run") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    const auto s = svc.create_session("r100", "alice", 42);
    CHECK(s.queue.size() == 100);
    CHECK(s.session_id == "s1");
    const auto again = svc.create_session("r100", "bob", 42);
    CHECK(again.queue == s.queue);
    CHECK(svc.create_session("r100", "bob", 43).queue != s.queue);
  }

  TEST_CASE("creation errors") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    CHECK_THROWS_AS(svc.create_session("empty", "a", 1), InvalidArgument);
    CHECK_THROWS_AS(svc.create_session("nope", "a", 1), NotFound);
    CHECK_THROWS_AS(svc.next_item("s9"), NotFound);
  }

  TEST_CASE("queue progression and completion") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    const auto s = svc.create_session("r10", "a", 1);
    CHECK(svc.next_item(s.session_id)->item_id == s.queue[0].item_id);
    svc.submit_mark(s.session_id, s.queue[0].item_id, Verdict::accept);
    CHECK(svc.next_item(s.session_id)->item_id == s.queue[1].item_id);
    for (std::size_t i = 1; i < s.queue.size(); ++i) svc.submit_mark(s.session_id, s.queue[i].item_id, Verdict::reject);
    CHECK_FALSE(svc.next_item(s.session_id).has_value());
  }

  TEST_CASE("stats and idempotency guard") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    const auto s = svc.create_session("r100", "a", 1);
    const auto fresh = svc.session_stats(s.session_id);
    CHECK_FALSE(fresh.acceptance_ratio.has_value());
    CHECK(fresh.remaining == 100);
    const auto st = svc.submit_mark(s.session_id, s.queue[0].item_id, Verdict::accept);
    CHECK(st.marked == 1);
    CHECK(*st.acceptance_ratio == 1.0);
    CHECK_THROWS_AS(svc.submit_mark(s.session_id, s.queue[0].item_id, Verdict::reject), StateError);
    CHECK(svc.session_stats(s.session_id) == st);
    CHECK(log_lines(svc.mark_log()) == 1);
    CHECK_THROWS_AS(svc.submit_mark(s.session_id, "p/999", Verdict::reject), NotFound);
  }

  TEST_CASE("84 accepts and 16 rejects") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    const auto s = svc.create_session("r100", "a", 3);
    SessionStats st;
    for (std::size_t i = 0; i < 100; ++i)
      st = svc.submit_mark(s.session_id, s.queue[i].item_id, i < 84 ? Verdict::accept : Verdict::reject);
    CHECK(*st.acceptance_ratio == doctest::Approx(0.84));
    CHECK(format_percent(st.accepted, st.marked) == "84.0%");
  }

  TEST_CASE("45 of 100 and 3 of 4") {
    CHECK(*replay_stats(100, [] {
      std::vector<ReviewMark> m;
      for (int i = 0; i < 100; ++i) m.push_back({std::to_string(i), i < 45 ? Verdict::accept : Verdict::reject, "", ""});
      return m;
    }()).acceptance_ratio == doctest::Approx(0.45));
    const auto st = replay_stats(10, {{"a", Verdict::accept, "", ""},
                                      {"b", Verdict::accept, "", ""},
                                      {"c", Verdict::reject, "", ""},
                                      {"d", Verdict::accept, "", ""}});
    CHECK(*st.acceptance_ratio == doctest::Approx(0.75));
    CHECK(st.remaining == 6);
  }

  TEST_CASE("state survives a restart") {
    TempDir dir;
    std::string sid;
    SessionStats before;
    {
      ReviewService svc(resolver(), dir.path());
      const auto s = svc.create_session("r10", "a", 9);
      sid = s.session_id;
      svc.submit_mark(sid, s.queue[0].item_id, Verdict::accept, "好的");
      before = svc.submit_mark(sid, s.queue[1].item_id, Verdict::reject, "意思不同");
    }
    ReviewService svc(resolver(), dir.path());
    CHECK(svc.session_stats(sid) == before);
    const auto s = svc.session(sid);
    CHECK(s.marks[1].note == "意思不同");
    CHECK(svc.next_item(sid)->item_id == s.queue[2].item_id);
    CHECK(svc.create_session("r10", "b", 1).session_id == "s2");
  }

  TEST_CASE("concurrent marks on distinct items all land once") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    const auto s = svc.create_session("r100", "a", 5);
    std::vector<std::thread> threads;
    std::atomic<int> conflicts{0};
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (std::size_t i = 0; i < 100; ++i) {
          if (i % 2 != static_cast<std::size_t>(t) % 2) continue;
          try {
            svc.submit_mark(s.session_id, s.queue[i].item_id, Verdict::accept);
          } catch (const StateError&) {
            ++conflicts;
          }
        }
      });
    }
    for (auto& th : threads) th.join();
    CHECK(svc.session_stats(s.session_id).marked == 100);
    CHECK(conflicts == 100);
    CHECK(log_lines(svc.mark_log()) == 100);
  }

  TEST_CASE("directory resolver reads batches and rejects traversal") {
    TempDir dir;
    GenerationBatch b;
    b.pair_id = "cert";
    b.mode = Mode::intention_enhanced;
    b.requested = 2;
    b.questions = {"x", "y"};
    write_batches(dir / "run1/batches.jsonl", {{"run1", b, "src", "ans"}});
    const auto resolve = directory_run_resolver(dir.path());
    const auto run = resolve("run1");
    REQUIRE(run.has_value());
    REQUIRE(run->items.size() == 2);
    CHECK(run->items[1].item_id == "cert/2");
    CHECK(run->items[1].answer == "ans");
    CHECK_FALSE(resolve("../run1").has_value());
    CHECK_FALSE(resolve("missing").has_value());
  }
}

TEST_SUITE("review http") {
  TEST_CASE("REST flow") {
    TempDir dir;
    ReviewService svc(resolver(), dir.path());
    httplib::Server server;
    mount_review_routes(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client c("127.0.0.1", port);

    auto res = c.Post("/sessions", json{{"run_id", "r10"}, {"reviewer_id", "ann"}, {"seed", 7}}.dump(),
                      "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto created = json::parse(res->body);
    const std::string sid = created["session_id"];
    const auto queue = created["queue"].get<std::vector<std::string>>();
    REQUIRE(queue.size() == 10);
    CHECK(created["stats"]["acceptance_ratio"].is_null());

    for (std::size_t i = 0; i < 10; ++i) {
      res = c.Get("/sessions/" + sid + "/next");
      REQUIRE(res);
      const auto item = json::parse(res->body);
      CHECK(item["done"] == false);
      CHECK(item["item_id"] == queue[i]);
      CHECK(item["position"] == i + 1);
      CHECK(item["total"] == 10);
      CHECK(item["answer"] == "答案");
      json mark{{"item_id", queue[i]}, {"verdict", i < 7 ? "accept" : "reject"}};
      if (i == 9) mark["note"] = "偏离原意";
      res = c.Post("/sessions/" + sid + "/marks", mark.dump(), "application/json");
      REQUIRE(res);
      CHECK(res->status == 200);
      CHECK(json::parse(res->body)["marked"] == i + 1);
    }

    res = c.Post("/sessions/" + sid + "/marks", json{{"item_id", queue[0]}, {"verdict", "accept"}}.dump(),
                 "application/json");
    CHECK(res->status == 409);

    res = c.Get("/sessions/" + sid + "/next");
    const auto done = json::parse(res->body);
    CHECK(done["done"] == true);
    CHECK(done["stats"]["acceptance_display"] == "70.0%");

    res = c.Get("/sessions/" + sid + "/stats");
    const auto stats = json::parse(res->body);
    CHECK(stats["accepted"] == 7);
    CHECK(stats["rejected"] == 3);
    CHECK(stats["acceptance_ratio"] == doctest::Approx(0.7));

    CHECK(c.Get("/sessions/s99/stats")->status == 404);
    CHECK(c.Post("/sessions", "{not json", "application/json")->status == 400);
    CHECK(c.Post("/sessions", json{{"run_id", "nope"}}.dump(), "application/json")->status == 404);
    CHECK(c.Post("/sessions/" + sid + "/marks", json{{"item_id", queue[0]}, {"verdict", "maybe"}}.dump(),
                 "application/json")
              ->status == 400);
    CHECK(c.Options("/sessions")->status == 204);

    // The mark log replays to the displayed ratio, and the note is verbatim.
    std::vector<ReviewMark> replayed;
    std::string last_note;
    for (const auto& line : text::split_lines(read_file(svc.mark_log()))) {
      if (text::trim(line).empty()) continue;
      const auto j = json::parse(line);
      replayed.push_back({j["item_id"], parse_verdict(j["verdict"].get<std::string>()), j["note"], j["ts"]});
      last_note = j["note"];
    }
    CHECK(replayed.size() == 10);
    CHECK(format_percent(acceptance_ratio(replayed)) == stats["acceptance_display"]);
    CHECK(last_note == "偏离原意");

    server.stop();
    t.join();
  }
}
