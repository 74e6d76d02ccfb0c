#include <doctest.h>

#include <httplib.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "sqg/error.hpp"
#include "sqg/metrics.hpp"
#include "sqg/retrieval.hpp"
#include "support.hpp"

using namespace sqg;

namespace {

GeneratedQuestion gen(std::string text, std::string pair, ReviewStatus status, std::size_t pos) {
  return {std::move(text), std::move(pair), Mode::intention_enhanced, 0, pos, status};
}

KnowledgeBase two_pair_kb() {
  KnowledgeBase kb;
  QAPair a{"a", "answer a", {"a1", "a2"}, {}, {}};
  a.generated = {gen("ga1", "a", ReviewStatus::accepted, 0), gen("ga2", "a", ReviewStatus::accepted, 1),
                 gen("ga3", "a", ReviewStatus::rejected, 2)};
  QAPair b{"b", "answer b", {"b1", "b2", "b3"}, {}, {}};
  b.generated = {gen("gb1", "b", ReviewStatus::accepted, 0), gen("gb2", "b", ReviewStatus::candidate, 1)};
  kb.add(a);
  kb.add(b);
  return kb;
}

/// Two pairs where the second query is only reachable through an accepted
/// paraphrase.
KnowledgeBase flip_kb() {
  KnowledgeBase kb;
  kb.add({"p1", "answer 1", {"a1"}, {}, {}});
  QAPair p2{"p2", "answer 2", {"b1"}, {}, {}};
  p2.generated = {gen("b2", "p2", ReviewStatus::accepted, 0)};
  kb.add(p2);
  return kb;
}

TableEmbedder flip_embedder() {
  return TableEmbedder({{"a1", {1, 0, 0}},
                        {"b1", {0, 1, 0}},
                        {"b2", {0, 0, 1}},
                        {"q1", {1, 0, 0.1}},
                        {"q2", {0.5, 0.1, 0.9}}});
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("index sizes per condition") {
    HashEmbedder e;
    const auto kb = two_pair_kb();
    CHECK(build_index(kb, e, Expansion::none).size() == 5);
    CHECK(build_index(kb, e, Expansion::accepted_only).size() == 8);
    CHECK(build_index(kb, e, Expansion::all).size() == 10);
    const auto idx = build_index(kb, e, Expansion::accepted_only);
    CHECK(idx.entries()[2].question == "ga1");
    CHECK(idx.entries()[2].pair_id == "a");
  }

  TEST_CASE("empty KB cannot be indexed") {
    HashEmbedder e;
    CHECK_THROWS_AS(build_index(KnowledgeBase{}, e, Expansion::none), InvalidArgument);
  }

  TEST_CASE("identical query matches with score 1") {
    HashEmbedder e;
    const auto idx = build_index(two_pair_kb(), e, Expansion::none);
    const auto m = match(idx, "b2", e);
    CHECK(m.pair_id == "b");
    CHECK(m.question == "b2");
    CHECK(m.score == doctest::Approx(1.0));
  }

  TEST_CASE("closest of three hand-assigned vectors") {
    TableEmbedder e({{"x", {1, 0}}, {"y", {0.6, 0.8}}, {"z", {0, 1}}, {"q", {0.5, 0.6}}});
    KnowledgeBase kb;
    kb.add({"p", "ans", {"x", "y", "z"}, {}, {}});
    const auto m = match(build_index(kb, e, Expansion::none), "q", e);
    CHECK(m.entry == 1);
    CHECK(m.question == "y");
  }

  TEST_CASE("ties go to the lower index") {
    const QuestionIndex idx({{"first", "p1", {1, 0}}, {"second", "p2", {1, 0}}}, "t", "");
    const auto m = match_vector(idx, {2, 0});
    CHECK(m.entry == 0);
    CHECK(m.pair_id == "p1");
  }

  TEST_CASE("queries equal to base questions are always found") {
    HashEmbedder e;
    const auto table = run_experiment(two_pair_kb(), e, {{"a1", "a"}, {"b3", "b"}},
                                      {Expansion::none, Expansion::accepted_only, Expansion::all});
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) CHECK(row.top1_accuracy == 1.0);
  }

  TEST_CASE("flip fixture goes from 0.5 to 1.0") {
    auto e = flip_embedder();
    const auto table =
        run_experiment(flip_kb(), e, {{"q1", "p1"}, {"q2", "p2"}}, {Expansion::none, Expansion::accepted_only});
    CHECK(table.rows[0].top1_accuracy == 0.5);
    CHECK(table.rows[1].top1_accuracy == 1.0);
    const auto d = table.deltas(1);
    CHECK(d.at("p1") == 0.0);
    CHECK(d.at("p2") == 1.0);
    CHECK(table.to_csv() == "condition,top1_accuracy,n_queries\nnone,0.500000,2\naccepted_only,1.000000,2\n");
  }

  TEST_CASE("bad experiment inputs") {
    HashEmbedder e;
    CHECK_THROWS_AS(run_experiment(two_pair_kb(), e, {}, {Expansion::none}), InvalidArgument);
    CHECK_THROWS_AS(run_experiment(two_pair_kb(), e, {{"x", "zz"}}, {Expansion::none}), InvalidArgument);
  }

  TEST_CASE("labeled query file") {
    const auto qs = load_labeled_queries(sqg::test::fixture("sample_queries.jsonl"));
    CHECK(qs.size() == 6);
    CHECK(qs[0].expected_pair_id == "cert-time");
  }

  TEST_CASE("expansion names") {
    CHECK(parse_expansion("base") == Expansion::none);
    CHECK(parse_expansion("accepted") == Expansion::accepted_only);
    CHECK(parse_expansion("all") == Expansion::all);
    CHECK_THROWS_AS(parse_expansion("some"), InvalidArgument);
  }
}

TEST_SUITE("embed") {
  TEST_CASE("hash embedder is deterministic and context sensitive") {
    HashEmbedder e(32);
    CHECK(e.embed_sentence("证明") == e.embed_sentence("证明"));
    const auto a = e.embed_tokens("证明");
    const auto b = e.embed_tokens("证件");
    REQUIRE(a.size() == 2);
    CHECK(a.tokens[0] == "证");
    CHECK(a.vectors[0] != b.vectors[0]);
    CHECK(e.embed_tokens("a b").size() == 2);
    CHECK_THROWS_AS(e.embed_tokens("   "), EmbedderError);
    CHECK(HashEmbedder(32, 1).embed_sentence("x") != e.embed_sentence("x"));
  }

  TEST_CASE("table embedder") {
    TableEmbedder e({{"x", {1, 2}}});
    CHECK(e.embed_tokens("x").size() == 1);
    CHECK_THROWS_AS(e.embed_sentence("y"), EmbedderError);
  }

  TEST_CASE("vector helpers") {
    CHECK(cosine({1, 0}, {0, 0}) == 0.0);
    CHECK(cosine({1, 1}, {2, 2}) == doctest::Approx(1.0));
    CHECK(norm(unit({3, 4})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(unit({0, 0}), InvalidArgument);
  }
}

TEST_CASE("http embedder against a live endpoint") {
  using nlohmann::json;
  HashEmbedder local(16);
  httplib::Server server;
  server.Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    const auto texts = body["texts"].get<std::vector<std::string>>();
    json vectors = json::array();
    if (body["granularity"] == "sentence") {
      for (const auto& t : texts) vectors.push_back(local.embed_sentence(t));
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
      return;
    }
    for (const auto& t : texts) vectors.push_back(local.embed_tokens(t).vectors);
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpEmbedder remote({"http://127.0.0.1:" + std::to_string(port), "", std::chrono::milliseconds(5000)});
  CHECK(remote.embed_sentence("证明") == local.embed_sentence("证明"));
  const auto set = remote.embed_tokens("证明要多久");
  CHECK(set.size() == 5);
  CHECK(set.vectors == local.embed_tokens("证明要多久").vectors);
  const auto reports = evaluate_run({{"p", {"证明要多久"}, {"证明要几天"}}}, remote, {1});
  const auto expected = evaluate_run({{"p", {"证明要多久"}, {"证明要几天"}}}, local, {1});
  CHECK(reports[0].f1 == doctest::Approx(expected[0].f1));

  server.stop();
  t.join();
  CHECK_THROWS_AS(remote.embed_sentence("x"), EmbedderError);
}
