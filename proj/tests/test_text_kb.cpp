#include <doctest.h>

#include <fstream>

#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/kb.hpp"
#include "sqg/text.hpp"
#include "support.hpp"

using namespace sqg;
using sqg::test::LogCapture;
using sqg::test::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& content) {
  std::ofstream(p, std::ios::binary) << content;
}

KnowledgeBase two_pair_kb() {
  KnowledgeBase kb({"fixture", "2026-01-01T00:00:00Z", "1"});
  kb.add({"p1", "答案一", {"问题一？", "问题一的另一种问法？", "第三种问法？"}, {"t"}, {}});
  kb.add({"p2", "answer two", {"How do I reset?", "Reset steps?", "Forgot password"}, {}, {}});
  return kb;
}

GenerationBatch batch_of(std::string pair_id, std::vector<std::string> questions) {
  GenerationBatch b;
  b.pair_id = std::move(pair_id);
  b.mode = Mode::intention_enhanced;
  b.requested = questions.size();
  b.questions = std::move(questions);
  return b;
}

}  // namespace

TEST_SUITE("text") {
  TEST_CASE("utf8 round trip and invalid bytes") {
    const std::string s = "证明a\xF0\x9F\x98\x80";
    const auto cps = text::decode_utf8(s);
    REQUIRE(cps.size() == 4);
    CHECK(cps[0] == U'证');
    CHECK(cps[3] == U'\U0001F600');
    CHECK(text::encode_utf8(cps) == s);
    const auto bad = text::decode_utf8("a\xFF" "b");
    REQUIRE(bad.size() == 3);
    CHECK(bad[1] == U'�');
  }

  TEST_CASE("normalize folds width, punctuation and case") {
    CHECK(text::normalize("  ＡＢｃ？ ") == "abc?");
    CHECK(text::normalize("　证明，要多久？　") == "证明,要多久?");
    CHECK(text::normalize("“引号”《书》") == "\"引号\"<书>");
    CHECK(text::normalize("Hello World") == "hello world");
  }

  TEST_CASE("trim handles ideographic space") {
    CHECK(text::trim("　 x \t　") == "x");
    CHECK(text::trim("   ").empty());
  }

  TEST_CASE("split_lines strips carriage returns") {
    const auto lines = text::split_lines("a\r\nb\nc");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a");
    CHECK(lines[2] == "c");
  }
}

TEST_SUITE("io") {
  TEST_CASE("csv parsing follows quoting rules") {
    const auto rows = parse_csv("\xEF\xBB\xBF" "a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cells == std::vector<std::string>{"a", "b"});
    CHECK(rows[1].cells == std::vector<std::string>{"x,1", "he said \"hi\""});
    CHECK(rows[2].cells[0] == "multi\nline");
    CHECK_THROWS_AS(parse_csv("a,\"open\n"), ParseError);
  }

  TEST_CASE("write_file creates parents and replaces atomically") {
    TempDir dir;
    const auto p = dir / "a/b/c.txt";
    write_file(p, "one");
    write_file(p, "two");
    CHECK(read_file(p) == "two");
    append_line(p, "three");
    CHECK(read_file(p) == "twothree\n");
  }
}

TEST_SUITE("kb") {
  TEST_CASE("empty file ingests to an empty KB") {
    TempDir dir;
    write(dir / "empty.jsonl", "");
    CHECK(ingest_qa_pairs(dir / "empty.jsonl", IngestFormat::jsonl).size() == 0);
  }

  TEST_CASE("two-record fixture gives N=2 with 3 questions each") {
    TempDir dir;
    write(dir / "qa.jsonl",
          "{\"answer\":\"A1\",\"questions\":[\"q1\",\"q2\",\"q3\"]}\n"
          "{\"pair_id\":\"x\",\"answer\":\"A2\",\"questions\":[\"r1\",\"r2\",\"r3\"],\"tags\":[\"t\"]}\n");
    const auto kb = ingest_qa_pairs(dir / "qa.jsonl", IngestFormat::jsonl);
    REQUIRE(kb.size() == 2);
    CHECK(kb.pairs()[0].questions.size() == 3);
    CHECK(kb.pairs()[1].questions.size() == 3);
    CHECK(kb.pairs()[0].pair_id == "p1");
    CHECK(kb.pairs()[1].pair_id == "x");
    CHECK(kb.pairs()[1].tags == std::vector<std::string>{"t"});
  }

  TEST_CASE("duplicate questions collapse with one warning") {
    TempDir dir;
    write(dir / "qa.jsonl", "{\"answer\":\"A\",\"questions\":[\"q\",\"q\",\"p\"]}\n");
    LogCapture logs;
    const auto kb = ingest_qa_pairs(dir / "qa.jsonl", IngestFormat::jsonl);
    CHECK(kb.pairs()[0].questions == std::vector<std::string>{"q", "p"});
    CHECK(logs.warnings.size() == 1);
  }

  TEST_CASE("bad records are aggregated with line numbers") {
    TempDir dir;
    write(dir / "qa.jsonl",
          "{\"answer\":\"A\",\"questions\":[\"q\"]}\n"
          "{\"answer\":\"\",\"questions\":[\"q\"]}\n"
          "not json\n"
          "{\"answer\":\"B\",\"questions\":[]}\n");
    try {
      ingest_qa_pairs(dir / "qa.jsonl", IngestFormat::jsonl);
      FAIL("expected IngestError");
    } catch (const IngestError& e) {
      REQUIRE(e.failures().size() == 3);
      CHECK(e.failures()[0].line == 2);
      CHECK(e.failures()[1].line == 3);
      CHECK(e.failures()[2].line == 4);
    }
  }

  TEST_CASE("missing file is an IoError") {
    CHECK_THROWS_AS(ingest_qa_pairs("/nonexistent/qa.jsonl", IngestFormat::jsonl), IoError);
  }

  TEST_CASE("csv ingest") {
    TempDir dir;
    write(dir / "qa.csv", "pair_id,answer,questions,tags\nc1,\"Ans, with comma\",q1|q2|q3,a|b\n");
    const auto kb = ingest_qa_pairs(dir / "qa.csv", IngestFormat::csv);
    REQUIRE(kb.size() == 1);
    CHECK(kb.pairs()[0].answer == "Ans, with comma");
    CHECK(kb.pairs()[0].questions == std::vector<std::string>{"q1", "q2", "q3"});
    CHECK(kb.pairs()[0].tags == std::vector<std::string>{"a", "b"});
    write(dir / "bad.csv", "answer,text\nx,y\n");
    CHECK_THROWS(ingest_qa_pairs(dir / "bad.csv", IngestFormat::csv));
  }

  TEST_CASE("sample fixture ingests") {
    const auto kb = ingest_qa_pairs(sqg::test::fixture("sample_qa.jsonl"), IngestFormat::jsonl);
    CHECK(kb.size() == 3);
    CHECK(kb.at("cert-time").source_question() == "证明开具时间要多久？");
  }

  TEST_CASE("save then load is the identity") {
    TempDir dir;
    auto kb = two_pair_kb();
    kb = attach_generated(kb, "p1", batch_of("p1", {"新问法？", "另一个？"}));
    set_review_status(kb, "p1", 1, ReviewStatus::rejected);
    save_kb(kb, dir / "kb.jsonl");
    CHECK(load_kb(dir / "kb.jsonl") == kb);
  }

  TEST_CASE("empty KB keeps its metadata") {
    TempDir dir;
    KnowledgeBase kb({"empty", "2026-02-02T00:00:00Z", "7"});
    save_kb(kb, dir / "kb.jsonl");
    const auto back = load_kb(dir / "kb.jsonl");
    CHECK(back.empty());
    CHECK(back.metadata() == kb.metadata());
  }

  TEST_CASE("truncated file gives a parse error with byte offset") {
    const auto text = serialize_kb(two_pair_kb());
    const auto cut = text.substr(0, text.size() - 20);
    try {
      parse_kb(cut);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() > 0);
      CHECK(e.offset() <= cut.size());
    }
    const auto first_line = text.find('\n') + 1;
    CHECK_THROWS_AS(parse_kb(text.substr(0, first_line)), ParseError);
  }

  TEST_CASE("attach novel questions") {
    const auto kb = two_pair_kb();
    const auto out = attach_generated(kb, "p2", batch_of("p2", {"a?", "b?", "c?"}));
    CHECK(out.at("p2").generated.size() == 3);
    CHECK(out.at("p2").generated[2].position == 2);
    CHECK(out.at("p2").generated[0].status == ReviewStatus::candidate);
    CHECK(kb.at("p2").generated.empty());
  }

  TEST_CASE("attach skips the source question") {
    const auto kb = two_pair_kb();
    const auto out = attach_generated(kb, "p2", batch_of("p2", {"how do i reset?", "new one"}));
    REQUIRE(out.at("p2").generated.size() == 1);
    CHECK(out.at("p2").generated[0].text == "new one");
  }

  TEST_CASE("attach to an unknown pair fails and leaves the KB unchanged") {
    const auto kb = two_pair_kb();
    const auto before = kb;
    CHECK_THROWS_AS(attach_generated(kb, "zz", batch_of("zz", {"a"})), NotFound);
    CHECK(kb == before);
  }

  TEST_CASE("status transitions only leave candidate") {
    auto kb = attach_generated(two_pair_kb(), "p1", batch_of("p1", {"x?"}));
    set_review_status(kb, "p1", 0, ReviewStatus::accepted);
    CHECK(kb.at("p1").generated[0].status == ReviewStatus::accepted);
    CHECK_THROWS_AS(set_review_status(kb, "p1", 0, ReviewStatus::rejected), StateError);
    CHECK_THROWS(set_review_status(kb, "p1", 5, ReviewStatus::rejected));
  }

  TEST_CASE("add rejects invalid pairs") {
    KnowledgeBase kb;
    CHECK_THROWS_AS(kb.add({"a", "", {"q"}, {}, {}}), InvalidArgument);
    CHECK_THROWS_AS(kb.add({"a", "x", {}, {}, {}}), InvalidArgument);
    CHECK_THROWS_AS(kb.add({"a", "x", {"q", "Q"}, {}, {}}), InvalidArgument);
    kb.add({"a", "x", {"q"}, {}, {}});
    CHECK_THROWS_AS(kb.add({"a", "y", {"r"}, {}, {}}), InvalidArgument);
  }
}
