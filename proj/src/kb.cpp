#include "sqg/kb.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/log.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

std::string_view to_string(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::candidate: return "candidate";
    case ReviewStatus::accepted: return "accepted";
    case ReviewStatus::rejected: return "rejected";
  }
  return "candidate";
}

ReviewStatus parse_status(std::string_view name) {
  if (name == "candidate") return ReviewStatus::candidate;
  if (name == "accepted") return ReviewStatus::accepted;
  if (name == "rejected") return ReviewStatus::rejected;
  throw InvalidArgument("unknown review status: " + std::string(name));
}

std::size_t QAPair::batch_count() const {
  std::size_t n = 0;
  for (const auto& g : generated) n = std::max(n, g.batch_index + 1);
  return n;
}

std::size_t collapse_duplicates(std::vector<std::string>& questions) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> kept;
  kept.reserve(questions.size());
  for (auto& q : questions) {
    if (seen.insert(text::normalize(q)).second) kept.push_back(std::move(q));
  }
  const std::size_t removed = questions.size() - kept.size();
  questions = std::move(kept);
  return removed;
}

void validate_pair(const QAPair& pair) {
  if (pair.pair_id.empty()) throw InvalidArgument("pair_id is empty");
  if (text::trim(pair.answer).empty())
    throw InvalidArgument("pair " + pair.pair_id + ": answer is empty");
  if (pair.questions.empty())
    throw InvalidArgument("pair " + pair.pair_id + ": question list is empty");
  std::unordered_set<std::string> seen;
  for (const auto& q : pair.questions) {
    auto norm = text::normalize(q);
    if (norm.empty()) throw InvalidArgument("pair " + pair.pair_id + ": empty question");
    if (!seen.insert(std::move(norm)).second)
      throw InvalidArgument("pair " + pair.pair_id + ": duplicate question '" + q + "'");
  }
  for (const auto& g : pair.generated) {
    if (text::trim(g.text).empty())
      throw InvalidArgument("pair " + pair.pair_id + ": empty generated question");
    if (g.pair_id != pair.pair_id)
      throw InvalidArgument("pair " + pair.pair_id + ": generated question owned by " + g.pair_id);
  }
}

void KnowledgeBase::add(QAPair pair) {
  validate_pair(pair);
  if (find(pair.pair_id)) throw InvalidArgument("duplicate pair_id: " + pair.pair_id);
  pairs_.push_back(std::move(pair));
}

const QAPair* KnowledgeBase::find(std::string_view pair_id) const {
  auto it = std::find_if(pairs_.begin(), pairs_.end(),
                         [&](const QAPair& p) { return p.pair_id == pair_id; });
  return it == pairs_.end() ? nullptr : &*it;
}

QAPair* KnowledgeBase::find_mutable(std::string_view pair_id) {
  return const_cast<QAPair*>(std::as_const(*this).find(pair_id));
}

const QAPair& KnowledgeBase::at(std::string_view pair_id) const {
  const QAPair* p = find(pair_id);
  if (!p) throw NotFound("unknown pair_id: " + std::string(pair_id));
  return *p;
}

void KnowledgeBase::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& p : pairs_) {
    validate_pair(p);
    if (!ids.insert(p.pair_id).second) throw InvalidArgument("duplicate pair_id: " + p.pair_id);
  }
}

IngestFormat parse_ingest_format(std::string_view name) {
  if (name == "jsonl") return IngestFormat::jsonl;
  if (name == "csv") return IngestFormat::csv;
  throw InvalidArgument("unknown ingest format: " + std::string(name));
}

namespace {

struct RawRecord {
  std::size_t line = 0;
  std::string pair_id;
  std::string answer;
  std::vector<std::string> questions;
  std::vector<std::string> tags;
};

std::vector<std::string> split_bar(const std::string& cell) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : cell) {
    if (c == '|') {
      out.push_back(text::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(text::trim(cur));
  out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
  return out;
}

void read_jsonl_records(const std::string& content, std::vector<RawRecord>& records,
                        std::vector<RecordFailure>& failures) {
  auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::trim(lines[i]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      failures.push_back({lineno, std::string("malformed JSON: ") + e.what()});
      continue;
    }
    if (!j.is_object()) {
      failures.push_back({lineno, "record is not a JSON object"});
      continue;
    }
    RawRecord r;
    r.line = lineno;
    try {
      if (j.contains("pair_id")) r.pair_id = j.at("pair_id").get<std::string>();
      if (j.contains("answer")) r.answer = j.at("answer").get<std::string>();
      if (j.contains("questions"))
        r.questions = j.at("questions").get<std::vector<std::string>>();
      if (j.contains("tags")) r.tags = j.at("tags").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      failures.push_back({lineno, std::string("wrong field type: ") + e.what()});
      continue;
    }
    records.push_back(std::move(r));
  }
}

void read_csv_records(const std::string& content, std::vector<RawRecord>& records,
                      std::vector<RecordFailure>& failures) {
  std::vector<CsvRow> rows;
  try {
    rows = parse_csv(content);
  } catch (const ParseError& e) {
    failures.push_back({e.line(), e.what()});
    return;
  }
  if (rows.empty()) return;
  const auto& header = rows.front().cells;
  auto column = [&](std::string_view name) -> std::ptrdiff_t {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (text::normalize(header[c]) == name) return static_cast<std::ptrdiff_t>(c);
    return -1;
  };
  const auto c_id = column("pair_id"), c_ans = column("answer"), c_q = column("questions"),
             c_tags = column("tags");
  if (c_ans < 0 || c_q < 0) {
    failures.push_back({rows.front().line, "CSV header must name answer and questions columns"});
    return;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& cells = rows[i].cells;
    if (cells.size() == 1 && text::trim(cells[0]).empty()) continue;
    if (cells.size() != header.size()) {
      failures.push_back({rows[i].line, "expected " + std::to_string(header.size()) +
                                            " fields, found " + std::to_string(cells.size())});
      continue;
    }
    RawRecord r;
    r.line = rows[i].line;
    if (c_id >= 0) r.pair_id = text::trim(cells[c_id]);
    r.answer = cells[c_ans];
    r.questions = split_bar(cells[c_q]);
    if (c_tags >= 0) r.tags = split_bar(cells[c_tags]);
    records.push_back(std::move(r));
  }
}

}  // namespace

KnowledgeBase ingest_qa_pairs(const std::filesystem::path& path, IngestFormat format) {
  const std::string content = read_file(path);
  std::vector<RawRecord> records;
  std::vector<RecordFailure> failures;
  if (format == IngestFormat::jsonl)
    read_jsonl_records(content, records, failures);
  else
    read_csv_records(content, records, failures);

  KnowledgeBase kb(KbMetadata{path.stem().string(), utc_timestamp(), "1"});
  std::unordered_set<std::string> ids;
  std::size_t ordinal = 0;
  for (auto& r : records) {
    ++ordinal;
    if (text::trim(r.answer).empty()) {
      failures.push_back({r.line, "empty answer"});
      continue;
    }
    for (auto& q : r.questions) q = text::trim(q);
    r.questions.erase(std::remove(r.questions.begin(), r.questions.end(), std::string()),
                      r.questions.end());
    if (r.questions.empty()) {
      failures.push_back({r.line, "empty question list"});
      continue;
    }
    if (r.pair_id.empty()) r.pair_id = "p" + std::to_string(ordinal);
    if (!ids.insert(r.pair_id).second) {
      failures.push_back({r.line, "duplicate pair_id " + r.pair_id});
      continue;
    }
    if (auto removed = collapse_duplicates(r.questions); removed > 0) {
      log::warn(path.string() + ":" + std::to_string(r.line) + ": dropped " +
                std::to_string(removed) + " duplicate question(s) in pair " + r.pair_id);
    }
    if (failures.empty()) {
      kb.add(QAPair{std::move(r.pair_id), std::move(r.answer), std::move(r.questions),
                    std::move(r.tags), {}});
    }
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(),
              [](const RecordFailure& a, const RecordFailure& b) { return a.line < b.line; });
    throw IngestError(std::move(failures));
  }
  return kb;
}

namespace {

json pair_to_json(const QAPair& p) {
  json gen = json::array();
  for (const auto& g : p.generated) {
    gen.push_back({{"text", g.text},
                   {"mode", std::string(to_string(g.mode))},
                   {"status", std::string(to_string(g.status))},
                   {"batch_index", g.batch_index},
                   {"position", g.position}});
  }
  return json{{"pair_id", p.pair_id},
              {"answer", p.answer},
              {"questions", p.questions},
              {"tags", p.tags},
              {"generated", std::move(gen)}};
}

QAPair pair_from_json(const json& j) {
  QAPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.answer = j.at("answer").get<std::string>();
  p.questions = j.at("questions").get<std::vector<std::string>>();
  if (j.contains("tags")) p.tags = j.at("tags").get<std::vector<std::string>>();
  if (j.contains("generated")) {
    for (const auto& g : j.at("generated")) {
      GeneratedQuestion q;
      q.text = g.at("text").get<std::string>();
      q.pair_id = p.pair_id;
      q.mode = parse_mode(g.at("mode").get<std::string>());
      q.status = parse_status(g.at("status").get<std::string>());
      q.batch_index = g.value("batch_index", std::size_t{0});
      q.position = g.value("position", std::size_t{0});
      p.generated.push_back(std::move(q));
    }
  }
  return p;
}

}  // namespace

std::string serialize_kb(const KnowledgeBase& kb) {
  std::string out;
  json header{{"format", "sqg-kb"},
              {"format_version", kKbFormatVersion},
              {"name", kb.metadata().name},
              {"created", kb.metadata().created},
              {"version", kb.metadata().version},
              {"pairs", kb.size()}};
  out += header.dump() + "\n";
  for (const auto& p : kb.pairs()) out += pair_to_json(p).dump() + "\n";
  return out;
}

KnowledgeBase parse_kb(std::string_view content) {
  std::size_t offset = 0;
  std::size_t lineno = 0;
  std::optional<std::size_t> expected;
  KnowledgeBase kb;
  while (offset < content.size()) {
    std::size_t nl = content.find('\n', offset);
    const bool terminated = nl != std::string_view::npos;
    if (!terminated) nl = content.size();
    const std::string_view line = content.substr(offset, nl - offset);
    ++lineno;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno,
                       offset + (e.byte > 0 ? e.byte - 1 : 0));
    }
    try {
      if (lineno == 1) {
        if (j.value("format", "") != "sqg-kb")
          throw ParseError("not a knowledge-base file", lineno, offset);
        const int version = j.at("format_version").get<int>();
        if (version != kKbFormatVersion)
          throw ParseError("format version " + std::to_string(version) + " unsupported (tool " +
                               std::to_string(kKbFormatVersion) + ")",
                           lineno, offset);
        kb = KnowledgeBase(KbMetadata{j.at("name").get<std::string>(),
                                      j.at("created").get<std::string>(),
                                      j.at("version").get<std::string>()});
        expected = j.at("pairs").get<std::size_t>();
      } else {
        kb.add(pair_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno, offset);
    } catch (const InvalidArgument& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno, offset);
    }
    if (!terminated) {
      throw ParseError("line " + std::to_string(lineno) + ": missing line terminator", lineno,
                       content.size());
    }
    offset = nl + 1;
  }
  if (!expected) throw ParseError("missing header line", 0, 0);
  if (*expected != kb.size()) {
    throw ParseError("truncated: header declares " + std::to_string(*expected) + " pairs, found " +
                         std::to_string(kb.size()),
                     lineno, content.size());
  }
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  write_file(path, serialize_kb(kb));
}

KnowledgeBase load_kb(const std::filesystem::path& path) { return parse_kb(read_file(path)); }

KnowledgeBase attach_generated(const KnowledgeBase& kb, std::string_view pair_id,
                               const GenerationBatch& batch) {
  if (!kb.find(pair_id)) throw NotFound("unknown pair_id: " + std::string(pair_id));
  KnowledgeBase out = kb;
  QAPair& pair = *out.find_mutable(pair_id);
  std::unordered_set<std::string> seen;
  for (const auto& q : pair.questions) seen.insert(text::normalize(q));
  for (const auto& g : pair.generated) seen.insert(text::normalize(g.text));
  const std::size_t batch_index = pair.batch_count();
  std::size_t position = 0;
  for (const auto& q : batch.questions) {
    const std::string trimmed = text::trim(q);
    if (trimmed.empty()) continue;
    if (!seen.insert(text::normalize(trimmed)).second) continue;
    pair.generated.push_back(GeneratedQuestion{trimmed, pair.pair_id, batch.mode, batch_index,
                                               position++, ReviewStatus::candidate});
  }
  return out;
}

void set_review_status(KnowledgeBase& kb, std::string_view pair_id, std::size_t generated_index,
                       ReviewStatus status) {
  QAPair* pair = kb.find_mutable(pair_id);
  if (!pair) throw NotFound("unknown pair_id: " + std::string(pair_id));
  if (generated_index >= pair->generated.size())
    throw NotFound("generated question index out of range");
  auto& g = pair->generated[generated_index];
  if (g.status != ReviewStatus::candidate || status == ReviewStatus::candidate)
    throw StateError("review status can only move from candidate to accepted or rejected");
  g.status = status;
}

}  // namespace sqg
