#include "sqg/retrieval.hpp"

#include <nlohmann/json.hpp>

#include "sqg/io.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

std::string_view to_string(Expansion e) {
  switch (e) {
    case Expansion::none: return "none";
    case Expansion::accepted_only: return "accepted_only";
    case Expansion::all: return "all";
  }
  return "none";
}

Expansion parse_expansion(std::string_view name) {
  if (name == "none" || name == "base") return Expansion::none;
  if (name == "accepted_only" || name == "accepted") return Expansion::accepted_only;
  if (name == "all") return Expansion::all;
  throw InvalidArgument("unknown index condition: " + std::string(name));
}

QuestionIndex::QuestionIndex(std::vector<IndexEntry> entries, std::string embedder_id,
                             std::string built_at)
    : entries_(std::move(entries)),
      embedder_id_(std::move(embedder_id)),
      built_at_(std::move(built_at)) {
  if (entries_.empty()) throw InvalidArgument("question index is empty");
  const std::size_t d = entries_.front().vector.size();
  for (const auto& e : entries_) {
    if (e.vector.size() != d) throw InvalidArgument("index vectors differ in dimension");
  }
}

QuestionIndex build_index(const KnowledgeBase& kb, Embedder& embedder, Expansion expansion) {
  if (kb.empty()) throw InvalidArgument("cannot index an empty knowledge base");
  std::vector<std::string> texts;
  std::vector<std::string> owners;
  for (const auto& pair : kb.pairs()) {
    for (const auto& q : pair.questions) {
      texts.push_back(q);
      owners.push_back(pair.pair_id);
    }
    if (expansion == Expansion::none) continue;
    for (const auto& g : pair.generated) {
      if (expansion == Expansion::accepted_only && g.status != ReviewStatus::accepted) continue;
      texts.push_back(g.text);
      owners.push_back(pair.pair_id);
    }
  }
  auto vectors = embedder.embed_sentences(texts);
  if (vectors.size() != texts.size()) throw EmbedderError("embedder returned wrong vector count");
  std::vector<IndexEntry> entries;
  entries.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    entries.push_back({std::move(texts[i]), std::move(owners[i]), unit(vectors[i])});
  }
  return QuestionIndex(std::move(entries), embedder.id(), utc_timestamp());
}

Match match_vector(const QuestionIndex& index, const Vector& query) {
  const Vector q = unit(query);
  std::size_t best = 0;
  double best_score = dot(index.entries()[0].vector, q);
  for (std::size_t i = 1; i < index.size(); ++i) {
    const double s = dot(index.entries()[i].vector, q);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  const auto& e = index.entries()[best];
  return {e.pair_id, e.question, best_score, best};
}

Match match(const QuestionIndex& index, const std::string& query, Embedder& embedder) {
  return match_vector(index, embedder.embed_sentence(query));
}

std::vector<LabeledQuery> load_labeled_queries(const std::filesystem::path& path) {
  std::vector<LabeledQuery> out;
  std::size_t lineno = 0, offset = 0;
  for (const auto& line : text::split_lines(read_file(path))) {
    ++lineno;
    if (!text::trim(line).empty()) {
      try {
        const auto j = json::parse(line);
        out.push_back({j.at("query").get<std::string>(), j.at("expected_pair_id").get<std::string>()});
      } catch (const json::exception& e) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno,
                         offset);
      }
    }
    offset += line.size() + 1;
  }
  return out;
}

std::map<std::string, double> AccuracyTable::deltas(std::size_t condition) const {
  std::map<std::string, double> out;
  if (rows.empty() || condition >= rows.size()) return out;
  for (const auto& [pair, acc] : rows[condition].per_pair) {
    auto base = rows.front().per_pair.find(pair);
    out[pair] = acc - (base == rows.front().per_pair.end() ? 0.0 : base->second);
  }
  return out;
}

std::string AccuracyTable::to_csv() const {
  std::string out = "condition,top1_accuracy,n_queries\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.condition)) + "," + format_fixed(r.top1_accuracy, 6) + "," +
           std::to_string(r.queries) + "\n";
  }
  return out;
}

AccuracyTable run_experiment(const KnowledgeBase& kb, Embedder& embedder,
                             const std::vector<LabeledQuery>& queries,
                             const std::vector<Expansion>& conditions) {
  if (queries.empty()) throw InvalidArgument("no labeled queries");
  if (conditions.empty()) throw InvalidArgument("no index conditions");
  for (const auto& q : queries) {
    if (!kb.find(q.expected_pair_id))
      throw InvalidArgument("query expects unknown pair " + q.expected_pair_id);
  }
  std::vector<std::string> texts;
  for (const auto& q : queries) texts.push_back(q.query);
  const auto query_vectors = embedder.embed_sentences(texts);

  AccuracyTable table;
  for (auto condition : conditions) {
    const auto index = build_index(kb, embedder, condition);
    ConditionResult row;
    row.condition = condition;
    row.queries = queries.size();
    row.index_size = index.size();
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // hits, total
    std::size_t hits = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto m = match_vector(index, query_vectors[i]);
      const bool hit = m.pair_id == queries[i].expected_pair_id;
      hits += hit;
      auto& t = tally[queries[i].expected_pair_id];
      t.first += hit;
      ++t.second;
    }
    row.top1_accuracy = static_cast<double>(hits) / static_cast<double>(queries.size());
    for (const auto& [pair, t] : tally)
      row.per_pair[pair] = static_cast<double>(t.first) / static_cast<double>(t.second);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sqg
