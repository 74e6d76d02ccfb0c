#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>

#include "sqg/embed.hpp"
#include "sqg/error.hpp"
#include "sqg/generate.hpp"
#include "sqg/io.hpp"
#include "sqg/kb.hpp"
#include "sqg/log.hpp"
#include "sqg/metrics.hpp"
#include "sqg/prompt.hpp"
#include "sqg/provider.hpp"
#include "sqg/retrieval.hpp"
#include "sqg/review.hpp"
#include "sqg/review_http.hpp"
#include "sqg/run_io.hpp"
#include "sqg/text.hpp"

namespace sqg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flags, config values or unresolvable input paths.
class ConfigError : public Error {
 public:
  using Error::Error;
};

const std::set<std::string> kGenerationKeys = {
    "mode", "n", "k", "seed", "sampling_preset", "temperature", "top_k", "top_p",
    "max_tokens", "mock_script", "provider_url", "retry_factor", "pairs"};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!text::trim(cur).empty()) out.push_back(text::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!text::trim(cur).empty()) out.push_back(text::trim(cur));
  return out;
}

class Config {
 public:
  explicit Config(json values) : v_(std::move(values)) {}

  bool has(const std::string& key) const { return v_.contains(key) && !v_[key].is_null(); }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return v_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }

  template <typename T>
  std::optional<T> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get<T>(key, T{});
  }

  std::string require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required setting --" + flag_name(key));
    return get<std::string>(key, "");
  }

  fs::path existing_path(const std::string& key) const {
    fs::path p = require(key);
    if (!fs::exists(p)) throw ConfigError("--" + flag_name(key) + ": no such file " + p.string());
    return p;
  }

  std::size_t positive(const std::string& key, std::size_t fallback) const {
    const auto v = get<long long>(key, static_cast<long long>(fallback));
    if (v < 1) throw ConfigError("--" + flag_name(key) + " must be >= 1");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed() const {
    const auto v = get<long long>("seed", 0);
    if (v < 0) throw ConfigError("--seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  const json& values() const { return v_; }

  static std::string flag_name(std::string key) {
    for (auto& c : key)
      if (c == '_') c = '-';
    return key;
  }

 private:
  json v_;
};

std::string config_hash(const Config& cfg, const std::set<std::string>* only) {
  json subset = json::object();
  for (const auto& [k, v] : cfg.values().items()) {
    if (only && !only->count(k)) continue;
    if (k == "mock_script" && v.is_string()) {
      subset[k] = fs::path(v.get<std::string>()).filename().string();
      continue;
    }
    subset[k] = v;
  }
  return hex64(fnv1a(subset.dump()));
}

std::string run_id(const Config& cfg) {
  if (cfg.has("run_id")) {
    const auto id = cfg.get<std::string>("run_id", "");
    if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos)
      throw ConfigError("--run-id must be a plain directory name");
    return id;
  }
  return "run-" + config_hash(cfg, &kGenerationKeys).substr(0, 12);
}

fs::path run_dir(const Config& cfg) { return fs::path(cfg.get<std::string>("runs_dir", "runs")) / run_id(cfg); }

/// Records one command execution in <run_dir>/manifest.json.
void update_manifest(const fs::path& dir, const std::string& command, const Config& cfg,
                     const std::string& provider, const std::vector<std::string>& artifacts,
                     const std::string& started) {
  const auto path = dir / "manifest.json";
  json manifest = json::object();
  if (fs::exists(path)) {
    try {
      manifest = json::parse(read_file(path));
    } catch (const json::exception&) {
      manifest = json::object();
    }
  }
  json safe = cfg.values();
  if (safe.contains("provider_token")) safe["provider_token"] = "***";
  manifest["run_id"] = dir.filename().string();
  manifest["steps"][command] = json{{"config", safe},
                                    {"config_hash", config_hash(cfg, nullptr)},
                                    {"seed", cfg.seed()},
                                    {"provider", provider},
                                    {"started", started},
                                    {"finished", utc_timestamp()},
                                    {"artifacts", artifacts}};
  write_file(path, manifest.dump(2) + "\n");
}

SamplingParams sampling_from(const Config& cfg) {
  const auto preset = cfg.get<std::string>("sampling_preset", "llm");
  SamplingParams p;
  if (preset == "llm")
    p = SamplingParams::llm_defaults();
  else if (preset == "retrieval-model")
    p = SamplingParams::retrieval_model_defaults();
  else
    throw ConfigError("--sampling-preset must be llm or retrieval-model");
  if (auto t = cfg.opt<double>("temperature")) p.temperature = *t;
  if (auto k = cfg.opt<int>("top_k")) p.top_k = *k;
  if (auto tp = cfg.opt<double>("top_p")) p.top_p = *tp;
  if (auto m = cfg.opt<int>("max_tokens")) p.max_tokens = *m;
  p.seed = static_cast<std::int64_t>(cfg.seed());
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::unique_ptr<CompletionProvider> make_provider(const Config& cfg) {
  if (cfg.has("mock_script")) return MockProvider::from_file(cfg.existing_path("mock_script"));
  if (cfg.has("provider_url")) {
    HttpProviderConfig hc;
    hc.base_url = cfg.get<std::string>("provider_url", "");
    hc.token = cfg.get<std::string>("provider_token", "");
    return std::make_unique<HttpProvider>(hc);
  }
  throw ConfigError("no provider configured: pass --mock-script or --provider-url (or SQG_PROVIDER_URL)");
}

std::unique_ptr<Embedder> make_embedder(const Config& cfg) {
  if (cfg.has("embed_url")) {
    HttpEmbedderConfig ec;
    ec.base_url = cfg.get<std::string>("embed_url", "");
    ec.token = cfg.get<std::string>("provider_token", "");
    return std::make_unique<HttpEmbedder>(ec);
  }
  return std::make_unique<HashEmbedder>(cfg.positive("embed_dim", 64));
}

Mode mode_from(const Config& cfg, const char* key, const char* fallback) {
  try {
    return parse_mode(cfg.get<std::string>(key, fallback));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Config& cfg, std::ostream& out) {
  const auto started = utc_timestamp();
  const auto input = cfg.existing_path("input");
  std::string format = cfg.get<std::string>("format", "");
  if (format.empty()) format = input.extension() == ".csv" ? "csv" : "jsonl";
  IngestFormat fmt;
  try {
    fmt = parse_ingest_format(format);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const auto dir = run_dir(cfg);
  const fs::path dest = cfg.has("out") ? fs::path(cfg.get<std::string>("out", "")) : dir / "kb.jsonl";
  auto kb = ingest_qa_pairs(input, fmt);
  if (cfg.has("name")) kb.metadata().name = cfg.get<std::string>("name", "");
  save_kb(kb, dest);
  std::size_t questions = 0;
  for (const auto& p : kb.pairs()) questions += p.questions.size();
  update_manifest(dir, "ingest", cfg, "", {dest.string()}, started);
  out << "ingested " << kb.size() << " pairs (" << questions << " questions) -> " << dest.string()
      << "\n";
  return kExitOk;
}

int cmd_build_train(const Config& cfg, std::ostream& out) {
  const auto started = utc_timestamp();
  const auto kb = load_kb(cfg.existing_path("kb"));
  TrainingOptions opts;
  opts.paradigm = mode_from(cfg, "paradigm", "context_aware");
  opts.targets_per_sample = cfg.positive("targets_per_sample", kDefaultPerCall);
  const auto spp = cfg.get<long long>("samples_per_pair", 30);
  if (spp < 0) throw ConfigError("--samples-per-pair must be >= 0 (0 means all)");
  opts.samples_per_pair = spp == 0 ? std::nullopt : std::optional<std::size_t>(spp);
  opts.seed = cfg.seed();
  const auto dir = run_dir(cfg);
  const fs::path dest = cfg.has("out") ? fs::path(cfg.get<std::string>("out", "")) : dir / "train.jsonl";
  const auto samples = build_training_samples(kb, opts);
  export_finetune_jsonl(samples, dest);
  update_manifest(dir, "build-train", cfg, "", {dest.string()}, started);
  out << "wrote " << samples.size() << " " << to_string(opts.paradigm) << " samples -> "
      << dest.string() << "\n";
  return kExitOk;
}

int cmd_generate(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto started = utc_timestamp();
  const auto kb_path = cfg.existing_path("kb");
  const Mode mode = mode_from(cfg, "mode", "intention_enhanced");
  const std::size_t n = cfg.positive("n", kDefaultPerCall);
  const std::size_t k = cfg.positive("k", kDefaultPerCall);
  if (k > kDefaultPerCall && mode != Mode::one_to_one)
    log::warn("-k " + std::to_string(k) + " exceeds " + std::to_string(kDefaultPerCall) +
              " questions per call; list quality tends to drop beyond that");
  const auto params = sampling_from(cfg);
  GenerationOptions gopts;
  gopts.parallelism = cfg.positive("parallelism", 1);
  gopts.retry_factor = cfg.positive("retry_factor", 3);
  auto provider = make_provider(cfg);
  auto kb = load_kb(kb_path);

  std::set<std::string> only;
  if (cfg.has("pairs")) {
    for (auto& id : split_list(cfg.get<std::string>("pairs", ""))) {
      if (!kb.find(id)) throw ConfigError("--pairs: unknown pair " + id);
      only.insert(id);
    }
  }

  const auto dir = run_dir(cfg);
  const auto id = dir.filename().string();
  std::vector<BatchRecord> records;
  json failures = json::array();
  std::size_t total = 0, underfilled = 0;
  const auto source = kb;
  for (const auto& pair : source.pairs()) {
    if (!only.empty() && !only.count(pair.pair_id)) continue;
    try {
      auto batch = generate(*provider, pair, n, mode, k, params, gopts);
      kb = attach_generated(kb, pair.pair_id, batch);
      total += batch.questions.size();
      underfilled += batch.underfilled;
      records.push_back({id, std::move(batch), pair.source_question(), pair.answer});
    } catch (const BatchError& e) {
      json causes = json::array();
      for (const auto& f : e.failures()) causes.push_back({{"call", f.call_index}, {"cause", f.cause}});
      failures.push_back({{"pair_id", pair.pair_id}, {"error", e.what()}, {"calls", causes}});
    }
  }
  write_batches(dir / "batches.jsonl", records);
  save_kb(kb, dir / "kb_expanded.jsonl");
  update_manifest(dir, "generate", cfg, provider->id(),
                  {(dir / "batches.jsonl").string(), (dir / "kb_expanded.jsonl").string()}, started);
  out << "run " << id << ": " << records.size() << " batch(es), " << total << " question(s)";
  if (underfilled) out << ", " << underfilled << " underfilled";
  out << " -> " << (dir / "batches.jsonl").string() << "\n";
  if (!failures.empty()) {
    err << json{{"error", "generation failed for some pairs"},
                {"command", "generate"},
                {"failures", failures},
                {"exit_code", kExitRuntime}}
               .dump()
        << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

std::vector<std::string> references_for(const QAPair& pair) {
  if (pair.questions.size() == 1) return pair.questions;
  return {pair.questions.begin() + 1, pair.questions.end()};
}

int cmd_evaluate(const Config& cfg, std::ostream& out) {
  const auto started = utc_timestamp();
  const auto kb = load_kb(cfg.existing_path("kb"));
  const auto dir = run_dir(cfg);
  const auto batches_path = dir / "batches.jsonl";
  if (!fs::exists(batches_path)) throw ConfigError("no batches for run: " + batches_path.string());
  std::vector<std::size_t> counts;
  try {
    counts = parse_counts(cfg.get<std::string>("counts", "20"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  auto embedder = make_embedder(cfg);
  const auto records = read_batches(batches_path);
  std::vector<PairEvaluation> pairs;
  std::string label;
  for (const auto& r : records) {
    const auto& pair = kb.at(r.batch.pair_id);
    pairs.push_back({pair.pair_id, r.batch.questions, references_for(pair)});
    label = std::string(to_string(r.batch.mode));
  }
  if (cfg.has("label")) label = cfg.get<std::string>("label", "");
  const auto reports = evaluate_run(pairs, *embedder, counts, label);
  auto metrics = json::parse(report_to_json(reports, dir.filename().string()));
  metrics["seed"] = cfg.seed();
  write_file(dir / "metrics.json", metrics.dump(2) + "\n");
  write_file(dir / "curve.csv", render_curve_csv(reports));
  update_manifest(dir, "evaluate", cfg, embedder->id(),
                  {(dir / "metrics.json").string(), (dir / "curve.csv").string()}, started);
  out << render_table(reports);
  return kExitOk;
}

/// Applies review verdicts from <run_dir>/marks.jsonl to the KB's
/// candidates. The first verdict on a candidate wins. Returns the number of
/// candidates updated.
std::size_t apply_review_marks(KnowledgeBase& kb, const fs::path& dir) {
  const auto marks_path = dir / "marks.jsonl";
  const auto batches_path = dir / "batches.jsonl";
  if (!fs::exists(marks_path) || !fs::exists(batches_path)) return 0;
  std::map<std::string, std::pair<std::string, std::string>> items;
  for (const auto& item : review_run_from_batches(dir.filename().string(), read_batches(batches_path)).items)
    items[item.item_id] = {item.pair_id, item.text};
  std::size_t updated = 0;
  for (const auto& line : text::split_lines(read_file(marks_path))) {
    if (text::trim(line).empty()) continue;
    const auto j = json::parse(line);
    const auto it = items.find(j.at("item_id").get<std::string>());
    if (it == items.end()) continue;
    const auto& [pair_id, question] = it->second;
    const auto* pair = kb.find(pair_id);
    if (!pair) continue;
    const auto status = parse_verdict(j.at("verdict").get<std::string>()) == Verdict::accept
                            ? ReviewStatus::accepted
                            : ReviewStatus::rejected;
    for (std::size_t g = 0; g < pair->generated.size(); ++g) {
      if (pair->generated[g].text == question && pair->generated[g].status == ReviewStatus::candidate) {
        set_review_status(kb, pair_id, g, status);
        ++updated;
        break;
      }
    }
  }
  return updated;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const auto started = utc_timestamp();
  auto kb = load_kb(cfg.existing_path("kb"));
  const auto queries = load_labeled_queries(cfg.existing_path("queries"));
  if (cfg.get<bool>("apply_marks", true)) {
    if (const auto n = apply_review_marks(kb, run_dir(cfg)))
      out << "applied " << n << " review verdict(s)\n";
  }
  std::vector<Expansion> conditions;
  try {
    for (const auto& c : split_list(cfg.get<std::string>("conditions", "none,accepted_only,all")))
      conditions.push_back(parse_expansion(c));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  auto embedder = make_embedder(cfg);
  const auto table = run_experiment(kb, *embedder, queries, conditions);
  const auto dir = run_dir(cfg);
  write_file(dir / "accuracy.csv", table.to_csv());
  update_manifest(dir, "simulate", cfg, embedder->id(), {(dir / "accuracy.csv").string()}, started);
  out << table.to_csv();
  for (std::size_t c = 1; c < table.rows.size(); ++c) {
    for (const auto& [pair, d] : table.deltas(c)) {
      if (d != 0.0)
        out << "  " << to_string(table.rows[c].condition) << " " << pair << " delta "
            << format_fixed(d, 4) << "\n";
    }
  }
  return kExitOk;
}

int cmd_review_serve(const Config& cfg, std::ostream& out) {
  const fs::path runs = cfg.get<std::string>("runs_dir", "runs");
  const fs::path state = cfg.has("state_dir") ? fs::path(cfg.get<std::string>("state_dir", "")) : run_dir(cfg);
  const auto host = cfg.get<std::string>("host", "127.0.0.1");
  const auto port = cfg.get<int>("port", 8088);
  if (port < 0 || port > 65535) throw ConfigError("--port out of range");
  ReviewService service(directory_run_resolver(runs), state);
  httplib::Server server;
  mount_review_routes(server, service);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  out << "review service on http://" << host << ":" << bound << " (state " << state.string()
      << ")" << std::endl;
  server.listen_after_bind();
  return kExitOk;
}

std::optional<double> acceptance_from_log(const fs::path& marks_path) {
  if (!fs::exists(marks_path)) return std::nullopt;
  std::vector<ReviewMark> marks;
  std::set<std::string> seen;
  for (const auto& line : text::split_lines(read_file(marks_path))) {
    if (text::trim(line).empty()) continue;
    const auto j = json::parse(line);
    const std::string key = j.at("session_id").get<std::string>() + "|" + j.at("item_id").get<std::string>();
    if (!seen.insert(key).second) continue;
    marks.push_back({key, parse_verdict(j.at("verdict").get<std::string>()), "", ""});
  }
  if (marks.empty()) return std::nullopt;
  return acceptance_ratio(marks);
}

int cmd_report(const Config& cfg, std::ostream& out) {
  const auto started = utc_timestamp();
  std::vector<std::string> ids;
  if (cfg.has("runs")) ids = split_list(cfg.get<std::string>("runs", ""));
  if (ids.empty()) ids.push_back(run_id(cfg));
  const fs::path runs = cfg.get<std::string>("runs_dir", "runs");
  const auto at = cfg.opt<long long>("at");

  std::vector<MetricsReport> rows;
  for (const auto& id : ids) {
    const auto metrics_path = runs / id / "metrics.json";
    if (!fs::exists(metrics_path)) throw ConfigError("no metrics for run " + id + "; run evaluate first");
    auto reports = reports_from_json(read_file(metrics_path));
    const auto ratio = acceptance_from_log(runs / id / "marks.jsonl");
    for (auto& r : reports) {
      if (ratio) r.acceptance_ratio = ratio;
      if (ids.size() > 1 || at) {
        if (at && r.generated_count != static_cast<std::size_t>(*at)) continue;
        if (r.label.empty()) r.label = id;
      } else {
        r.label = (r.label.empty() ? id : r.label) + " n=" + std::to_string(r.generated_count);
      }
      rows.push_back(r);
    }
  }
  const auto table = render_table(rows);
  const auto dir = run_dir(cfg);
  std::vector<std::string> artifacts{(dir / "report.txt").string()};
  write_file(dir / "report.txt", table);
  if (ids.size() == 1) {
    const auto reports = reports_from_json(read_file(runs / ids.front() / "metrics.json"));
    write_file(runs / ids.front() / "curve.csv", render_curve_csv(reports));
    artifacts.push_back((runs / ids.front() / "curve.csv").string());
  }
  update_manifest(dir, "report", cfg, "", artifacts, started);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct Command {
  CLI::App* app;
  std::string name;
};

template <typename T>
void flag(CLI::App* app, json& given, const std::string& names, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(names, [&given, key](const T& v) { given[key] = v; }, help);
}

void common_flags(CLI::App* app, json& given, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config file; flags override its values");
  flag<std::string>(app, given, "--runs-dir", "runs_dir", "Root of run directories (default runs)");
  flag<std::string>(app, given, "--run-id", "run_id", "Run directory name (default: derived from the generation settings)");
  flag<long long>(app, given, "--seed", "seed", "Seed recorded in every artifact (default 0)");
}

}  // namespace

std::vector<std::size_t> parse_counts(const std::string& list) {
  const auto tokens = split_list(list);
  std::vector<std::size_t> out;
  auto number = [](const std::string& t) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != t.size() || v < 1) throw InvalidArgument("bad count '" + t + "' in --counts");
    return static_cast<std::size_t>(v);
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != "...") {
      out.push_back(number(tokens[i]));
      continue;
    }
    if (out.size() < 2 || i + 1 >= tokens.size())
      throw InvalidArgument("'...' in --counts needs two values before it and one after");
    const std::size_t a = out[out.size() - 2], b = out.back();
    const std::size_t end = number(tokens[i + 1]);
    if (b <= a || end <= b) throw InvalidArgument("'...' in --counts needs an increasing progression");
    const std::size_t step = b - a;
    for (std::size_t v = b + step; v < end; v += step) out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("--counts is empty");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Similar-question generation toolkit for retrieval knowledge bases", "sqg"};
  app.require_subcommand(1);
  json given = json::object();
  std::string config_path;

  auto* ingest = app.add_subcommand("ingest", "Read QA pairs (JSONL or CSV) into a knowledge-base file");
  common_flags(ingest, given, config_path);
  flag<std::string>(ingest, given, "--input", "input", "QA-pair file to read");
  flag<std::string>(ingest, given, "--format", "format", "jsonl or csv (default: by extension)");
  flag<std::string>(ingest, given, "--out", "out", "Output KB path (default <run>/kb.jsonl)");
  flag<std::string>(ingest, given, "--name", "name", "Knowledge-base name");

  auto* train = app.add_subcommand("build-train", "Export fine-tuning samples as instruction JSONL");
  common_flags(train, given, config_path);
  flag<std::string>(train, given, "--kb", "kb", "Knowledge-base file");
  flag<std::string>(train, given, "--paradigm", "paradigm", "one_to_one, context_aware or intention_enhanced");
  flag<long long>(train, given, "--targets,-L", "targets_per_sample", "Targets per batch sample (default 20)");
  flag<long long>(train, given, "--samples-per-pair", "samples_per_pair", "Samples per pair, 0 for all (default 30)");
  flag<std::string>(train, given, "--out", "out", "Output path (default <run>/train.jsonl)");

  auto* gen = app.add_subcommand("generate", "Generate similar questions for every pair");
  common_flags(gen, given, config_path);
  flag<std::string>(gen, given, "--kb", "kb", "Knowledge-base file");
  flag<std::string>(gen, given, "--mode", "mode", "one_to_one, context_aware or intention_enhanced (aliases: one, context, intention)");
  flag<long long>(gen, given, "-n,--n", "n", "Questions to generate per pair (default 20)");
  flag<long long>(gen, given, "-k,--k", "k", "Questions requested per call (default 20)");
  flag<std::string>(gen, given, "--pairs", "pairs", "Comma-separated pair ids to generate for");
  flag<std::string>(gen, given, "--mock-script", "mock_script", "Offline provider script (JSONL)");
  flag<std::string>(gen, given, "--provider-url", "provider_url", "Completion endpoint base URL");
  flag<std::string>(gen, given, "--sampling-preset", "sampling_preset", "llm (endpoint defaults) or retrieval-model (T=0.9, top-k=5)");
  flag<double>(gen, given, "--temperature", "temperature", "Sampling temperature");
  flag<int>(gen, given, "--top-k", "top_k", "Top-k sampling");
  flag<double>(gen, given, "--top-p", "top_p", "Nucleus sampling");
  flag<int>(gen, given, "--max-tokens", "max_tokens", "Completion length limit");
  flag<long long>(gen, given, "--parallelism", "parallelism", "Concurrent provider calls (default 1)");
  flag<long long>(gen, given, "--retry-factor", "retry_factor", "Call budget multiple (default 3)");

  auto* eval = app.add_subcommand("evaluate", "Score a run: semantic precision/recall/F1 and Distinct-N");
  common_flags(eval, given, config_path);
  flag<std::string>(eval, given, "--kb", "kb", "Knowledge-base file holding the references");
  flag<std::string>(eval, given, "--counts", "counts", "Generation counts, e.g. 10,20,...,100 (default 20)");
  flag<std::string>(eval, given, "--embed-url", "embed_url", "Embedding endpoint base URL");
  flag<long long>(eval, given, "--embed-dim", "embed_dim", "Offline hash-embedder dimension (default 64)");
  flag<std::string>(eval, given, "--label", "label", "Row label for reports");

  auto* sim = app.add_subcommand("simulate", "Measure top-1 retrieval accuracy with and without expansion");
  common_flags(sim, given, config_path);
  flag<std::string>(sim, given, "--kb", "kb", "Knowledge-base file (with generated questions)");
  flag<std::string>(sim, given, "--queries", "queries", "Labeled queries JSONL");
  flag<bool>(sim, given, "--apply-marks", "apply_marks", "Use the run's review marks for candidate status (default true)");
  flag<std::string>(sim, given, "--conditions", "conditions", "Comma list of none, accepted_only, all");
  flag<std::string>(sim, given, "--embed-url", "embed_url", "Embedding endpoint base URL");
  flag<long long>(sim, given, "--embed-dim", "embed_dim", "Offline hash-embedder dimension (default 64)");

  auto* serve = app.add_subcommand("review-serve", "Serve the expert-review REST API");
  common_flags(serve, given, config_path);
  flag<std::string>(serve, given, "--host", "host", "Bind address (default 127.0.0.1)");
  flag<int>(serve, given, "--port", "port", "Port, 0 for any free port (default 8088)");
  flag<std::string>(serve, given, "--state-dir", "state_dir", "Session and mark logs (default <run>)");

  auto* report = app.add_subcommand("report", "Render the metrics table and curve CSV");
  common_flags(report, given, config_path);
  flag<std::string>(report, given, "--runs", "runs", "Comma-separated run ids to compare");
  flag<long long>(report, given, "--at", "at", "Only show this generation count");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  auto fail = [&](int code, const std::string& message) {
    err << json{{"error", message}, {"command", command}, {"exit_code", code}}.dump() << "\n";
    return code;
  };

  json values = json::object();
  try {
    if (!config_path.empty()) {
      values = json::parse(read_file(config_path));
      if (!values.is_object()) return fail(kExitConfig, "config file must hold a JSON object");
    }
  } catch (const std::exception& e) {
    return fail(kExitConfig, std::string("cannot read config: ") + e.what());
  }
  const std::pair<const char*, const char*> env_keys[] = {{"SQG_PROVIDER_URL", "provider_url"},
                                                          {"SQG_PROVIDER_TOKEN", "provider_token"},
                                                          {"SQG_EMBED_URL", "embed_url"}};
  for (const auto& [var, key] : env_keys) {
    if (const char* v = std::getenv(var); v && *v && !values.contains(key)) values[key] = v;
  }
  values.merge_patch(given);
  const Config cfg(values);

  try {
    if (command == "ingest") return cmd_ingest(cfg, out);
    if (command == "build-train") return cmd_build_train(cfg, out);
    if (command == "generate") return cmd_generate(cfg, out, err);
    if (command == "evaluate") return cmd_evaluate(cfg, out);
    if (command == "simulate") return cmd_simulate(cfg, out);
    if (command == "review-serve") return cmd_review_serve(cfg, out);
    if (command == "report") return cmd_report(cfg, out);
  } catch (const ConfigError& e) {
    return fail(kExitConfig, e.what());
  } catch (const IngestError& e) {
    json records = json::array();
    for (const auto& f : e.failures()) records.push_back({{"line", f.line}, {"message", f.message}});
    err << json{{"error", e.what()}, {"command", command}, {"records", records}, {"exit_code", kExitRuntime}}.dump()
        << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    return fail(kExitRuntime, e.what());
  }
  return fail(kExitConfig, "unknown command " + command);
}

}  // namespace sqg::cli
