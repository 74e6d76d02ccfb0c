#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sqg/embed.hpp"
#include "sqg/error.hpp"
#include "sqg/generate.hpp"
#include "sqg/kb.hpp"
#include "sqg/metrics.hpp"
#include "sqg/prompt.hpp"
#include "sqg/provider.hpp"
#include "sqg/retrieval.hpp"
#include "sqg/text.hpp"

namespace py = pybind11;
using namespace sqg;

namespace {

TokenEmbeddingSet token_set(const std::vector<Vector>& vectors) {
  return {std::vector<std::string>(vectors.size(), ""), vectors};
}

ScoreMatrix matrix(const std::vector<std::vector<double>>& rows) { return ScoreMatrix::from_rows(rows); }

}  // namespace

PYBIND11_MODULE(_sqg, m) {
  m.doc() = "Similar-question generation: prompt templates, generation, metrics and retrieval.";
  m.attr("__version__") = SQG_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NotFound>(m, "NotFound", PyExc_KeyError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<Mode>(m, "Mode")
      .value("one_to_one", Mode::one_to_one)
      .value("context_aware", Mode::context_aware)
      .value("intention_enhanced", Mode::intention_enhanced);
  m.def("parse_mode", &parse_mode, py::arg("name"));

  py::enum_<ReviewStatus>(m, "ReviewStatus")
      .value("candidate", ReviewStatus::candidate)
      .value("accepted", ReviewStatus::accepted)
      .value("rejected", ReviewStatus::rejected);

  // prompts
  m.def("render_prompt",
        [](Mode mode, const std::string& question, std::optional<std::string> answer, int k) {
          return render_prompt(mode, question,
                               answer ? std::optional<std::string_view>(*answer) : std::nullopt, k);
        },
        py::arg("mode"), py::arg("question"), py::arg("answer") = py::none(), py::arg("k") = 20,
        "Instruction text for a mode with the question, answer and K filled in.");
  m.def("render_completion_prompt",
        [](Mode mode, const std::string& question, std::optional<std::string> answer, int k) {
          return render_completion_prompt(mode, question,
                                          answer ? std::optional<std::string_view>(*answer) : std::nullopt, k);
        },
        py::arg("mode"), py::arg("question"), py::arg("answer") = py::none(), py::arg("k") = 20);

  // text
  m.def("normalize", &text::normalize, py::arg("text"));
  m.def("parse_multi_question", &parse_multi_question, py::arg("raw"), py::arg("expected_k"));
  m.def("dedup", &dedup, py::arg("questions"), py::arg("source_question") = "");

  // metrics
  m.def("distinct_n", &distinct_n, py::arg("questions"), py::arg("n"));
  m.def("distinct_avg", &distinct_avg, py::arg("questions"));
  m.def("bertscore",
        [](const std::vector<Vector>& c, const std::vector<Vector>& r) {
          const auto s = bertscore_parts(token_set(c), token_set(r));
          return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("candidate"), py::arg("reference"),
        "Greedy-matching BERTScore over token vectors; returns (precision, recall, f1).");
  m.def("semantic_precision", [](const std::vector<std::vector<double>>& s) { return semantic_precision(matrix(s)); },
        py::arg("scores"));
  m.def("semantic_recall", [](const std::vector<std::vector<double>>& s) { return semantic_recall(matrix(s)); },
        py::arg("scores"));
  m.def("semantic_f1", &semantic_f1, py::arg("precision"), py::arg("recall"));
  m.def("acceptance_ratio",
        [](const std::vector<std::string>& verdicts) {
          std::vector<ReviewMark> marks;
          for (std::size_t i = 0; i < verdicts.size(); ++i)
            marks.push_back({std::to_string(i), parse_verdict(verdicts[i]), "", ""});
          return acceptance_ratio(marks);
        },
        py::arg("verdicts"), "Share of \"accept\" among a list of \"accept\"/\"reject\" verdicts.");
  m.def("format_percent", py::overload_cast<double>(&format_percent), py::arg("ratio"));
  m.def("format_percent", py::overload_cast<std::size_t, std::size_t>(&format_percent), py::arg("numerator"),
        py::arg("denominator"));

  // knowledge base
  py::class_<GeneratedQuestion>(m, "GeneratedQuestion")
      .def_readonly("text", &GeneratedQuestion::text)
      .def_readonly("mode", &GeneratedQuestion::mode)
      .def_readonly("status", &GeneratedQuestion::status);
  py::class_<QAPair>(m, "QAPair")
      .def_readonly("pair_id", &QAPair::pair_id)
      .def_readonly("answer", &QAPair::answer)
      .def_readonly("questions", &QAPair::questions)
      .def_readonly("tags", &QAPair::tags)
      .def_readonly("generated", &QAPair::generated)
      .def("__repr__", [](const QAPair& p) { return "<QAPair " + p.pair_id + ">"; });
  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def_property_readonly("pairs", &KnowledgeBase::pairs)
      .def_property_readonly("name", [](const KnowledgeBase& kb) { return kb.metadata().name; })
      .def("__len__", &KnowledgeBase::size)
      .def("__getitem__", &KnowledgeBase::at, py::return_value_policy::copy)
      .def("save", [](const KnowledgeBase& kb, const std::filesystem::path& p) { save_kb(kb, p); });
  m.def("load_kb", &load_kb, py::arg("path"));
  m.def("ingest_qa_pairs",
        [](const std::filesystem::path& path, const std::string& format) {
          return ingest_qa_pairs(path, parse_ingest_format(format));
        },
        py::arg("path"), py::arg("format") = "jsonl");

  // training data
  py::class_<TrainingSample>(m, "TrainingSample")
      .def_readonly("instruction", &TrainingSample::instruction)
      .def_readonly("input", &TrainingSample::input)
      .def_readonly("output", &TrainingSample::output)
      .def_readonly("pair_id", &TrainingSample::pair_id)
      .def_readonly("source_question", &TrainingSample::source_question)
      .def_readonly("targets", &TrainingSample::targets);
  m.def("build_training_samples",
        [](const KnowledgeBase& kb, Mode paradigm, std::size_t targets, std::optional<std::size_t> per_pair,
           std::uint64_t seed) {
          TrainingOptions o;
          o.paradigm = paradigm;
          o.targets_per_sample = targets;
          o.samples_per_pair = per_pair;
          o.seed = seed;
          return build_training_samples(kb, o);
        },
        py::arg("kb"), py::arg("paradigm") = Mode::context_aware, py::arg("targets_per_sample") = 20,
        py::arg("samples_per_pair") = 30, py::arg("seed") = 0);
  m.def("export_finetune_jsonl", &export_finetune_jsonl, py::arg("samples"), py::arg("path"));

  // generation with the offline provider
  py::class_<GenerationBatch>(m, "GenerationBatch")
      .def_readonly("pair_id", &GenerationBatch::pair_id)
      .def_readonly("mode", &GenerationBatch::mode)
      .def_readonly("questions", &GenerationBatch::questions)
      .def_readonly("calls", &GenerationBatch::calls)
      .def_readonly("underfilled", &GenerationBatch::underfilled);
  py::class_<MockProvider>(m, "MockProvider")
      .def_static("from_file", &MockProvider::from_file, py::arg("path"))
      .def_property_readonly("call_count", &MockProvider::call_count);
  m.def("generate",
        [](MockProvider& provider, const QAPair& pair, std::size_t n, Mode mode, std::size_t k,
           std::optional<std::int64_t> seed) {
          SamplingParams p = SamplingParams::llm_defaults();
          p.seed = seed;
          return generate(provider, pair, n, mode, k, p);
        },
        py::arg("provider"), py::arg("pair"), py::arg("n"), py::arg("mode") = Mode::intention_enhanced,
        py::arg("k") = 20, py::arg("seed") = py::none());

  // evaluation with the offline embedder
  py::class_<HashEmbedder>(m, "HashEmbedder")
      .def(py::init<std::size_t, std::uint64_t>(), py::arg("dimension") = 64, py::arg("salt") = 0)
      .def("embed_sentence", &HashEmbedder::embed_sentence, py::arg("text"));
  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("generated_count", &MetricsReport::generated_count)
      .def_readonly("precision", &MetricsReport::precision)
      .def_readonly("recall", &MetricsReport::recall)
      .def_readonly("f1", &MetricsReport::f1)
      .def_readonly("distinct_1", &MetricsReport::distinct_1)
      .def_readonly("distinct_2", &MetricsReport::distinct_2)
      .def_readonly("distinct_avg", &MetricsReport::distinct_avg);
  m.def("evaluate",
        [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs,
           HashEmbedder& embedder, const std::vector<std::size_t>& counts) {
          std::vector<PairEvaluation> evals;
          for (std::size_t i = 0; i < pairs.size(); ++i)
            evals.push_back({"p" + std::to_string(i + 1), pairs[i].first, pairs[i].second});
          return evaluate_run(evals, embedder, counts);
        },
        py::arg("pairs"), py::arg("embedder"), py::arg("counts"),
        "Scores (generated, references) pairs at each count; one report per count.");
}
