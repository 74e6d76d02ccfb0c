#include "sqg/prompt.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "sqg/error.hpp"
#include "sqg/io.hpp"
#include "sqg/log.hpp"
#include "sqg/random.hpp"
#include "sqg/text.hpp"

namespace sqg {

using nlohmann::json;

namespace {

const PromptTemplate kTemplates[] = {
    {Mode::one_to_one, "将输入的句子改写为保持相同意义但表述不同的新句子。", true},
    {Mode::context_aware, "帮我生成{K}条与{question}相似的问句。", false},
    {Mode::intention_enhanced, "帮我根据问题{question}和答案{answer}，生成{K}个不同且意思相近的问题。",
     false},
};

// Single left-to-right pass so slot-like text inside a value is left alone.
std::string fill(std::string_view pattern, std::string_view question, std::string_view answer,
                 std::string_view k) {
  std::string out;
  out.reserve(pattern.size() + question.size() + answer.size());
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const auto close = pattern.find('}', i);
      if (close != std::string_view::npos) {
        const auto slot = pattern.substr(i + 1, close - i - 1);
        if (slot == "question" || slot == "answer" || slot == "K") {
          out += slot == "question" ? question : slot == "answer" ? answer : k;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(pattern[i++]);
  }
  return out;
}

}  // namespace

const PromptTemplate& prompt_template(Mode mode) {
  for (const auto& t : kTemplates)
    if (t.id == mode) return t;
  throw InvalidArgument("no template for mode");
}

std::string render_prompt(Mode mode, std::string_view question,
                          std::optional<std::string_view> answer, int k) {
  if (text::trim(question).empty()) throw InvalidArgument("question is empty");
  if (mode == Mode::intention_enhanced && (!answer || text::trim(*answer).empty()))
    throw InvalidArgument("intention_enhanced prompt requires an answer");
  if (mode != Mode::one_to_one && k < 1) throw InvalidArgument("K must be >= 1");
  return fill(prompt_template(mode).instruction_pattern, question, answer.value_or(""),
              std::to_string(k));
}

std::string render_completion_prompt(Mode mode, std::string_view question,
                                     std::optional<std::string_view> answer, int k) {
  std::string prompt = render_prompt(mode, question, answer, k);
  if (prompt_template(mode).question_in_input) {
    prompt += '\n';
    prompt += question;
  }
  return prompt;
}

std::string join_numbered(const std::vector<std::string>& questions) {
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + questions[i];
  }
  return out;
}

std::vector<TrainingSample> build_training_samples(const KnowledgeBase& kb,
                                                   const TrainingOptions& options) {
  const bool batch = options.paradigm != Mode::one_to_one;
  const std::size_t L = options.targets_per_sample;
  if (batch && L < 1) throw InvalidArgument("targets_per_sample must be >= 1");
  if (options.samples_per_pair && *options.samples_per_pair < 1)
    throw InvalidArgument("samples_per_pair must be >= 1");

  Rng rng(options.seed);
  std::vector<TrainingSample> samples;
  std::size_t usable = 0, skipped = 0;

  for (const auto& pair : kb.pairs()) {
    const auto& qs = pair.questions;
    const std::size_t K = qs.size();
    const std::size_t needed = batch ? L + 1 : 2;
    if (K < needed) {
      ++skipped;
      continue;
    }
    ++usable;
    std::size_t local = 0;
    auto push = [&](std::size_t input, std::vector<std::size_t> targets) {
      TrainingSample s;
      s.sample_id = pair.pair_id + "-" + std::to_string(local++);
      s.pair_id = pair.pair_id;
      s.paradigm = options.paradigm;
      s.source_question = qs[input];
      for (auto t : targets) s.targets.push_back(qs[t]);
      if (batch) {
        s.instruction = render_prompt(options.paradigm, qs[input], pair.answer, static_cast<int>(L));
        s.output = join_numbered(s.targets);
      } else {
        s.instruction = render_prompt(Mode::one_to_one, qs[input], std::nullopt, 1);
        s.input = qs[input];
        s.output = s.targets.front();
      }
      samples.push_back(std::move(s));
    };

    if (!batch) {
      // Ordered pairs enumerated as (i, j), i != j, row-major.
      const std::size_t total = K * (K - 1);
      const std::size_t want = std::min(options.samples_per_pair.value_or(total), total);
      std::vector<std::size_t> chosen;
      if (want == total) {
        chosen.resize(total);
        for (std::size_t c = 0; c < total; ++c) chosen[c] = c;
      } else {
        chosen = rng.sample(total, want);
        std::sort(chosen.begin(), chosen.end());
      }
      for (auto c : chosen) {
        const std::size_t i = c / (K - 1);
        std::size_t j = c % (K - 1);
        if (j >= i) ++j;
        push(i, {j});
      }
    } else {
      const std::size_t count = options.samples_per_pair.value_or(K);
      for (std::size_t s = 0; s < count; ++s) {
        const std::size_t input = s % K;
        auto picks = rng.sample(K - 1, L);
        for (auto& p : picks)
          if (p >= input) ++p;
        std::sort(picks.begin(), picks.end());
        push(input, std::move(picks));
      }
    }
  }

  if (skipped > 0) {
    log::warn("skipped " + std::to_string(skipped) + " pair(s) with fewer than " +
              std::to_string(batch ? L + 1 : 2) + " questions");
  }
  if (usable == 0) {
    throw InvalidArgument("no pair has enough questions for paradigm " +
                          std::string(to_string(options.paradigm)));
  }
  return samples;
}

FinetuneRecord to_record(const TrainingSample& sample) {
  return {sample.instruction, sample.input, sample.output};
}

void export_finetune_jsonl(const std::vector<TrainingSample>& samples,
                           const std::filesystem::path& path) {
  if (samples.empty()) throw InvalidArgument("no samples to export");
  std::string out;
  for (const auto& s : samples) {
    out += json{{"instruction", s.instruction}, {"input", s.input}, {"output", s.output}}.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<FinetuneRecord> read_finetune_jsonl(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<FinetuneRecord> records;
  std::size_t offset = 0, lineno = 0;
  for (const auto& line : text::split_lines(content)) {
    ++lineno;
    if (!line.empty()) {
      try {
        const auto j = json::parse(line);
        records.push_back({j.at("instruction").get<std::string>(), j.at("input").get<std::string>(),
                           j.at("output").get<std::string>()});
      } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno, offset);
      }
    }
    offset += line.size() + 1;
  }
  return records;
}

}  // namespace sqg
