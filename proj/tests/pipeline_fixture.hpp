#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sqg/io.hpp"
#include "sqg/kb.hpp"
#include "sqg/prompt.hpp"
#include "sqg/provider.hpp"

namespace sqg::test {

/// Writes a mock script answering every batch prompt for the pairs in
/// `qa_path` with `responses` numbered lists of `per_response` fresh
/// variants each, plus one-to-one rewrites.
inline void write_mock_for(const std::filesystem::path& qa_path, const std::filesystem::path& out,
                           std::size_t responses, std::size_t per_response) {
  const auto kb = ingest_qa_pairs(qa_path, IngestFormat::jsonl);
  std::vector<MockRule> rules;
  for (const auto& p : kb.pairs()) {
    const auto& q = p.source_question();
    std::vector<std::string> lists, singles;
    for (std::size_t r = 0; r < responses; ++r) {
      std::vector<std::string> items;
      for (std::size_t i = 0; i < per_response; ++i)
        items.push_back(q + "（说法" + std::to_string(r * per_response + i + 1) + "）");
      lists.push_back(join_numbered(items));
      singles.push_back(q + "（改写" + std::to_string(r + 1) + "）");
    }
    rules.push_back({MockRule::Match::prefix, "帮我根据问题" + q + "和答案", lists});
    rules.push_back({MockRule::Match::prefix, "帮我生成" + std::to_string(per_response) + "条与" + q, lists});
    rules.push_back({MockRule::Match::exact, render_completion_prompt(Mode::one_to_one, q, std::nullopt, 1), singles});
  }
  write_file(out, serialize_mock_script(rules));
}

}  // namespace sqg::test
