#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/batch.hpp"

namespace sqg {

/// One line of a run's batches.jsonl: the batch plus the pair context a
/// reviewer needs.
struct BatchRecord {
  std::string run_id;
  GenerationBatch batch;
  std::string source_question;
  std::string answer;
};

/// Serialization excludes timing so identical runs produce identical bytes.
std::string batch_record_to_json(const BatchRecord& record);
BatchRecord batch_record_from_json(std::string_view line);

void write_batches(const std::filesystem::path& path, const std::vector<BatchRecord>& records);
std::vector<BatchRecord> read_batches(const std::filesystem::path& path);

}  // namespace sqg
