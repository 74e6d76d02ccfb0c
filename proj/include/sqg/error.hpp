#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised for malformed persisted data; offset is the absolute byte
/// position in the input where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset)
      : Error(what), line_(line), offset_(offset) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

struct RecordFailure {
  std::size_t line = 0;
  std::string message;
};

/// Aggregated record-level failures from one ingestion pass.
class IngestError : public Error {
 public:
  explicit IngestError(std::vector<RecordFailure> failures);
  const std::vector<RecordFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<RecordFailure> failures_;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqg
