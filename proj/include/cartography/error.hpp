#pragma once

#include <stdexcept>
#include <string>

namespace cartography {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { usage = 1, ingest = 2, compute = 3, output = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct IngestError : Error {
  explicit IngestError(const std::string& what) : Error(ErrorKind::ingest, what) {}
};

struct ComputeError : Error {
  explicit ComputeError(const std::string& what) : Error(ErrorKind::compute, what) {}
};

struct OutputError : Error {
  explicit OutputError(const std::string& what) : Error(ErrorKind::output, what) {}
};

}  // namespace cartography
