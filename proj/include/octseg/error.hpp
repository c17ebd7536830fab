#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace octseg {

enum class ErrorKind {
  Dimension,
  Parameter,
  InsufficientData,
  OrderingViolation,
  UndefinedMetric,
  Parse,
  Io,
  EmptyCorpus,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::OrderingViolation: return "ordering-violation";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::EmptyCorpus: return "empty-corpus";
  }
  return "unknown";
}

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// An error raised inside segment_scan, tagged with the stage that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, ErrorKind kind, const std::string& reason)
      : Error(kind, stage + ": " + reason),
        stage_(std::move(stage)),
        reason_(reason) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string stage_;
  std::string reason_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace detail
}  // namespace octseg
