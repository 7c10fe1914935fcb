#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vigil {

// Typed failures shared across the library. Each carries enough context to
// name the offending input; callers that talk to the outside world (CLI,
// wire protocol) map the type name into their diagnostics.

struct MalformedHeader : std::runtime_error {
  explicit MalformedHeader(const std::string& what)
      : std::runtime_error("MalformedHeader: " + what) {}
};

struct BadField : std::runtime_error {
  std::size_t row;
  std::string column;
  BadField(std::size_t row_, std::string column_, const std::string& reason)
      : std::runtime_error("BadField: row " + std::to_string(row_) + ", column '" +
                           column_ + "': " + reason),
        row(row_),
        column(std::move(column_)) {}
};

struct GradeMismatch : std::runtime_error {
  std::size_t row;
  GradeMismatch(std::size_t row_, int grade, int score_sum)
      : std::runtime_error("GradeMismatch: row " + std::to_string(row_) + ": grade " +
                           std::to_string(grade) + " != score sum " +
                           std::to_string(score_sum)),
        row(row_) {}
};

struct BadConfig : std::runtime_error {
  explicit BadConfig(const std::string& what) : std::runtime_error("BadConfig: " + what) {}
};

struct EmptySetPool : std::runtime_error {
  EmptySetPool() : std::runtime_error("EmptySetPool: exam spec has no question sets") {}
};

struct UnknownSession : std::runtime_error {
  explicit UnknownSession(const std::string& session_id)
      : std::runtime_error("UnknownSession: " + session_id) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what)
      : std::runtime_error("ShapeMismatch: " + what) {}
};

struct NonFiniteLoss : std::runtime_error {
  std::size_t epoch;
  explicit NonFiniteLoss(std::size_t epoch_)
      : std::runtime_error("NonFiniteLoss: training diverged at epoch " +
                           std::to_string(epoch_)),
        epoch(epoch_) {}
};

struct NonFiniteGradient : std::runtime_error {
  explicit NonFiniteGradient(const std::string& what)
      : std::runtime_error("NonFiniteGradient: " + what) {}
};

struct NoAbnormalSeed : std::runtime_error {
  NoAbnormalSeed()
      : std::runtime_error("NoAbnormalSeed: augmentation needs at least one abnormal example") {}
};

struct EmptyDataset : std::runtime_error {
  explicit EmptyDataset(const std::string& what) : std::runtime_error("EmptyDataset: " + what) {}
};

struct OutOfOrder : std::runtime_error {
  explicit OutOfOrder(const std::string& what) : std::runtime_error("OutOfOrder: " + what) {}
};

}  // namespace vigil
