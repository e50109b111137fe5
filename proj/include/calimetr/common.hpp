#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace calimetr {

inline constexpr const char* kToolVersion = "0.1.0";

// Tolerances shared across the toolkit.
inline constexpr double kSimplexTol = 1e-6;   // max |row sum - 1| accepted on ingest
inline constexpr double kProbFloor = 1e-12;   // clamp floor applied before any log

enum class ErrorCode {
  ShapeMismatch,
  SimplexViolation,
  LabelOutOfRange,
  UnknownKind,
  WrongMode,
  NoData,
  DegenerateDistribution,
  UnknownSorter,
  UnknownClass,
  EmptySubset,
  NonPositiveTemperature,
  NonPositiveFactor,
  EmptyGrid,
  EnsembleMisaligned,
  BadMagic,
  HeaderParse,
  PayloadSizeMismatch,
  RaggedRows,
  NonNumericCell,
  UnknownHeader,
  UnwritablePath,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

// Dense row-major matrix of doubles. Prediction tensors arrive as f32 but are
// upcast on ingest; accumulation never happens in float.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols}; }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

}  // namespace calimetr
