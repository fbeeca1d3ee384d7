#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crpd {

// Error categories map onto the CLI exit-code contract:
// usage -> 1, data -> 2, numerical -> 3.
enum class ErrorCategory { usage, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

class UsageError : public Error {
 public:
  UsageError(std::string code, const std::string& message)
      : Error(ErrorCategory::usage, std::move(code), message) {}
};

class DataError : public Error {
 public:
  DataError(std::string code, const std::string& message)
      : Error(ErrorCategory::data, std::move(code), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(ErrorCategory::numerical, std::move(code), message) {}
};

// ---- data errors ----

class ParseError : public DataError {
 public:
  ParseError(const std::string& origin, std::size_t row, std::size_t column,
             const std::string& message)
      : DataError("parse_error", origin + ": row " + std::to_string(row) + ", column " +
                                      std::to_string(column) + ": " + message),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class NonNumericCell : public ParseError {
 public:
  NonNumericCell(const std::string& origin, std::size_t row, std::size_t column,
                 const std::string& cell)
      : ParseError(origin, row, column, "cell '" + cell + "' is not a finite number") {}
};

class EmptyFile : public DataError {
 public:
  explicit EmptyFile(const std::string& origin)
      : DataError("empty_file", origin + ": no data rows") {}
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& name)
      : DataError("missing_column", "required column '" + name + "' not found"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// ---- usage errors ----

class DimensionMismatch : public UsageError {
 public:
  explicit DimensionMismatch(const std::string& message)
      : UsageError("dimension_mismatch", message) {}
};

class BadFoldCount : public UsageError {
 public:
  BadFoldCount(int folds, long n)
      : UsageError("bad_fold_count", "fold count " + std::to_string(folds) +
                                         " invalid for n = " + std::to_string(n)) {}
};

class NotApplicable : public UsageError {
 public:
  explicit NotApplicable(const std::string& message) : UsageError("not_applicable", message) {}
};

// ---- numerical errors ----

class NonPositiveWeight : public NumericalError {
 public:
  NonPositiveWeight(std::size_t index, double value)
      : NumericalError("non_positive_weight",
                       "weight at index " + std::to_string(index) + " is " +
                           std::to_string(value) + "; all weights must be positive"),
        index_(index),
        value_(value) {}

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

// Positivity of the implied-weight argument failed at one observation.
class InfeasibleIndex : public NumericalError {
 public:
  InfeasibleIndex(std::size_t index, double value)
      : NumericalError("infeasible_index",
                       "weight argument at index " + std::to_string(index) + " is " +
                           std::to_string(value) + "; below the positivity floor"),
        index_(index),
        value_(value) {}

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

// The empirical-likelihood limit has no finite unshifted location parameter.
class ElBranchDegenerate : public NumericalError {
 public:
  ElBranchDegenerate()
      : NumericalError("el_branch_degenerate",
                       "unshifted location multiplier is undefined in the "
                       "empirical-likelihood limit; use the shifted form") {}
};

class AllInfeasible : public NumericalError {
 public:
  explicit AllInfeasible(const std::string& message) : NumericalError("all_infeasible", message) {}
};

class RankDeficient : public NumericalError {
 public:
  explicit RankDeficient(const std::string& message) : NumericalError("rank_deficient", message) {}
};

class SingularOmega : public NumericalError {
 public:
  explicit SingularOmega(const std::string& message) : NumericalError("singular_omega", message) {}
};

class AllInfinite : public NumericalError {
 public:
  AllInfinite() : NumericalError("all_infinite", "every candidate value is infinite") {}
};

class AllGammaFailed : public NumericalError {
 public:
  AllGammaFailed()
      : NumericalError("all_gamma_failed",
                       "every gamma in the grid had at least one failed fold") {}
};

}  // namespace crpd
