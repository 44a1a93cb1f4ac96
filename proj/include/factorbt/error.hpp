#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace factorbt {

enum class ErrorCode {
  // marketdata
  EmptySeries,
  NonPositivePrice,
  AllMissingColumn,
  MissingFundamental,
  MissingIndustry,
  ZeroVarianceFactor,
  InvalidConfig,
  // factors
  ZeroVariance,
  LengthMismatch,
  NoFactorsSurvive,
  RankDeficient,
  // lstm
  DimensionMismatch,
  NonFiniteInput,
  EmptyInput,
  StaleTape,
  TooShort,
  DivergedLoss,
  // risk
  ZeroVolatility,
  TooFewObservations,
  // backtest
  InsufficientData,
  CalendarMismatch,
  // io
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Raised by fit_ols; carries the names of the columns that made the design
// matrix rank deficient.
class RankDeficientError : public Error {
 public:
  RankDeficientError(std::vector<std::string> columns, const std::string& message);

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// Raised by train when the epoch loss stops being finite.
class DivergedLossError : public Error {
 public:
  DivergedLossError(std::size_t epoch, const std::string& message);

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace factorbt
