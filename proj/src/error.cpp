#include "factorbt/error.hpp"

#include <utility>

namespace factorbt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::AllMissingColumn: return "AllMissingColumn";
    case ErrorCode::MissingFundamental: return "MissingFundamental";
    case ErrorCode::MissingIndustry: return "MissingIndustry";
    case ErrorCode::ZeroVarianceFactor: return "ZeroVarianceFactor";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoFactorsSurvive: return "NoFactorsSurvive";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::StaleTape: return "StaleTape";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::CalendarMismatch: return "CalendarMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

RankDeficientError::RankDeficientError(std::vector<std::string> columns,
                                       const std::string& message)
    : Error(ErrorCode::RankDeficient, message), columns_(std::move(columns)) {}

DivergedLossError::DivergedLossError(std::size_t epoch, const std::string& message)
    : Error(ErrorCode::DivergedLoss, message), epoch_(epoch) {}

}  // namespace factorbt
