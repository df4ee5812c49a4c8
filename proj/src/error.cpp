#include "sde/error.hpp"

namespace sde {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingTask: return "MissingTask";
    case ErrorKind::RankGap: return "RankGap";
    case ErrorKind::DuplicateTask: return "DuplicateTask";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NoSeeds: return "NoSeeds";
    case ErrorKind::ExhaustedAttempts: return "ExhaustedAttempts";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoReferenceTests: return "NoReferenceTests";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::HttpError: return "HttpError";
    case ErrorKind::MissingApiKey: return "MissingApiKey";
    case ErrorKind::OutputDecodeError: return "OutputDecodeError";
  }
  return "Unknown";
}

}  // namespace sde
