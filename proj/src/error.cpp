// SPDX-License-Identifier: Apache-2.0

#include "feddp/error.hpp"

namespace feddp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::SingleClassDataset: return "SingleClassDataset";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::UnknownProject: return "UnknownProject";
    case ErrorKind::TestEqualsDistillation: return "TestEqualsDistillation";
    case ErrorKind::RepeatMismatch: return "RepeatMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace feddp
