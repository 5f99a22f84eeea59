// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_ERROR_HPP
#define FEDDP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace feddp {

enum class ErrorKind {
  InvalidArgument,
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  SingleClassDataset,
  DimensionMismatch,
  ZeroVector,
  EmptyInput,
  LengthMismatch,
  SingleClass,
  AllZeroDifferences,
  UnknownProject,
  TestEqualsDistillation,
  RepeatMismatch,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as this exception; kind() is stable and is
// what the CLI writes into its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace feddp

#endif  // FEDDP_ERROR_HPP
