// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace claimstage {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration. The CLI maps this family to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A record-level parse failure, carrying the 1-based data row and raw field.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t row, std::string column, std::string raw, const std::string& message)
        : ValidationError("row " + std::to_string(row) + ", column '" + column + "': " + message),
          row_(row), column_(std::move(column)), raw_(std::move(raw)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }
    const std::string& raw() const noexcept { return raw_; }

private:
    std::size_t row_;
    std::string column_;
    std::string raw_;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Unknown id, language or model.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Binary embedding file is malformed.
class FormatError : public Error {
public:
    FormatError(std::uint64_t offset, const std::string& message)
        : Error("byte offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// A caller broke an operation's precondition (dimension mismatch, list too long, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Remote service unreachable or answered with a non-2xx status.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Failure inside a pipeline stage; `stage()` names the stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage " + stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace claimstage
