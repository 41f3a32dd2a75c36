#pragma once

#include <stdexcept>
#include <string>

namespace trapan {

// Error taxonomy shared by the whole toolkit. The CLI maps these onto
// process exit codes (see cli.cpp), so new failure modes should reuse an
// existing category instead of inventing a new type.

/// Malformed container or unrecognized file magic.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid header but inconsistent payload.
struct CorruptError : std::runtime_error {
    explicit CorruptError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Underlying I/O failure (open/read/write).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Sample value outside the declared radiometric range.
struct RangeError : std::runtime_error {
    explicit RangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter outside its mathematical domain.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible image/tensor geometry.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value produced where a finite one is required (e.g. a loss).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trapan
