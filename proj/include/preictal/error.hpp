#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace preictal {

/// Input that violates a documented contract (bad shapes, bad values, bad config).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failures: missing files, unwritable directories.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed container or text input. Carries the byte offset where parsing stopped.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::uint64_t byte_offset)
        : ValidationError(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    std::uint64_t byte_offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace preictal
