#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psaflow {

enum class ErrorKind {
    MixedPatient,
    NegativeValue,
    InvalidValue,
    UnsortedSeries,
    ZeroPeak,
    InvalidWindow,
    InvalidConfig,
    MissingTruth,
    ParseError,
    OrphanRow,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library. Validation problems (bad data, bad
// config) and I/O problems share one type; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    bool is_io() const noexcept { return kind_ == ErrorKind::IoError; }

private:
    ErrorKind kind_;
};

// Errors tied to a location in an input or output file. line is 1-based;
// 0 means the problem concerns the file as a whole.
class FileError : public Error {
public:
    FileError(ErrorKind kind, std::string path, std::size_t line, const std::string& reason);

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string path_;
    std::size_t line_;
    std::string reason_;
};

}  // namespace psaflow
