#include "psaflow/errors.hpp"

namespace psaflow {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MixedPatient: return "MixedPatient";
        case ErrorKind::NegativeValue: return "NegativeValue";
        case ErrorKind::InvalidValue: return "InvalidValue";
        case ErrorKind::UnsortedSeries: return "UnsortedSeries";
        case ErrorKind::ZeroPeak: return "ZeroPeak";
        case ErrorKind::InvalidWindow: return "InvalidWindow";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MissingTruth: return "MissingTruth";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::OrphanRow: return "OrphanRow";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

namespace {

std::string located(const std::string& path, std::size_t line, const std::string& reason) {
    std::string out = path;
    if (line > 0) {
        out += ":" + std::to_string(line);
    }
    return out + ": " + reason;
}

}  // namespace

FileError::FileError(ErrorKind kind, std::string path, std::size_t line, const std::string& reason)
    : Error(kind, located(path, line, reason)), path_(std::move(path)), line_(line), reason_(reason) {}

}  // namespace psaflow
