#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dyve {

/// Base error for the engine. `category()` is a stable machine-readable
/// token; the CLI prints it verbatim and maps it to an exit code.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class BoundsError : public Error {
public:
    explicit BoundsError(const std::string& message) : Error("bounds", message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Model/dataset file decode failures carry a distinct code per failure mode.
enum class FormatErrorCode {
    BadMagic,
    BadVersion,
    TruncatedBlob,
    BadManifest,
};

class FormatError : public Error {
public:
    FormatError(FormatErrorCode code, const std::string& message)
        : Error(code_name(code), message), code_(code) {}

    FormatErrorCode code() const noexcept { return code_; }

    static const char* code_name(FormatErrorCode code) {
        switch (code) {
            case FormatErrorCode::BadMagic: return "bad_magic";
            case FormatErrorCode::BadVersion: return "bad_version";
            case FormatErrorCode::TruncatedBlob: return "truncated_blob";
            case FormatErrorCode::BadManifest: return "bad_manifest";
        }
        return "format";
    }

private:
    FormatErrorCode code_;
};

class TrainError : public Error {
public:
    explicit TrainError(const std::string& message) : Error("train", message) {}
};

}  // namespace dyve
