#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlad {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
    domain,        // parameter outside its mathematical domain
    accuracy,      // algorithm cannot certify the requested tolerance
    truncation,    // series cap reached before the tail target
    resource,      // event or memory cap exceeded
    conditioning,  // numerically ill-conditioned decomposition
    dimension,     // mismatched vector sizes
    config,        // malformed configuration or flags
    io,            // file system failure
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

/// Shortest round-trip-ish rendering of a number for error messages (%.10g).
std::string num(double x);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class AccuracyError : public Error {
public:
    explicit AccuracyError(const std::string& what) : Error(ErrorCategory::accuracy, what) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& what) : Error(ErrorCategory::truncation, what) {}
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(ErrorCategory::resource, what) {}
};

class ConditioningError : public Error {
public:
    explicit ConditioningError(const std::string& what)
        : Error(ErrorCategory::conditioning, what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(ErrorCategory::dimension, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

/// Throws the subclass matching `category` with the given message.
[[noreturn]] void throw_with_context(ErrorCategory category, const std::string& what);

}  // namespace rlad
