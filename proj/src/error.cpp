#include "rlad/error.hpp"

#include <cstdio>

namespace rlad {

std::string_view category_name(ErrorCategory c) noexcept
{
    switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::accuracy: return "accuracy";
    case ErrorCategory::truncation: return "truncation";
    case ErrorCategory::resource: return "resource";
    case ErrorCategory::conditioning: return "conditioning";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCategory c) noexcept
{
    // 1 is reserved for unexpected failures, 2 for usage errors.
    switch (c) {
    case ErrorCategory::domain: return 3;
    case ErrorCategory::accuracy: return 4;
    case ErrorCategory::truncation: return 5;
    case ErrorCategory::resource: return 6;
    case ErrorCategory::conditioning: return 7;
    case ErrorCategory::dimension: return 8;
    case ErrorCategory::config: return 9;
    case ErrorCategory::io: return 10;
    }
    return 1;
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void throw_with_context(ErrorCategory category, const std::string& what)
{
    switch (category) {
    case ErrorCategory::domain:
        throw DomainError(what);
    case ErrorCategory::accuracy:
        throw AccuracyError(what);
    case ErrorCategory::truncation:
        throw TruncationError(what);
    case ErrorCategory::resource:
        throw ResourceError(what);
    case ErrorCategory::conditioning:
        throw ConditioningError(what);
    case ErrorCategory::dimension:
        throw DimensionError(what);
    case ErrorCategory::config:
        throw ConfigError(what);
    case ErrorCategory::io:
        break;
    }
    throw IoError(what);
}

}  // namespace rlad
