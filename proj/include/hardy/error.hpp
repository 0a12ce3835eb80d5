#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

enum class ErrorKind {
    invalid_range,
    invalid_argument,
    invalid_exponents,
    invalid_weight,
    degenerate_weight,
    not_geometric,
    hypothesis_violated,
    truncation_dominated,
    parse_error,
    unknown_parameter,
};

inline const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_range: return "invalid-range";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_exponents: return "invalid-exponents";
    case ErrorKind::invalid_weight: return "invalid-weight";
    case ErrorKind::degenerate_weight: return "degenerate-weight";
    case ErrorKind::not_geometric: return "not-geometric";
    case ErrorKind::hypothesis_violated: return "hypothesis-violated";
    case ErrorKind::truncation_dominated: return "truncation-dominated";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::unknown_parameter: return "unknown-parameter";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace hardy
