#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsync {

enum class ErrorKind {
    Truncation,
    Index,
    Divergence,
    Positivity,
    Aliasing,
    Degenerate,
    Cutoff,
    NoCrossing,
    NoBracket,
    Inconclusive,
    NoSeparatrix,
    InvalidConfig,
    Normalization,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries the module that raised it and
/// a machine-readable kind, so the CLI can emit a structured error record.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message)
        : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace qsync
