#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pfreq {

enum class ErrorKind {
    invalid_input,
    incompatible_fields,
    degenerate_input,
    numerical_failure,
    certification_failure,
    degenerate_trace,
    config_error,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library is an Error carrying one of the kinds above.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace pfreq
