#include "pfreq/errors.hpp"

namespace pfreq {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::incompatible_fields: return "incompatible-fields";
        case ErrorKind::degenerate_input: return "degenerate-input";
        case ErrorKind::numerical_failure: return "numerical-failure";
        case ErrorKind::certification_failure: return "certification-failure";
        case ErrorKind::degenerate_trace: return "degenerate-trace";
        case ErrorKind::config_error: return "config-error";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace pfreq
