#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

namespace pfreq {

/// Outcome of one verification. `worst_margin` is signed (negative means the inequality
/// is violated) and pass holds exactly when worst_margin >= -tolerance.
struct CheckReport {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;
    std::optional<std::size_t> location;  // time-sample index of the worst margin
    double tolerance = 0.0;
    std::map<std::string, double> aux;
    std::map<std::string, std::string> notes;

    void set_margin(double margin, std::optional<std::size_t> where, double tol) {
        worst_margin = margin;
        location = where;
        tolerance = tol;
        pass = margin >= -tol;
    }
};

/// Running minimum used by the checks to locate their worst margin.
struct MarginTracker {
    double value = 0.0;
    std::optional<std::size_t> where;
    bool any = false;

    void observe(double margin, std::size_t k) {
        if (!any || margin < value) {
            value = margin;
            where = k;
            any = true;
        }
    }
};

}  // namespace pfreq
