#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lbpcert {

/// Outcome of one convergence condition on one model.
struct Certificate {
    std::string name;
    /// Norm, spectral radius, or (for heskes) residual infeasibility of the allocation LP.
    double value = 0.0;
    bool holds = false;
    /// Contraction-rate estimate; equal to value for norm and spectral bounds.
    double rate = 0.0;
    /// Interval recursion depth, set only for the improved bound.
    std::optional<int> m;
    /// Free-form diagnostics (warnings, per-edge notes).
    std::vector<std::string> detail;
};

inline constexpr const char* kCertificateCsvHeader = "bound_name,value,holds,m";

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string to_csv_row(const Certificate& c) {
    std::string row = c.name + "," + format_double(c.value) + "," + (c.holds ? "true" : "false") + ",";
    if (c.m) row += std::to_string(*c.m);
    return row;
}

inline void write_certificates_csv(std::ostream& out, const std::vector<Certificate>& certs) {
    out << kCertificateCsvHeader << "\n";
    for (const auto& c : certs) out << to_csv_row(c) << "\n";
}

}  // namespace lbpcert
