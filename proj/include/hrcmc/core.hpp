#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hrcmc {

inline constexpr double pi = std::numbers::pi;

enum class ErrorKind {
    invalid_point,
    out_of_chart,
    precondition,
    singular_profile,
    complex_curvature,
    extraction,
    io,
    blowup,
    comparison_breakdown,
    chart_degeneracy,
    out_of_tube,
    degenerate_immersion,
    numerical,
    spectral_accuracy,
    symmetry,
    projection,
    weight,
    indicial_collision,
    no_contraction,
    domain,
    nonconvergence,
    config,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_point: return "invalid-point";
    case ErrorKind::out_of_chart: return "out-of-chart";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::singular_profile: return "singular-profile";
    case ErrorKind::complex_curvature: return "complex-curvature";
    case ErrorKind::extraction: return "extraction";
    case ErrorKind::io: return "io";
    case ErrorKind::blowup: return "finite-time-blowup";
    case ErrorKind::comparison_breakdown: return "comparison-breakdown";
    case ErrorKind::chart_degeneracy: return "chart-degeneracy";
    case ErrorKind::out_of_tube: return "out-of-tube";
    case ErrorKind::degenerate_immersion: return "immersion-degeneracy";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::spectral_accuracy: return "spectral-accuracy";
    case ErrorKind::symmetry: return "symmetry";
    case ErrorKind::projection: return "projection";
    case ErrorKind::weight: return "weight";
    case ErrorKind::indicial_collision: return "indicial-root-collision";
    case ErrorKind::no_contraction: return "no-contraction";
    case ErrorKind::domain: return "domain";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) throw Error(kind, what);
}

inline double sech(double s) { return 1.0 / std::cosh(s); }

} // namespace hrcmc
