#pragma once

#include "sdelab/noise.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sdelab {

enum class PhiKind { power_alpha, inv_power_alpha, log_abs, log_abs_squared, square };

std::string to_string(PhiKind kind);
PhiKind phi_kind_from_string(const std::string& name);

// Test function catalog for the second-order expansion of
// E[phi(1 + f h + g sqrt(h) xi)]. Every member is even in its argument.
struct PhiSpec {
    PhiKind kind = PhiKind::square;
    double alpha = 0.0;

    bool operator==(const PhiSpec&) const = default;

    double value_at_one() const;
    double d1_at_one() const;
    double d2_at_one() const;
    // phi evaluated from |y| (all catalog functions are even).
    double eval_abs(double abs_y) const;
};

// Validates the admissible alpha range (inv_power_alpha needs 0 < alpha <= 0.9
// for an integrable singularity with margin; power_alpha needs alpha > 0).
PhiSpec make_phi(PhiKind kind, double alpha = 0.0);

// E[phi(1 + f h + g sqrt(h) xi)] by deterministic quadrature against the
// noise distribution. Smooth integrands use a fixed-node Gauss rule with a
// node-doubling self check; integrands singular at y = 0 are split at the
// singular abscissa xi* = -(1+fh)/(g sqrt(h)) and integrated with
// double-exponential nodes on each side. Throws AccuracyError when the
// self-check fails; ConfigError for precondition violations.
double expect_phi(const PhiSpec& phi, double f, double g, double h, const NoiseSpec& noise);

// Second-order expansion phi(1) + phi'(1) f h + phi''(1)/2 g^2 h.
double ito_expansion(const PhiSpec& phi, double f, double g, double h);

struct ItoReport {
    PhiSpec phi;
    double f = 0.0, g = 0.0, h = 0.0;
    double lhs = 0.0;      // quadrature expectation
    double rhs = 0.0;      // expansion
    double err = 0.0;      // lhs - rhs
    double norm_err = 0.0; // err / (h * max(|f|, g^2))
};

ItoReport ito_report(const PhiSpec& phi, double f, double g, double h, const NoiseSpec& noise);

struct ItoScanResult {
    std::vector<ItoReport> reports;
    bool trend_checked = false; // false for a degenerate grid of length 1
    bool monotone = false;      // |norm_err| nonincreasing along the grid
};

// One report per h in a positive decreasing grid; the scan passes when
// |norm_err| decreases monotonically (ties within quadrature tolerance pass).
ItoScanResult ito_error_scan(const PhiSpec& phi, double f, double g,
                             const std::vector<double>& h_grid, const NoiseSpec& noise);

// Sampling-based cross check of expect_phi (independent of the quadrature
// route): mean and standard error over n draws.
MomentEstimate monte_carlo_expect(const PhiSpec& phi, double f, double g, double h,
                                  const NoiseSource& source, std::uint64_t stream,
                                  std::int64_t n);

} // namespace sdelab
