#pragma once

#include <cstdint>

namespace sdelab {

// Counter-based uniform stream: every draw is a pure function of
// (seed, stream, index), so ensembles replay bit-identically no matter
// how the work is scheduled.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Uniform draw in the open interval (0, 1).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Inverse standard normal CDF, accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double u);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Standard (unscaled) Student-t with nu degrees of freedom.
double student_t_pdf(double t, double nu);
double student_t_cdf(double t, double nu);
double student_t_quantile(double u, double nu);

} // namespace sdelab
