#pragma once

#include <functional>
#include <optional>
#include <string>

namespace sdelab {

// Clamped power-law nonlinearities for the recursion
//   x_{n+1} = x_n (1 + h f(x_n) + sqrt(h) g(x_n) xi_{n+1}),
// with f(u) = -a_f |u|^mu_f and g(u) = sqrt(a_g) |u|^(mu_g/2), both clamped
// to magnitude cap <= 1. a_f > 0 means dissipative drift.
struct ModelSpec {
    double h = 0.01;
    double x0 = 0.5;
    double a_f = 1.0;
    double mu_f = 1.0;
    double a_g = 1.0;
    double mu_g = 2.0;
    double cap = 1.0;

    bool operator==(const ModelSpec&) const = default;
};

// Throws ConfigError naming the offending field.
void validate_model(const ModelSpec& m);

double eval_f(const ModelSpec& m, double u);
double eval_g(const ModelSpec& m, double u);

enum class CaseTag { case_i, case_ii, case_iii, unstable, out_of_theory };

std::string to_string(CaseTag tag);

// Classifier output. lambda is the decay exponent (ln|x_n|/ln n -> -1/lambda)
// when the regime admits one; exact_constant is the limit of |x_n| n^(1/mu_f)
// in the drift-dominated case.
struct RegimeReport {
    double beta = 0.0; // sup over u != 0 of 2 f / g^2, +-inf representable
    double L = 0.0;    // limit of f/g^2 at 0, +-inf representable
    CaseTag case_tag = CaseTag::out_of_theory;
    std::optional<double> lambda;
    std::optional<double> exact_constant;
    bool oscillatory = false;
    std::string headline; // one-line statement of the predicted asymptotics
    std::string note;     // caveats (e.g. untheorized corner of parameter space)
};

RegimeReport classify_regime(const ModelSpec& m);

// For |f(u)| ~ a(u)*u near 0 with monotone a, the decay envelope solves
// A(z) = n with A(z) = integral_z^1 du/(u a(u)). Returns A^{-1}(n) to about
// 1e-8 relative accuracy via adaptive panels + bisection.
double predict_general_rate(const std::function<double(double)>& a_profile, std::int64_t n);

} // namespace sdelab
