#include "sdelab/model.hpp"
#include "sdelab/errors.hpp"
#include "sdelab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sdelab {

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

void validate_model(const ModelSpec& m) {
    if (!(m.h > 0.0)) throw ConfigError("model.h: step size must be positive");
    if (!std::isfinite(m.x0)) throw ConfigError("model.x0: initial value must be finite");
    if (!std::isfinite(m.a_f)) throw ConfigError("model.a_f: must be finite");
    if (!(m.mu_f > 0.0)) throw ConfigError("model.mu_f: exponent must be positive");
    if (!(m.a_g >= 0.0)) throw ConfigError("model.a_g: must be nonnegative");
    if (!(m.mu_g > 0.0)) throw ConfigError("model.mu_g: exponent must be positive");
    if (!(m.cap > 0.0 && m.cap <= 1.0)) throw ConfigError("model.cap: must lie in (0, 1]");
}

double eval_f(const ModelSpec& m, double u) {
    if (u == 0.0 || m.a_f == 0.0) return 0.0;
    const double mag = std::min(std::fabs(m.a_f) * std::pow(std::fabs(u), m.mu_f), m.cap);
    return (m.a_f > 0.0) ? -mag : mag;
}

double eval_g(const ModelSpec& m, double u) {
    if (u == 0.0 || m.a_g == 0.0) return 0.0;
    return std::min(std::sqrt(m.a_g) * std::pow(std::fabs(u), 0.5 * m.mu_g), m.cap);
}

std::string to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::case_i: return "case_i";
        case CaseTag::case_ii: return "case_ii";
        case CaseTag::case_iii: return "case_iii";
        case CaseTag::unstable: return "unstable";
        case CaseTag::out_of_theory: return "out_of_theory";
    }
    return "?";
}

namespace {

// Closed-form sup of 2f/g^2 over the clamped family: the ratio is piecewise
// monotone between the clamp thresholds, so the sup is attained at a corner
// or a one-sided limit.
double beta_sup(const ModelSpec& m) {
    if (m.a_g == 0.0) return (m.a_f > 0.0) ? -kInf : kInf;
    if (m.a_f == 0.0) return 0.0;

    const double sgn = (m.a_f > 0.0) ? -1.0 : 1.0;
    double best = sgn * 2.0 / m.cap; // common value once both clamps are active

    // Limit at u -> 0+.
    if (m.mu_f < m.mu_g) {
        best = std::max(best, sgn * kInf);
    } else if (m.mu_f == m.mu_g) {
        best = std::max(best, -2.0 * m.a_f / m.a_g);
    } else {
        best = std::max(best, 0.0);
    }

    // Clamp corners.
    auto ratio_at = [&](double u) {
        const double g = eval_g(m, u);
        return 2.0 * eval_f(m, u) / (g * g);
    };
    const double u_f = std::pow(m.cap / std::fabs(m.a_f), 1.0 / m.mu_f);
    const double u_g = std::pow(m.cap * m.cap / m.a_g, 1.0 / m.mu_g);
    best = std::max(best, ratio_at(u_f));
    best = std::max(best, ratio_at(u_g));
    return best;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

RegimeReport classify_regime(const ModelSpec& m) {
    validate_model(m);
    if (m.a_g == 0.0 && m.a_f <= 0.0)
        throw ConfigError("model: a_g = 0 with a_f <= 0 gives neither dissipative drift "
                          "nor stabilizing noise; no classification applies");

    RegimeReport rep;

    // a_f = 0 means f vanishes identically (decays faster than any power);
    // a_g = 0 likewise for g. Encode as infinite effective exponents.
    const double ef = (m.a_f == 0.0) ? kInf : m.mu_f;
    const double eg = (m.a_g == 0.0) ? kInf : m.mu_g;

    if (ef < eg) rep.L = (m.a_f > 0.0) ? -kInf : kInf;
    else if (ef == eg) rep.L = -m.a_f / m.a_g;
    else rep.L = 0.0;

    rep.beta = beta_sup(m);

    if (m.a_f < 0.0 && (ef < eg || (ef == eg && -2.0 * m.a_f > m.a_g))) {
        rep.case_tag = CaseTag::unstable;
        rep.headline = "destabilizing drift dominates the noise (liminf 2f/g^2 > 1): "
                       "P(x_n -> 0) = 0";
        return rep;
    }
    if (m.a_f < 0.0 && ef == eg && -2.0 * m.a_f == m.a_g) {
        rep.case_tag = CaseTag::out_of_theory;
        rep.headline = "boundary -2 a_f = a_g: neither the stability nor the "
                       "instability condition holds strictly";
        return rep;
    }

    if (m.a_f > 0.0 && ef < eg) {
        rep.case_tag = CaseTag::case_iii;
        rep.lambda = m.mu_f;
        rep.exact_constant = std::pow(1.0 / (m.h * m.a_f * m.mu_f), 1.0 / m.mu_f);
        rep.oscillatory = false;
        rep.headline = "drift-dominated decay: |x_n| n^(1/" + fmt(m.mu_f) + ") -> " +
                       fmt(*rep.exact_constant) + " (exact-rate limit)";
        return rep;
    }

    if (ef == eg) {
        rep.case_tag = CaseTag::case_ii;
        rep.lambda = m.mu_g;
    } else {
        rep.case_tag = CaseTag::case_i;
        rep.lambda = m.mu_g;
        if (m.a_f < 0.0)
            rep.note = "a_f < 0 with mu_f > mu_g: noise-dominated classification, but the "
                       "oscillation analysis does not obviously cover this corner";
    }
    rep.oscillatory = true;
    rep.headline = "noise-dominated decay: ln|x_n|/ln n -> -1/" + fmt(*rep.lambda) +
                   ", with |x_n| n^(1/" + fmt(m.mu_g) +
                   ") oscillating (limsup = inf, liminf = 0)";
    return rep;
}

namespace {

// integral of dt / a(e^t) over [t_lo, t_hi] by panel-doubling Gauss-Legendre.
double profile_integral(const std::function<double(double)>& a, double t_lo, double t_hi) {
    if (t_hi <= t_lo) return 0.0;
    const int n_panels = std::max(1, static_cast<int>(std::ceil((t_hi - t_lo) / 1.0)));
    auto eval = [&](int nodes_per_panel) {
        const GaussRule& r = gauss_legendre(nodes_per_panel);
        double total = 0.0;
        const double w = (t_hi - t_lo) / n_panels;
        for (int p = 0; p < n_panels; ++p) {
            const double mid = t_lo + (p + 0.5) * w;
            double s = 0.0;
            for (size_t i = 0; i < r.nodes.size(); ++i) {
                const double t = mid + 0.5 * w * r.nodes[i];
                s += r.weights[i] / a(std::exp(t));
            }
            total += 0.5 * w * s;
        }
        return total;
    };
    auto res = doubling_ladder(eval, {8, 16, 32, 64, 128}, 1e-11, 1e-15);
    if (!res.converged)
        throw AccuracyError("predict_general_rate: profile integration did not converge",
                            res.previous, res.value);
    return res.value;
}

} // namespace

double predict_general_rate(const std::function<double(double)>& a_profile, std::int64_t n) {
    if (n < 1) throw ConfigError("predict_general_rate: n must be >= 1");

    // Reject non-monotone or non-positive profiles by sampling.
    double prev = -kInf;
    for (int k = 0; k <= 48; ++k) {
        const double u = std::pow(10.0, -12.0 + 0.25 * k);
        const double v = a_profile(u);
        if (!(v > 0.0))
            throw ConfigError("predict_general_rate: profile must be positive on (0, 1]");
        if (v < prev * (1.0 - 1e-12))
            throw ConfigError("predict_general_rate: profile must be monotone increasing");
        prev = v;
    }

    const double target = static_cast<double>(n);
    // A(z) = integral_z^1 du/(u a(u)) = integral_{ln z}^0 dt/a(e^t), decreasing in z.
    auto A_of_t = [&](double t_lo) { return profile_integral(a_profile, t_lo, 0.0); };

    double t_lo = -1.0;
    double A_lo = A_of_t(t_lo);
    while (A_lo < target) {
        t_lo *= 2.0;
        if (t_lo < -1e6)
            throw ConfigError("predict_general_rate: A(z) does not reach n within range");
        A_lo = A_of_t(t_lo);
    }

    double lo = t_lo, hi = 0.0; // A(lo) >= n >= A(hi) = 0
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (A_of_t(mid) >= target) lo = mid; else hi = mid;
        if (hi - lo <= 1e-10 * std::max(1.0, std::fabs(lo))) break;
    }
    return std::exp(0.5 * (lo + hi));
}

} // namespace sdelab
