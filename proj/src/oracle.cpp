#include "sdelab/oracle.hpp"
#include "sdelab/errors.hpp"
#include "sdelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sdelab {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kNormalCut = 15.0; // N(0,1) mass beyond this is ~5e-51
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

// Two consecutive refinements must agree this well.
constexpr double kRelTol = 1e-13;
constexpr double kAbsFloor = 1e-16;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

bool is_even_integer(double a) {
    const double r = std::round(a);
    return std::fabs(a - r) < 1e-12 && std::fmod(r, 2.0) == 0.0;
}

} // namespace

std::string to_string(PhiKind kind) {
    switch (kind) {
        case PhiKind::power_alpha: return "power_alpha";
        case PhiKind::inv_power_alpha: return "inv_power_alpha";
        case PhiKind::log_abs: return "log_abs";
        case PhiKind::log_abs_squared: return "log_abs_squared";
        case PhiKind::square: return "square";
    }
    return "?";
}

PhiKind phi_kind_from_string(const std::string& name) {
    if (name == "power_alpha") return PhiKind::power_alpha;
    if (name == "inv_power_alpha") return PhiKind::inv_power_alpha;
    if (name == "log_abs") return PhiKind::log_abs;
    if (name == "log_abs_squared") return PhiKind::log_abs_squared;
    if (name == "square") return PhiKind::square;
    throw ConfigError("phi: unknown kind '" + name + "'");
}

double PhiSpec::value_at_one() const {
    switch (kind) {
        case PhiKind::power_alpha:
        case PhiKind::inv_power_alpha:
        case PhiKind::square: return 1.0;
        case PhiKind::log_abs:
        case PhiKind::log_abs_squared: return 0.0;
    }
    return 0.0;
}

double PhiSpec::d1_at_one() const {
    switch (kind) {
        case PhiKind::power_alpha: return alpha;
        case PhiKind::inv_power_alpha: return -alpha;
        case PhiKind::log_abs: return 1.0;
        case PhiKind::log_abs_squared: return 0.0;
        case PhiKind::square: return 2.0;
    }
    return 0.0;
}

double PhiSpec::d2_at_one() const {
    switch (kind) {
        case PhiKind::power_alpha: return alpha * (alpha - 1.0);
        case PhiKind::inv_power_alpha: return alpha * (alpha + 1.0);
        case PhiKind::log_abs: return -1.0;
        case PhiKind::log_abs_squared: return 2.0;
        case PhiKind::square: return 2.0;
    }
    return 0.0;
}

double PhiSpec::eval_abs(double a) const {
    switch (kind) {
        case PhiKind::power_alpha: return std::pow(a, alpha);
        case PhiKind::inv_power_alpha: return std::pow(a, -alpha);
        case PhiKind::log_abs: return std::log(a);
        case PhiKind::log_abs_squared: {
            const double l = std::log(a);
            return l * l;
        }
        case PhiKind::square: return a * a;
    }
    return 0.0;
}

PhiSpec make_phi(PhiKind kind, double alpha) {
    PhiSpec phi{kind, alpha};
    if (kind == PhiKind::power_alpha && !(alpha > 0.0))
        throw ConfigError("phi: power_alpha requires alpha > 0");
    if (kind == PhiKind::inv_power_alpha && !(alpha > 0.0 && alpha <= 0.9))
        throw ConfigError("phi: inv_power_alpha requires 0 < alpha <= 0.9 "
                          "(integrable singularity with margin)");
    if (kind != PhiKind::power_alpha && kind != PhiKind::inv_power_alpha)
        phi.alpha = 0.0;
    return phi;
}

namespace {

bool phi_is_smooth(const PhiSpec& phi) {
    if (phi.kind == PhiKind::square) return true;
    if (phi.kind == PhiKind::power_alpha && is_even_integer(phi.alpha)) return true;
    return false;
}

// Student-t in the compact angle variable: with xi = stretch*tan(theta) the
// density becomes coeff*cos^(nu-1)(theta) on (-pi/2, pi/2).
struct StudentMap {
    double nu, scale, stretch, coeff;

    explicit StudentMap(double nu_) : nu(nu_) {
        scale = std::sqrt((nu - 2.0) / nu);
        stretch = scale * std::sqrt(nu);
        const double ln_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                            0.5 * std::log(nu * M_PI);
        coeff = std::exp(ln_c) * std::sqrt(nu); // = C_nu * sqrt(nu)
    }
    double theta_density(double theta) const {
        return coeff * std::pow(std::cos(theta), nu - 1.0);
    }
    double xi(double theta) const { return stretch * std::tan(theta); }
    // xi(theta0 + d) - xi(theta0) without cancellation for small d.
    double xi_diff(double theta0, double d) const {
        return stretch * std::sin(d) / (std::cos(theta0 + d) * std::cos(theta0));
    }
};

double checked_tanh_sinh(const std::function<double(double)>& f, double len) {
    auto res = tanh_sinh_from_left(f, len, kRelTol, kAbsFloor);
    if (!res.converged)
        throw AccuracyError("expect_phi: quadrature did not converge",
                            res.previous, res.value);
    return res.value;
}

// Split the expectation at the singular abscissa xi* = -c1/c2 and integrate
// each side in the distance-from-singularity variable, so |y| = |c2|*d is
// computed without cancellation and the endpoint singularity is handled by
// the double-exponential nodes.
double split_normal_or_uniform(const PhiSpec& phi, double c2, double xi_star,
                               const NoiseSpec& noise) {
    const double ac2 = std::fabs(c2);
    const bool normal = noise.kind == NoiseKind::standard_normal;
    const double cut = normal ? kNormalCut : kSqrt3;
    auto side = [&](double len, int sgn) -> double {
        if (len <= 0.0) return 0.0;
        auto integrand = [&, sgn](double d) {
            const double dens = normal ? normal_pdf(xi_star + sgn * d) : 0.5 / kSqrt3;
            return phi.eval_abs(ac2 * d) * dens;
        };
        return checked_tanh_sinh(integrand, len);
    };
    return side(xi_star + cut, -1) + side(cut - xi_star, +1);
}

double split_student(const PhiSpec& phi, double c2, double xi_star, const StudentMap& map) {
    const double ac2 = std::fabs(c2);
    const double theta_star = std::atan(xi_star / map.stretch);
    auto side = [&](double len, int sgn) -> double {
        if (len <= 0.0) return 0.0;
        auto integrand = [&, sgn](double d) {
            const double dy = std::fabs(map.xi_diff(theta_star, sgn * d));
            return phi.eval_abs(ac2 * dy) * map.theta_density(theta_star + sgn * d);
        };
        return checked_tanh_sinh(integrand, len);
    };
    return side(theta_star + 0.5 * M_PI, -1) + side(0.5 * M_PI - theta_star, +1);
}

} // namespace

double expect_phi(const PhiSpec& phi, double f, double g, double h, const NoiseSpec& noise) {
    if (!(h > 0.0)) throw ConfigError("expect_phi: h must be positive");
    if (std::fabs(f) > 1.0 + 1e-12 || std::fabs(g) > 1.0 + 1e-12)
        throw ConfigError("expect_phi: |f| and |g| must not exceed 1");

    const NoiseSource flags = make_noise(noise, 0); // validates parameters
    if (phi.kind == PhiKind::inv_power_alpha && !flags.assumption1_ok)
        throw ConfigError("expect_phi: inv_power_alpha requires a noise with a density "
                          "and bounded third moment (got " + to_string(noise.kind) + ")");

    const double c1 = 1.0 + f * h;
    const double c2 = g * std::sqrt(h);
    if (c2 == 0.0) return phi.eval_abs(std::fabs(c1));

    if (noise.kind == NoiseKind::rademacher)
        return 0.5 * (phi.eval_abs(std::fabs(c1 + c2)) + phi.eval_abs(std::fabs(c1 - c2)));

    const double xi_star = -c1 / c2;
    const bool smooth = phi_is_smooth(phi);

    if (noise.kind == NoiseKind::student_t) {
        const StudentMap map(noise.nu());
        if (!smooth) return split_student(phi, c2, xi_star, map);
        auto integrand = [&](double d) {
            const double theta = -0.5 * M_PI + d;
            return phi.eval_abs(std::fabs(c1 + c2 * map.xi(theta))) * map.theta_density(theta);
        };
        return checked_tanh_sinh(integrand, M_PI);
    }

    const double support = (noise.kind == NoiseKind::standard_normal) ? kNormalCut : kSqrt3;
    if (!smooth && std::fabs(xi_star) < support)
        return split_normal_or_uniform(phi, c2, xi_star, noise);

    std::function<double(int)> eval;
    if (noise.kind == NoiseKind::standard_normal) {
        eval = [&](int n) {
            const GaussRule& r = gauss_hermite_probabilists(n);
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += r.weights[i] * phi.eval_abs(std::fabs(c1 + c2 * r.nodes[i]));
            return s;
        };
    } else {
        eval = [&](int n) {
            const GaussRule& r = gauss_legendre(n);
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += 0.5 * r.weights[i] *
                     phi.eval_abs(std::fabs(c1 + c2 * kSqrt3 * r.nodes[i]));
            return s;
        };
    }
    auto res = doubling_ladder(eval, {16, 32, 64, 128, 256, 512}, kRelTol, kAbsFloor);
    if (!res.converged) {
        // Kinks far outside the node span occasionally stall the ladder; the
        // split integration handles them exactly.
        if (!smooth) return split_normal_or_uniform(phi, c2, xi_star, noise);
        throw AccuracyError("expect_phi: node doubling did not converge",
                            res.previous, res.value);
    }
    return res.value;
}

double ito_expansion(const PhiSpec& phi, double f, double g, double h) {
    return phi.value_at_one() + phi.d1_at_one() * f * h + 0.5 * phi.d2_at_one() * g * g * h;
}

ItoReport ito_report(const PhiSpec& phi, double f, double g, double h, const NoiseSpec& noise) {
    ItoReport rep;
    rep.phi = phi;
    rep.f = f;
    rep.g = g;
    rep.h = h;
    rep.lhs = expect_phi(phi, f, g, h, noise);
    rep.rhs = ito_expansion(phi, f, g, h);
    rep.err = rep.lhs - rep.rhs;
    const double scale = h * std::max(std::fabs(f), g * g);
    rep.norm_err = (scale > 0.0) ? rep.err / scale : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

ItoScanResult ito_error_scan(const PhiSpec& phi, double f, double g,
                             const std::vector<double>& h_grid, const NoiseSpec& noise) {
    if (h_grid.empty()) throw ConfigError("ito.h_grid: grid must not be empty");
    for (size_t i = 0; i < h_grid.size(); ++i) {
        if (!(h_grid[i] > 0.0)) throw ConfigError("ito.h_grid: entries must be positive");
        if (i > 0 && !(h_grid[i] < h_grid[i - 1]))
            throw ConfigError("ito.h_grid: grid must be strictly decreasing");
    }
    ItoScanResult out;
    for (double h : h_grid) out.reports.push_back(ito_report(phi, f, g, h, noise));
    out.trend_checked = out.reports.size() >= 2;
    out.monotone = true;
    for (size_t i = 1; i < out.reports.size(); ++i) {
        const double prev = std::fabs(out.reports[i - 1].norm_err);
        const double cur = std::fabs(out.reports[i].norm_err);
        if (cur > prev + (1e-12 + 1e-9 * prev)) out.monotone = false;
    }
    return out;
}

MomentEstimate monte_carlo_expect(const PhiSpec& phi, double f, double g, double h,
                                  const NoiseSource& source, std::uint64_t stream,
                                  std::int64_t n) {
    const double c1 = 1.0 + f * h;
    const double c2 = g * std::sqrt(h);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = phi.eval_abs(std::fabs(c1 + c2 * sample(source, stream, i)));
        sum += v;
        sum2 += v * v;
    }
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    const double var = std::max(0.0, sum2 / nd - mean * mean);
    return {mean, std::sqrt(var / nd)};
}

} // namespace sdelab
