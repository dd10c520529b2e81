#include "sdelab/analysis.hpp"
#include "sdelab/errors.hpp"
#include "sdelab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace sdelab {

namespace {
const double kInf = std::numeric_limits<double>::infinity();

int decade_of(std::int64_t n) {
    int d = 0;
    std::int64_t p = 1;
    while (n > p) {
        p *= 10;
        ++d;
    }
    return d;
}
} // namespace

IndexWindow default_fit_window(const PathRecord& rec) {
    const std::int64_t hi = rec.terminal().n;
    const std::int64_t lo = std::max<std::int64_t>(hi / 100, 1001);
    return {lo, hi};
}

DecayEstimate loglog_slope(const PathRecord& rec, const IndexWindow& window) {
    if (rec.absorbed_at >= 0 && rec.absorbed_at <= window.hi)
        throw AnalysisError("loglog_slope: path absorbed at step " +
                            std::to_string(rec.absorbed_at) + " inside the fit window");

    std::vector<double> xs, ys;
    for (const auto& cp : rec.checkpoints) {
        if (cp.n < window.lo || cp.n > window.hi) continue;
        xs.push_back(std::log(static_cast<double>(cp.n)));
        ys.push_back(cp.log_abs_x);
    }
    if (xs.size() < 8)
        throw AnalysisError("loglog_slope: fewer than 8 checkpoints in window [" +
                            std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]");

    const auto m = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw AnalysisError("loglog_slope: degenerate window");

    DecayEstimate est;
    est.window = window;
    est.slope = sxy / sxx;
    double rss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = (ys[i] - my) - est.slope * (xs[i] - mx);
        rss += r * r;
    }
    est.stderr_ = (xs.size() > 2) ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
    est.r_squared = (syy > 0.0) ? 1.0 - rss / syy : 1.0;
    return est;
}

double comparison_ratio_g(const PathRecord& rec) {
    const auto& t = rec.terminal();
    if (!(t.acc_g2 > 0.0))
        throw AnalysisError("comparison_ratio_g: zero noise accumulator (g == 0 path)");
    return t.log_abs_x / t.acc_g2;
}

double comparison_ratio_f(const PathRecord& rec) {
    const auto& t = rec.terminal();
    if (!(t.acc_absf > 0.0))
        throw AnalysisError("comparison_ratio_f: zero drift accumulator (f == 0 path)");
    return t.log_abs_x / t.acc_absf;
}

std::vector<std::pair<std::int64_t, double>>
exact_rate_statistic(const PathRecord& rec, double mu, double constant) {
    if (!(mu > 0.0)) throw ConfigError("exact_rate_statistic: mu must be positive");
    if (!(constant > 0.0)) throw ConfigError("exact_rate_statistic: constant must be positive");
    std::vector<std::pair<std::int64_t, double>> out;
    out.reserve(rec.checkpoints.size());
    const double ln_c = std::log(constant);
    for (const auto& cp : rec.checkpoints) {
        const double v =
            std::exp(cp.log_abs_x + std::log(static_cast<double>(cp.n)) / mu - ln_c);
        out.emplace_back(cp.n, v);
    }
    return out;
}

double OscillationReport::group_max(int d_lo, int d_hi) const {
    double v = -kInf;
    for (const auto& r : rows)
        if (r.decade >= d_lo && r.decade <= d_hi) v = std::max(v, r.max_stat);
    return v;
}

double OscillationReport::group_min(int d_lo, int d_hi) const {
    double v = kInf;
    for (const auto& r : rows)
        if (r.decade >= d_lo && r.decade <= d_hi) v = std::min(v, r.min_stat);
    return v;
}

OscillationReport oscillation_records(const PathRecord& rec, double margin) {
    OscillationReport rep;
    rep.margin = margin;
    double best_max = -kInf, best_min = kInf;
    bool first = true;
    for (const auto& ext : rec.decade_extremes) {
        if (ext.max_stat == -kInf && ext.min_stat == kInf) continue; // empty decade
        DecadeRecordRow row;
        row.decade = ext.decade;
        row.max_stat = ext.max_stat;
        row.min_stat = ext.min_stat;
        if (!first) {
            row.new_max = ext.max_stat > best_max + margin;
            row.new_min = ext.min_stat < best_min - margin;
        }
        best_max = std::max(best_max, ext.max_stat);
        best_min = std::min(best_min, ext.min_stat);
        first = false;
        rep.rows.push_back(row);
    }
    return rep;
}

namespace {

// Conditional mean and second moment of ln|1 + h f(x) + sqrt(h) g(x) xi|,
// memoized on a log-spaced grid of |x| and linearly interpolated. Both values
// come from the quadrature oracle, not from the second-order expansion.
class LogMomentTable {
public:
    LogMomentTable(const ModelSpec& model, const NoiseSpec& noise, int grid_per_decade)
        : model_(model), noise_(noise),
          inv_delta_(grid_per_decade / std::log(10.0)),
          phi_log_(make_phi(PhiKind::log_abs)),
          phi_log2_(make_phi(PhiKind::log_abs_squared)) {}

    // u = |x| > 0
    void moments(double u, double& mean, double& second) {
        const double t = std::log(u) * inv_delta_;
        const auto k = static_cast<std::int64_t>(std::floor(t));
        const double w = t - static_cast<double>(k);
        const Node& a = node(k);
        const Node& b = node(k + 1);
        mean = (1.0 - w) * a.mean + w * b.mean;
        second = (1.0 - w) * a.second + w * b.second;
    }

private:
    struct Node {
        double mean, second;
    };

    const Node& node(std::int64_t k) {
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
        const double u = std::exp(static_cast<double>(k) / inv_delta_);
        const double f = eval_f(model_, u);
        const double g = eval_g(model_, u);
        Node n;
        n.mean = expect_phi(phi_log_, f, g, model_.h, noise_);
        n.second = expect_phi(phi_log2_, f, g, model_.h, noise_);
        return cache_.emplace(k, n).first->second;
    }

    ModelSpec model_;
    NoiseSpec noise_;
    double inv_delta_;
    PhiSpec phi_log_, phi_log2_;
    std::unordered_map<std::int64_t, Node> cache_;
};

} // namespace

MartingaleDiag log_martingale_diag(const ModelSpec& model, const NoiseSource& source,
                                   std::uint64_t stream, std::int64_t n_steps,
                                   const MartingaleDiagOptions& opts) {
    validate_model(model);
    if (n_steps < 1) throw ConfigError("log_martingale_diag: n_steps must be >= 1");

    LogMomentTable table(model, source.spec, opts.grid_per_decade);

    MartingaleDiag diag;
    diag.n_steps = n_steps;
    diag.per_decade_max_msqrtn.assign(decade_of(n_steps) + 1, 0.0);

    const double sqrt_h = std::sqrt(model.h);
    double sign = (model.x0 > 0.0) ? 1.0 : (model.x0 < 0.0 ? -1.0 : 0.0);
    double log_abs = (sign == 0.0) ? -kInf : std::log(std::fabs(model.x0));
    double sum_xi = 0.0;

    for (std::int64_t i = 0; i < n_steps; ++i) {
        if (sign == 0.0) break; // absorbed: all later residuals are zero
        const double u = std::exp(log_abs);
        const double xi = sample(source, stream, i);
        const double f = eval_f(model, sign * u);
        const double g = eval_g(model, sign * u);

        double mean, second;
        if (g == 0.0) {
            // no martingale part: conditional distribution is a point mass
            mean = std::log(std::fabs(1.0 + model.h * f));
            second = mean * mean;
        } else {
            table.moments(u, mean, second);
        }

        const double bracket = 1.0 + model.h * f + sqrt_h * g * xi;
        if (bracket == 0.0) {
            sign = 0.0;
            continue;
        }
        const double lam = std::log(std::fabs(bracket));
        diag.sum_d += lam - mean;
        diag.qv += std::max(0.0, second - mean * mean);
        diag.acc_g2 += g * g;

        if (bracket < 0.0) sign = -sign;
        log_abs += lam;

        sum_xi += xi;
        const double msq = std::fabs(sum_xi) / std::sqrt(static_cast<double>(i + 1));
        auto& slot = diag.per_decade_max_msqrtn[decade_of(i + 1)];
        if (msq > slot) slot = msq;
    }

    diag.m_over_qv = (diag.qv > 0.0) ? diag.sum_d / diag.qv : 0.0;
    diag.qv_over_h_acc_g2 =
        (diag.acc_g2 > 0.0) ? diag.qv / (model.h * diag.acc_g2)
                            : std::numeric_limits<double>::quiet_NaN();
    return diag;
}

std::vector<double> noise_sqrtn_records(const NoiseSource& source, std::uint64_t stream,
                                        std::int64_t n) {
    if (n < 1) throw ConfigError("noise_sqrtn_records: n must be >= 1");
    std::vector<double> out(decade_of(n) + 1, 0.0);
    double sum = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) {
        sum += sample(source, stream, i - 1);
        const double v = std::fabs(sum) / std::sqrt(static_cast<double>(i));
        auto& slot = out[decade_of(i)];
        if (v > slot) slot = v;
    }
    return out;
}

double toeplitz_average(std::span<const double> a, std::span<const double> kappa) {
    if (a.size() != kappa.size() || a.empty())
        throw ConfigError("toeplitz_average: sequences must be nonempty and equally sized");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0.0) throw ConfigError("toeplitz_average: weights must be nonnegative");
        num += a[i] * kappa[i];
        den += a[i];
    }
    if (!(den > 0.0)) throw AnalysisError("toeplitz_average: zero weight total");
    return num / den;
}

double gamma_limit_check(std::span<const double> y, double gamma) {
    if (y.size() < 2) throw ConfigError("gamma_limit_check: need at least 2 terms");
    if (!(gamma > 0.0)) throw ConfigError("gamma_limit_check: gamma must be positive");
    for (size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw AnalysisError("gamma_limit_check: sequence must be positive");
        if (i > 0 && !(y[i] > y[i - 1]))
            throw AnalysisError("gamma_limit_check: sequence must be increasing (violated at index " +
                                std::to_string(i) + ")");
    }
    const auto n = static_cast<double>(y.size());
    return y.back() / std::pow(n, 1.0 / (1.0 + gamma));
}

LnInvertCheck ln_invert_check(std::span<const double> x, double lambda) {
    if (x.size() < 4) throw ConfigError("ln_invert_check: need at least 4 terms");
    if (!(lambda > 0.0)) throw ConfigError("ln_invert_check: lambda must be positive");

    double sum = 0.0, sum_half = 0.0;
    const size_t half = x.size() / 2;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw AnalysisError("ln_invert_check: sequence must be positive");
        sum += std::pow(x[i], lambda);
        if (i + 1 == half) sum_half = sum;
    }

    LnInvertCheck out;
    out.b_hat = -std::log(x.back()) / sum;
    out.slope = std::log(x.back()) / std::log(static_cast<double>(x.size()));
    const double b_half = -std::log(x[half - 1]) / sum_half;
    out.applicable = out.b_hat > 0.0 &&
                     std::fabs(out.b_hat - b_half) <= 0.25 * std::fabs(out.b_hat);
    return out;
}

} // namespace sdelab
