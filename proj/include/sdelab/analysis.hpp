#pragma once

#include "sdelab/engine.hpp"
#include "sdelab/noise.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sdelab {

struct IndexWindow {
    std::int64_t lo = 0; // inclusive
    std::int64_t hi = 0; // inclusive
};

// Last two decades of the record, never earlier than step 1000 (burn-in).
IndexWindow default_fit_window(const PathRecord& rec);

struct DecayEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
    IndexWindow window;
    double r_squared = 0.0;
};

// Least-squares slope of ln|x_n| against ln n over the checkpoints in the
// window. The limit value is -1/lambda for the classified decay exponent.
DecayEstimate loglog_slope(const PathRecord& rec, const IndexWindow& window);

// ln|x_n| / sum g^2(x_i) at the terminal checkpoint; limit h(L - 1/2).
double comparison_ratio_g(const PathRecord& rec);

// ln|x_n| / sum |f(x_i)| at the terminal checkpoint; limit -h in the
// drift-dominated regime.
double comparison_ratio_f(const PathRecord& rec);

// (n, |x_n| n^(1/mu) / constant) at every checkpoint; a converged
// drift-dominated path trends to 1.
std::vector<std::pair<std::int64_t, double>>
exact_rate_statistic(const PathRecord& rec, double mu, double constant);

struct DecadeRecordRow {
    int decade = 0;
    double max_stat = 0.0; // log scale: ln(|x_n| n^(1/mu)) extreme over the decade
    double min_stat = 0.0;
    bool new_max = false; // beat every earlier decade by more than the margin
    bool new_min = false;
};

struct OscillationReport {
    std::vector<DecadeRecordRow> rows;
    double margin = 0.0;

    double group_max(int d_lo, int d_hi) const; // extremes over a decade range
    double group_min(int d_lo, int d_hi) const;
};

// Record-breaking trend statistic for the oscillation regime. A "record"
// must clear the running extreme by `margin` in log scale, so a statistic
// converging monotonically to its limit stops setting records.
OscillationReport oscillation_records(const PathRecord& rec, double margin = 0.05);

struct MartingaleDiag {
    double sum_d = 0.0;        // sum of residuals d_{i+1} = ln|B_i| - E[ln|B_i| | x_i]
    double qv = 0.0;           // sum of conditional variances of ln|B_i|
    double m_over_qv = 0.0;    // sum_d / qv (0 when qv = 0)
    double acc_g2 = 0.0;
    double qv_over_h_acc_g2 = 0.0; // -> 1 as x -> 0
    std::vector<double> per_decade_max_msqrtn; // max over decade of |sum xi| / sqrt(n)
    std::int64_t n_steps = 0;
};

struct MartingaleDiagOptions {
    int grid_per_decade = 256; // conditional moments are quadratures memoized
                               // on a log-spaced grid of |x|
};

// Replays the path, computing the conditional mean and second moment of
// ln|1 + h f + sqrt(h) g xi| by quadrature rather than by the second-order
// expansion, so the expansion itself stays under test.
MartingaleDiag log_martingale_diag(const ModelSpec& model, const NoiseSource& source,
                                   std::uint64_t stream, std::int64_t n_steps,
                                   const MartingaleDiagOptions& opts = {});

// Per-decade max of |sum_{i<=n} xi_i| / sqrt(n) over a raw noise stream.
std::vector<double> noise_sqrtn_records(const NoiseSource& source, std::uint64_t stream,
                                        std::int64_t n);

// Weighted average sum(a_i k_i) / sum(a_i); requires nonnegative a with a
// positive total.
double toeplitz_average(std::span<const double> a, std::span<const double> kappa);

// Terminal value of y_n / n^(1/(1+gamma)) for a positive increasing sequence;
// the limit is (c(1+gamma))^(1/(1+gamma)) when y_n^gamma (y_{n+1}-y_n) -> c.
double gamma_limit_check(std::span<const double> y, double gamma);

struct LnInvertCheck {
    double b_hat = 0.0; // -ln x_n / sum x_i^lambda
    double slope = 0.0; // ln x_n / ln n
    bool applicable = false; // b_hat stabilized to a positive value
};

LnInvertCheck ln_invert_check(std::span<const double> x, double lambda);

} // namespace sdelab
