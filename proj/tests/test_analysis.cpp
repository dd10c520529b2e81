#include <doctest.h>

#include "sdelab/analysis.hpp"
#include "sdelab/errors.hpp"

#include <cmath>
#include <vector>

using namespace sdelab;

namespace {

const NoiseSpec kNormal{NoiseKind::standard_normal, {}};

// synthetic record following |x_n| = c * n^p exactly
PathRecord power_law_record(double c, double p, std::int64_t n_steps, double mu = 2.0) {
    PathRecord rec;
    rec.meta.n_steps = n_steps;
    rec.meta.mu = mu;
    std::int64_t n = 1;
    while (n <= n_steps) {
        Checkpoint cp;
        cp.n = n;
        cp.sign = 1;
        cp.log_abs_x = std::log(c) + p * std::log(static_cast<double>(n));
        rec.checkpoints.push_back(cp);
        n = std::max(n + 1, static_cast<std::int64_t>(std::llround(n * 1.07)));
    }
    if (rec.checkpoints.back().n != n_steps) {
        Checkpoint cp = rec.checkpoints.back();
        cp.n = n_steps;
        cp.log_abs_x = std::log(c) + p * std::log(static_cast<double>(n_steps));
        rec.checkpoints.push_back(cp);
    }
    return rec;
}

} // namespace

TEST_CASE("loglog_slope recovers exact power laws") {
    const auto r1 = power_law_record(1.0, -0.5, 1000000);
    const auto e1 = loglog_slope(r1, {10000, 1000000});
    CHECK(std::fabs(e1.slope + 0.5) < 1e-10);
    CHECK(e1.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e1.stderr_ < 1e-10);

    const auto r2 = power_law_record(100.0, -1.0, 1000000);
    const auto e2 = loglog_slope(r2, {10000, 1000000});
    CHECK(std::fabs(e2.slope + 1.0) < 1e-10);
}

TEST_CASE("loglog_slope failure modes") {
    const auto rec = power_law_record(1.0, -0.5, 1000000);
    CHECK_THROWS_AS(loglog_slope(rec, {999990, 1000000}), AnalysisError); // < 8 checkpoints

    auto dead = rec;
    dead.absorbed_at = 50000;
    try {
        loglog_slope(dead, {10000, 1000000});
        CHECK(false);
    } catch (const AnalysisError& e) {
        CHECK(std::string(e.what()).find("50000") != std::string::npos);
    }
}

TEST_CASE("comparison ratios are plain terminal arithmetic") {
    PathRecord rec;
    Checkpoint cp;
    cp.n = 1000;
    cp.sign = 1;
    cp.log_abs_x = -5.0;
    cp.acc_g2 = 1000.0;
    cp.acc_absf = 300.0;
    rec.checkpoints.push_back(cp);
    CHECK(comparison_ratio_g(rec) == doctest::Approx(-0.005).epsilon(1e-15));
    rec.checkpoints.back().log_abs_x = -3.0;
    CHECK(comparison_ratio_f(rec) == doctest::Approx(-0.01).epsilon(1e-15));

    rec.checkpoints.back().acc_g2 = 0.0;
    CHECK_THROWS_AS(comparison_ratio_g(rec), AnalysisError);
    rec.checkpoints.back().acc_absf = 0.0;
    CHECK_THROWS_AS(comparison_ratio_f(rec), AnalysisError);
}

TEST_CASE("exact_rate_statistic is exactly equivariant in the constant") {
    const auto rec = power_law_record(100.0, -1.0, 100000);
    const auto a = exact_rate_statistic(rec, 1.0, 100.0);
    const auto b = exact_rate_statistic(rec, 1.0, 200.0);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].second == doctest::Approx(2.0 * b[i].second).epsilon(1e-14));
    // |x_n| = 100/n makes the normalized statistic exactly 1
    for (const auto& [n, v] : a) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deterministic drift-dominated recursion converges to the exact-rate constant") {
    // x_{n+1} = x_n (1 - h x_n): n * x_n -> 1/h = 100
    const double h = 0.01;
    double x = 0.5;
    for (std::int64_t n = 0; n < 1000000; ++n) x *= (1.0 - h * x);
    CHECK(std::fabs(x * 1e6 / 100.0 - 1.0) < 0.01);
}

TEST_CASE("oscillation_records: constant statistic sets no records") {
    // |x_n| = n^(-1/2), mu = 2: the normalized statistic is exactly 1
    const ModelSpec m{0.01, 0.5, 0.0, 1.0, 1.0, 2.0, 1.0};
    PathRecord rec;
    rec.meta.model = m;
    rec.meta.mu = 2.0;
    for (int d = 0; d <= 6; ++d) rec.decade_extremes.push_back({d, 0.0, 0.0});
    const auto rep = oscillation_records(rec);
    REQUIRE(rep.rows.size() == 7);
    for (const auto& row : rep.rows) {
        CHECK_FALSE(row.new_max);
        CHECK_FALSE(row.new_min);
    }
    CHECK(rep.group_max(2, 4) == 0.0);
    CHECK(rep.group_min(5, 6) == 0.0);
}

TEST_CASE("oscillation_records: widening extremes set records beyond the margin") {
    PathRecord rec;
    for (int d = 0; d <= 4; ++d)
        rec.decade_extremes.push_back({d, 0.1 * d, -0.1 * d}); // widening by 0.1 per decade
    const auto rep = oscillation_records(rec, 0.05);
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].new_max);
        CHECK(rep.rows[i].new_min);
    }
    // a margin larger than the growth suppresses the flags
    const auto quiet = oscillation_records(rec, 0.5);
    for (const auto& row : quiet.rows) CHECK_FALSE(row.new_max);
}

TEST_CASE("toeplitz_average basics and harmonic correction") {
    {
        std::vector<double> a(100, 1.0), k(100, 3.25);
        CHECK(toeplitz_average(a, k) == doctest::Approx(3.25).epsilon(1e-15));
    }
    {
        const std::int64_t n = 1000000;
        std::vector<double> a(n, 1.0), k(n);
        for (std::int64_t i = 0; i < n; ++i) k[i] = 1.0 + 1.0 / static_cast<double>(i + 1);
        CHECK(std::fabs(toeplitz_average(a, k) - 1.0) < 2e-5);
    }
    {
        // a_i = i with kappa -> 3; direct-summation oracle fixes the expectation
        const std::int64_t n = 10000;
        std::vector<double> a(n), k(n);
        double num = 0.0, den = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            a[i] = static_cast<double>(i + 1);
            k[i] = 3.0 - std::pow(2.0, -static_cast<double>(i + 1));
            num += a[i] * k[i];
            den += a[i];
        }
        const double oracle = num / den;
        CHECK(std::fabs(oracle - 3.0) < 1e-6);
        CHECK(toeplitz_average(a, k) == doctest::Approx(oracle).epsilon(1e-15));
    }
    {
        std::vector<double> a = {1.0, -1.0}, k = {1.0, 1.0};
        CHECK_THROWS_AS(toeplitz_average(a, k), ConfigError);
        std::vector<double> z = {0.0, 0.0};
        CHECK_THROWS_AS(toeplitz_average(z, k), AnalysisError);
    }
    {
        // weighted average stays inside [min kappa, max kappa]
        std::vector<double> a = {0.2, 1.7, 0.0, 3.4}, k = {-2.0, 5.0, 100.0, 1.0};
        const double v = toeplitz_average(a, k);
        CHECK(v >= -2.0);
        CHECK(v <= 5.0); // the zero-weight 100 cannot pull the average out
    }
}

TEST_CASE("gamma_limit_check against recurrence oracles") {
    {
        // dy = y^-1 (c=1, gamma=1): y_n/sqrt(n) -> sqrt(2)
        std::vector<double> y(1000000);
        y[0] = 1.0;
        for (size_t i = 1; i < y.size(); ++i) y[i] = y[i - 1] + 1.0 / y[i - 1];
        CHECK(std::fabs(gamma_limit_check(y, 1.0) - std::sqrt(2.0)) < 1e-3);
    }
    {
        // dy = 2 y^-2 (c=2, gamma=2): statistic -> 6^(1/3)
        std::vector<double> y(1000000);
        y[0] = 1.0;
        for (size_t i = 1; i < y.size(); ++i) y[i] = y[i - 1] + 2.0 / (y[i - 1] * y[i - 1]);
        CHECK(std::fabs(gamma_limit_check(y, 2.0) - std::cbrt(6.0)) < 1e-3);
    }
    {
        // exact closed form is recovered exactly
        const double gamma = 1.5, c = 0.7;
        const size_t n = 50000;
        std::vector<double> y(n);
        const double k = std::pow(c * (1.0 + gamma), 1.0 / (1.0 + gamma));
        for (size_t i = 0; i < n; ++i)
            y[i] = k * std::pow(static_cast<double>(i + 1), 1.0 / (1.0 + gamma));
        CHECK(gamma_limit_check(y, gamma) == doctest::Approx(k).epsilon(1e-14));
    }
    {
        std::vector<double> bad = {1.0, 2.0, 1.5};
        CHECK_THROWS_AS(gamma_limit_check(bad, 1.0), AnalysisError);
    }
}

TEST_CASE("ln_invert_check on polynomial and exponential sequences") {
    const std::int64_t n = 1000000;
    {
        // x = 1/n, lambda = 1: direct-summation oracle for b_hat
        std::vector<double> x(n);
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            x[i] = 1.0 / static_cast<double>(i + 1);
            s += x[i];
        }
        const double oracle_b = -std::log(x[n - 1]) / s;
        const auto r = ln_invert_check(x, 1.0);
        CHECK(r.applicable);
        CHECK(r.b_hat == doctest::Approx(oracle_b).epsilon(1e-12));
        CHECK(std::fabs(r.b_hat - 1.0) < 0.05);
        CHECK(r.slope == doctest::Approx(-1.0).epsilon(1e-12));
    }
    {
        // x = n^(-1/2), lambda = 2: b_hat tends to 1/2, slope to -1/2
        std::vector<double> x(n);
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            x[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
            s += x[i] * x[i];
        }
        const double oracle_b = 0.5 * std::log(static_cast<double>(n)) / s;
        const auto r = ln_invert_check(x, 2.0);
        CHECK(r.applicable);
        CHECK(r.b_hat == doctest::Approx(oracle_b).epsilon(1e-12));
        CHECK(std::fabs(r.b_hat - 0.5) < 0.05);
        CHECK(r.slope == doctest::Approx(-0.5).epsilon(1e-12));
    }
    {
        // exponential decay: the polynomial-regime check must flag itself off
        std::vector<double> x(200);
        for (size_t i = 0; i < x.size(); ++i) x[i] = std::exp(-static_cast<double>(i + 1));
        const auto r = ln_invert_check(x, 1.0);
        CHECK_FALSE(r.applicable);
    }
}

TEST_CASE("log martingale diagnostics: degenerate g == 0 path has zero qv") {
    const ModelSpec det{0.01, 0.5, 1.0, 1.0, 0.0, 2.0, 1.0};
    const auto src = make_noise(kNormal, 17);
    const auto diag = log_martingale_diag(det, src, 0, 5000);
    CHECK(diag.qv == 0.0);
    CHECK(diag.sum_d == 0.0);
    CHECK(diag.m_over_qv == 0.0);
}

TEST_CASE("log martingale diagnostics: qv tracks h * acc_g2 on a noise-driven path") {
    const ModelSpec m{0.01, 0.5, 0.0, 1.0, 1.0, 2.0, 1.0};
    const auto src = make_noise(kNormal, 41);
    const auto diag = log_martingale_diag(m, src, 0, 100000);
    CHECK(diag.qv > 0.0);
    CHECK(std::fabs(diag.qv_over_h_acc_g2 - 1.0) < 0.05);
    // residual sum should be on the scale of sqrt(qv), far below qv itself
    CHECK(std::fabs(diag.sum_d) < 10.0 * std::sqrt(diag.qv));
}

TEST_CASE("partial-sum records of |sum xi|/sqrt(n) keep growing") {
    const auto src = make_noise(kNormal, 2718);
    const auto rec = noise_sqrtn_records(src, 0, 10000000);
    REQUIRE(rec.size() >= 8);
    // cumulative records keep appearing well past the first decades
    double cum3 = 0.0, cum7 = 0.0;
    for (size_t d = 0; d < rec.size(); ++d) {
        if (d <= 3) cum3 = std::max(cum3, rec[d]);
        cum7 = std::max(cum7, rec[d]);
    }
    CHECK(cum7 >= cum3);
    CHECK(cum7 > 1.5); // a 1e7-sample normal walk reaches well beyond 1.5 sigma
}
