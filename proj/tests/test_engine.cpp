#include <doctest.h>

#include "sdelab/engine.hpp"
#include "sdelab/errors.hpp"

#include <cmath>
#include <vector>

using namespace sdelab;

namespace {

const ModelSpec kDet{0.01, 0.5, 1.0, 1.0, 0.0, 2.0, 1.0};    // g == 0
const ModelSpec kStable{0.01, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0}; // case_iii
const NoiseSpec kNormal{NoiseKind::standard_normal, {}};

// plain-arithmetic reference for the same recursion
std::vector<double> direct_path(const ModelSpec& m, const NoiseSource& src,
                                std::uint64_t stream, std::int64_t n) {
    std::vector<double> xs(n + 1);
    xs[0] = m.x0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = xs[i];
        xs[i + 1] =
            x * (1.0 + m.h * eval_f(m, x) + std::sqrt(m.h) * eval_g(m, x) * sample(src, stream, i));
    }
    return xs;
}

} // namespace

TEST_CASE("single deterministic step") {
    PathState s = initial_state(kDet);
    CHECK(s.sign == 1);
    CHECK(s.log_abs_x == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    const PathState s1 = step(s, kDet, 0.0, 1.0);
    // B = 1 - 0.01*0.5 = 0.995
    CHECK(s1.log_abs_x - s.log_abs_x == doctest::Approx(std::log(0.995)).epsilon(1e-13));
    CHECK(s1.sign == 1);
    CHECK(s1.acc_absf == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s1.acc_g2 == 0.0);
    CHECK(s1.acc_xlam == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("negative bracket flips the sign") {
    const ModelSpec m{0.25, 0.5, 0.0, 1.0, 4.0, 2.0, 1.0}; // g(0.5) = 1, sqrt(h) = 0.5
    PathState s = initial_state(m);
    const PathState s1 = step(s, m, -4.0, 1.0); // B = 1 - 2 = -1
    CHECK(s1.sign == -1);
    CHECK(s1.log_abs_x == doctest::Approx(s.log_abs_x).epsilon(1e-15));
}

TEST_CASE("ten deterministic steps match direct iteration to 1e-12") {
    const auto src = make_noise(kNormal, 1); // unused draws (g == 0)
    PathState s = initial_state(kDet);
    for (int i = 0; i < 10; ++i) s = step(s, kDet, sample(src, 0, i), 1.0);
    double x = kDet.x0;
    for (int i = 0; i < 10; ++i) x = x * (1.0 + kDet.h * eval_f(kDet, x));
    CHECK(s.sign * std::exp(s.log_abs_x) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("log-space and direct-space agree over 1e3 noisy steps") {
    const auto src = make_noise(kNormal, 99);
    const auto xs = direct_path(kStable, src, 0, 1000);
    PathState s = initial_state(kStable);
    for (int i = 0; i < 1000; ++i) s = step(s, kStable, sample(src, 0, i), 1.0);
    const double x_log = s.sign * std::exp(s.log_abs_x);
    CHECK(std::fabs(x_log - xs[1000]) <= 1e-9 * std::fabs(xs[1000]));
}

TEST_CASE("simulate_path replays bit-identically") {
    const auto src = make_noise(kNormal, 7);
    const auto a = simulate_path(kStable, src, 3, 20000, 1.0, 1.0);
    const auto b = simulate_path(kStable, src, 3, 20000, 1.0, 1.0);
    REQUIRE(a.checkpoints.size() == b.checkpoints.size());
    for (size_t i = 0; i < a.checkpoints.size(); ++i) {
        CHECK(a.checkpoints[i].n == b.checkpoints[i].n);
        CHECK(a.checkpoints[i].log_abs_x == b.checkpoints[i].log_abs_x);
        CHECK(a.checkpoints[i].acc_g2 == b.checkpoints[i].acc_g2);
    }
    REQUIRE(a.decade_extremes.size() == b.decade_extremes.size());
    for (size_t i = 0; i < a.decade_extremes.size(); ++i) {
        CHECK(a.decade_extremes[i].max_stat == b.decade_extremes[i].max_stat);
        CHECK(a.decade_extremes[i].min_stat == b.decade_extremes[i].min_stat);
    }
}

TEST_CASE("checkpoint indices strictly increase and end at n_steps") {
    const auto src = make_noise(kNormal, 7);
    const auto rec = simulate_path(kStable, src, 0, 12345, 1.0, 1.0);
    for (size_t i = 1; i < rec.checkpoints.size(); ++i)
        CHECK(rec.checkpoints[i].n > rec.checkpoints[i - 1].n);
    CHECK(rec.terminal().n == 12345);
}

TEST_CASE("accumulators equal the brute-force replay sums exactly") {
    const auto src = make_noise(kNormal, 21);
    const double lambda = 2.0;
    const auto rec = simulate_path(kStable, src, 5, 5000, lambda, 2.0);
    for (const auto& cp : rec.checkpoints) {
        double g2 = 0.0, af = 0.0;
        PathState s = initial_state(kStable);
        for (std::int64_t i = 0; i < cp.n; ++i) {
            const double x = s.sign * std::exp(s.log_abs_x);
            g2 += eval_g(kStable, x) * eval_g(kStable, x);
            af += std::fabs(eval_f(kStable, x));
            s = step(s, kStable, sample(src, 5, i), lambda);
        }
        CHECK(cp.acc_g2 == g2);
        CHECK(cp.acc_absf == af);
    }
}

TEST_CASE("exact-zero bracket absorbs the path and freezes every statistic") {
    // rademacher with h = 1 and g(x0) = 1: bracket = 1 + xi, absorbed on xi = -1
    const ModelSpec m{1.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0};
    const auto rad = make_noise({NoiseKind::rademacher, {}}, 3);
    std::int64_t first_minus = -1;
    for (std::int64_t i = 0; i < 100; ++i)
        if (sample(rad, 0, i) < 0.0) {
            first_minus = i;
            break;
        }
    REQUIRE(first_minus >= 0);
    const auto rec = simulate_path(m, rad, 0, 1000, 1.0, 1.0);
    CHECK(rec.absorbed_at == first_minus + 1);
    const auto& t = rec.terminal();
    CHECK(t.sign == 0);
    CHECK(t.log_abs_x == -std::numeric_limits<double>::infinity());
    // accumulators frozen at the absorption value
    double expect_g2 = static_cast<double>(first_minus + 1); // g == 1 until absorption
    CHECK(t.acc_g2 == doctest::Approx(expect_g2).epsilon(1e-15));
}

TEST_CASE("step on an absorbed state or with non-finite input fails loudly") {
    PathState dead;
    dead.sign = 0;
    CHECK_THROWS_AS(step(dead, kStable, 0.0, 1.0), SimulationError);
    PathState s = initial_state(kStable);
    CHECK_THROWS_AS(step(s, kStable, std::nan(""), 1.0), SimulationError);
}

TEST_CASE("stable run decays and keeps a constant sign over its final decade") {
    const auto src = make_noise(kNormal, 11);
    const auto rec = simulate_path(kStable, src, 1, 100000, 1.0, 1.0);
    CHECK(rec.terminal().log_abs_x < std::log(0.5));
    int sign_last = 0;
    for (const auto& cp : rec.checkpoints) {
        if (cp.n <= 10000) continue;
        if (sign_last == 0) sign_last = cp.sign;
        CHECK(cp.sign == sign_last);
    }
    CHECK(sign_last != 0);
}

TEST_CASE("unstable growth past the log ceiling is reported, not fatal") {
    const ModelSpec up{0.01, 0.5, -1.0, 1.0, 1.0, 2.0, 1.0}; // destabilizing drift
    const auto src = make_noise(kNormal, 13);
    SimOptions opts;
    opts.log_ceiling = 5.0; // |x| ~ 150
    const auto rec = simulate_path(up, src, 0, 30000, 1.0, 1.0, opts);
    CHECK(rec.ceiling_exceeded);
    CHECK(rec.terminal().log_abs_x > 5.0);
    CHECK(std::isfinite(rec.terminal().acc_g2)); // clamped g keeps sums finite
}

TEST_CASE("ensemble: serial and parallel runs are identical") {
    const auto src = make_noise(kNormal, 1234);
    const auto a = run_ensemble(kStable, src, 8, 10000, 1.0, 1.0, {}, ExecMode::serial);
    const auto b = run_ensemble(kStable, src, 8, 10000, 1.0, 1.0, {}, ExecMode::parallel);
    REQUIRE(a.summary.rows.size() == b.summary.rows.size());
    for (size_t i = 0; i < a.summary.rows.size(); ++i) {
        CHECK(a.summary.rows[i].stream == b.summary.rows[i].stream);
        CHECK(a.summary.rows[i].log_abs_x == b.summary.rows[i].log_abs_x);
        CHECK(a.summary.rows[i].acc_g2 == b.summary.rows[i].acc_g2);
        CHECK(a.summary.rows[i].acc_xlam == b.summary.rows[i].acc_xlam);
    }
}

TEST_CASE("ensemble summary merge is associative and commutative") {
    const auto src = make_noise(kNormal, 5);
    const auto all = run_ensemble(kStable, src, 6, 2000, 1.0, 1.0, {}, ExecMode::serial);

    auto part = [&](std::uint64_t lo, std::uint64_t hi) {
        EnsembleSummary s;
        s.n_steps = all.summary.n_steps;
        for (const auto& r : all.summary.rows)
            if (r.stream >= lo && r.stream < hi) s.rows.push_back(r);
        return s;
    };
    const auto s01 = part(0, 2), s23 = part(2, 4), s45 = part(4, 6);

    const auto left = merge(merge(s01, s23), s45);
    const auto right = merge(s01, merge(s23, s45));
    const auto swapped = merge(s45, merge(s23, s01));
    REQUIRE(left.rows.size() == all.summary.rows.size());
    for (size_t i = 0; i < left.rows.size(); ++i) {
        CHECK(left.rows[i].stream == right.rows[i].stream);
        CHECK(left.rows[i].stream == swapped.rows[i].stream);
        CHECK(left.rows[i].log_abs_x == all.summary.rows[i].log_abs_x);
    }
}

TEST_CASE("singleton ensemble summary equals the path's statistics") {
    const auto src = make_noise(kNormal, 5);
    const auto run = run_ensemble(kStable, src, 1, 2000, 1.0, 1.0, {}, ExecMode::serial);
    const auto rec = simulate_path(kStable, src, 0, 2000, 1.0, 1.0);
    CHECK(run.summary.rows.size() == 1);
    CHECK(run.summary.rows[0].log_abs_x == rec.terminal().log_abs_x);
    CHECK(run.summary.median_of([](const PathTerminal& r) { return r.log_abs_x; }) ==
          rec.terminal().log_abs_x);
}

TEST_CASE("decade extremes track every step, not only checkpoints") {
    const auto src = make_noise(kNormal, 61);
    SimOptions sparse;
    sparse.checkpoints_per_decade = 2; // thinned hard on purpose
    const double mu = 2.0;
    const auto rec = simulate_path(kStable, src, 4, 20000, 1.0, mu, sparse);

    std::vector<double> dmax(6, -std::numeric_limits<double>::infinity());
    std::vector<double> dmin(6, std::numeric_limits<double>::infinity());
    PathState s = initial_state(kStable);
    int dec = 0;
    std::int64_t hi = 1;
    for (std::int64_t i = 0; i < 20000; ++i) {
        s = step(s, kStable, sample(src, 4, i), 1.0);
        if (s.n > hi) {
            hi *= 10;
            ++dec;
        }
        const double stat = s.log_abs_x + std::log(static_cast<double>(s.n)) / mu;
        dmax[dec] = std::max(dmax[dec], stat);
        dmin[dec] = std::min(dmin[dec], stat);
    }
    REQUIRE(rec.decade_extremes.size() == 6);
    for (int d = 0; d < 6; ++d) {
        CHECK(rec.decade_extremes[d].max_stat == dmax[d]);
        CHECK(rec.decade_extremes[d].min_stat == dmin[d]);
    }
}

TEST_CASE("checkpoint thinning density does not change terminal accumulators") {
    const auto src = make_noise(kNormal, 31);
    SimOptions dense, sparse;
    dense.checkpoints_per_decade = 32;
    sparse.checkpoints_per_decade = 8;
    const auto a = simulate_path(kStable, src, 2, 30000, 2.0, 2.0, dense);
    const auto b = simulate_path(kStable, src, 2, 30000, 2.0, 2.0, sparse);
    CHECK(a.terminal().acc_g2 == b.terminal().acc_g2);
    CHECK(a.terminal().acc_absf == b.terminal().acc_absf);
    CHECK(a.terminal().log_abs_x == b.terminal().log_abs_x);
}
