#include "sdelab/engine.hpp"
#include "sdelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdelab {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::int64_t> checkpoint_schedule(std::int64_t n_steps, int per_decade) {
    std::vector<std::int64_t> ns;
    std::int64_t prev = 0;
    for (int k = 0;; ++k) {
        const double v = std::pow(10.0, static_cast<double>(k) / per_decade);
        if (v > static_cast<double>(n_steps) + 0.5) break;
        const auto n = static_cast<std::int64_t>(std::llround(v));
        if (n > prev && n <= n_steps) {
            ns.push_back(n);
            prev = n;
        }
    }
    if (ns.empty() || ns.back() != n_steps) ns.push_back(n_steps);
    return ns;
}

inline int decade_of(std::int64_t n) {
    // smallest d with n <= 10^d, i.e. decade d covers (10^(d-1), 10^d]
    int d = 0;
    std::int64_t p = 1;
    while (n > p) {
        p *= 10;
        ++d;
    }
    return d;
}

} // namespace

PathState initial_state(const ModelSpec& model) {
    PathState s;
    s.n = 0;
    if (model.x0 == 0.0) {
        s.sign = 0;
        s.log_abs_x = kNegInf;
    } else {
        s.sign = (model.x0 > 0.0) ? 1 : -1;
        s.log_abs_x = std::log(std::fabs(model.x0));
    }
    return s;
}

PathState step(const PathState& state, const ModelSpec& model, double xi, double lambda) {
    if (state.sign == 0)
        throw SimulationError("step: path already absorbed at zero");

    const double u = state.sign * std::exp(state.log_abs_x);
    const double f = eval_f(model, u);
    const double g = eval_g(model, u);
    const double bracket = 1.0 + model.h * f + std::sqrt(model.h) * g * xi;

    PathState next = state;
    next.n = state.n + 1;
    next.acc_g2 = state.acc_g2 + g * g;
    next.acc_absf = state.acc_absf + std::fabs(f);
    next.acc_xlam = state.acc_xlam + std::exp(lambda * state.log_abs_x);

    if (bracket == 0.0) {
        next.sign = 0;
        next.log_abs_x = kNegInf;
        return next;
    }
    next.sign = (bracket > 0.0) ? state.sign : -state.sign;
    next.log_abs_x = state.log_abs_x + std::log(std::fabs(bracket));
    if (std::isnan(next.log_abs_x))
        throw SimulationError("step: non-finite state at step " + std::to_string(next.n));
    return next;
}

PathRecord simulate_path(const ModelSpec& model, const NoiseSource& source,
                         std::uint64_t stream, std::int64_t n_steps, double lambda,
                         double mu, const SimOptions& opts) {
    validate_model(model);
    if (n_steps < 1) throw ConfigError("simulate_path: n_steps must be >= 1");
    if (!(mu > 0.0)) throw ConfigError("simulate_path: mu must be positive");

    PathRecord rec;
    rec.meta = {model, source.master_seed, stream, n_steps, lambda, mu};

    const auto schedule = checkpoint_schedule(n_steps, opts.checkpoints_per_decade);
    rec.checkpoints.reserve(schedule.size());

    const int n_decades = decade_of(n_steps);
    rec.decade_extremes.resize(n_decades + 1);
    for (int d = 0; d <= n_decades; ++d)
        rec.decade_extremes[d] = {d, kNegInf, std::numeric_limits<double>::infinity()};

    const double inv_mu = 1.0 / mu;
    PathState s = initial_state(model);
    std::size_t next_cp = 0;
    int cur_decade = 0;
    std::int64_t decade_hi = 1;

    for (std::int64_t i = 0; i < n_steps; ++i) {
        if (s.sign != 0) {
            const double xi = sample(source, stream, i);
            try {
                s = step(s, model, xi, lambda);
            } catch (const SimulationError& e) {
                throw SimulationError("path stream " + std::to_string(stream) + ": " + e.what());
            }
            if (s.sign == 0 && rec.absorbed_at < 0) rec.absorbed_at = s.n;
        } else {
            s.n += 1; // absorbed: state frozen, accumulators constant
        }

        const std::int64_t n = s.n;
        if (n > decade_hi) {
            decade_hi *= 10;
            ++cur_decade;
        }
        const double stat = s.log_abs_x + inv_mu * std::log(static_cast<double>(n));
        auto& ext = rec.decade_extremes[cur_decade];
        if (stat > ext.max_stat) ext.max_stat = stat;
        if (stat < ext.min_stat) ext.min_stat = stat;
        if (s.log_abs_x > opts.log_ceiling) rec.ceiling_exceeded = true;

        if (next_cp < schedule.size() && n == schedule[next_cp]) {
            rec.checkpoints.push_back(
                {n, s.sign, s.log_abs_x, s.acc_g2, s.acc_absf, s.acc_xlam});
            ++next_cp;
        }
    }
    return rec;
}

double EnsembleSummary::fraction_abs_below(double threshold) const {
    if (rows.empty()) return 0.0;
    const double ln_thr = std::log(threshold);
    std::int64_t count = 0;
    for (const auto& r : rows)
        if (r.sign == 0 || r.log_abs_x < ln_thr) ++count;
    return static_cast<double>(count) / static_cast<double>(rows.size());
}

double EnsembleSummary::median_of(const std::function<double(const PathTerminal&)>& proj) const {
    return quantile_of(0.5, proj);
}

double EnsembleSummary::quantile_of(double q,
                                    const std::function<double(const PathTerminal&)>& proj) const {
    if (rows.empty()) throw AnalysisError("ensemble summary: no rows");
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(proj(r));
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b) {
    if (!a.rows.empty() && !b.rows.empty() && a.n_steps != b.n_steps)
        throw AnalysisError("ensemble merge: mismatched n_steps");
    EnsembleSummary out;
    out.n_steps = a.rows.empty() ? b.n_steps : a.n_steps;
    out.rows = a.rows;
    out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
    std::sort(out.rows.begin(), out.rows.end(),
              [](const PathTerminal& x, const PathTerminal& y) { return x.stream < y.stream; });
    return out;
}

namespace {

PathTerminal terminal_of(const PathRecord& rec) {
    const Checkpoint& t = rec.terminal();
    return {rec.meta.stream, t.n,     t.sign,     t.log_abs_x,
            t.acc_g2,        t.acc_absf, t.acc_xlam, rec.absorbed_at};
}

} // namespace

EnsembleRun run_ensemble(const ModelSpec& model, const NoiseSource& source,
                         std::int64_t n_paths, std::int64_t n_steps, double lambda,
                         double mu, const SimOptions& opts, ExecMode mode) {
    if (n_paths < 1) throw ConfigError("run_ensemble: n_paths must be >= 1");

    EnsembleRun run;
    run.records.resize(n_paths);

    std::string failure;
    bool failed = false;

    if (mode == ExecMode::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::int64_t p = 0; p < n_paths; ++p) {
            try {
                run.records[p] = simulate_path(model, source, p, n_steps, lambda, mu, opts);
            } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
                {
                    failed = true;
                    if (failure.empty()) failure = e.what();
                }
            }
        }
    } else {
        for (std::int64_t p = 0; p < n_paths; ++p)
            run.records[p] = simulate_path(model, source, p, n_steps, lambda, mu, opts);
    }
    if (failed) throw SimulationError(failure);

    run.summary.n_steps = n_steps;
    run.summary.rows.reserve(n_paths);
    for (const auto& rec : run.records) run.summary.rows.push_back(terminal_of(rec));
    return run;
}

} // namespace sdelab
