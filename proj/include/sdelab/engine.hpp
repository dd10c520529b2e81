#pragma once

#include "sdelab/model.hpp"
#include "sdelab/noise.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace sdelab {

// One simulated path of x_{n+1} = x_n (1 + h f(x_n) + sqrt(h) g(x_n) xi_{n+1}),
// kept as (sign, ln|x|) so decades-long decays neither underflow nor overflow.

struct PathState {
    std::int64_t n = 0;
    int sign = 1;              // 0 iff absorbed at zero
    double log_abs_x = 0.0;    // -inf when absorbed
    double acc_g2 = 0.0;       // sum of g(x_i)^2 over i < n
    double acc_absf = 0.0;     // sum of |f(x_i)| over i < n
    double acc_xlam = 0.0;     // sum of |x_i|^lambda over i < n
};

struct Checkpoint {
    std::int64_t n = 0;
    int sign = 0;
    double log_abs_x = 0.0;
    double acc_g2 = 0.0;
    double acc_absf = 0.0;
    double acc_xlam = 0.0;
};

// Per-decade extremes of the normalized statistic ln|x_n| + (1/mu) ln n,
// tracked every step. Decade d covers n in (10^(d-1), 10^d].
struct DecadeExtreme {
    int decade = 0;
    double max_stat = 0.0;
    double min_stat = 0.0;
};

struct PathMeta {
    ModelSpec model;
    std::uint64_t master_seed = 0;
    std::uint64_t stream = 0;
    std::int64_t n_steps = 0;
    double lambda = 1.0;
    double mu = 1.0;
};

struct PathRecord {
    PathMeta meta;
    std::vector<Checkpoint> checkpoints; // geometric thinning, terminal included
    std::vector<DecadeExtreme> decade_extremes;
    std::int64_t absorbed_at = -1; // step at which the bracket hit exactly zero
    bool ceiling_exceeded = false; // log|x| passed the configured ceiling

    const Checkpoint& terminal() const { return checkpoints.back(); }
};

struct SimOptions {
    int checkpoints_per_decade = 32;
    double log_ceiling = 230.0; // |x| ~ 1e100; reported, not fatal
};

PathState initial_state(const ModelSpec& model);

// One recursion step with driving value xi; accumulators are fed the
// pre-step x. Throws SimulationError if the state turns non-finite.
PathState step(const PathState& state, const ModelSpec& model, double xi, double lambda);

PathRecord simulate_path(const ModelSpec& model, const NoiseSource& source,
                         std::uint64_t stream, std::int64_t n_steps, double lambda,
                         double mu, const SimOptions& opts = {});

struct PathTerminal {
    std::uint64_t stream = 0;
    std::int64_t n = 0;
    int sign = 0;
    double log_abs_x = 0.0;
    double acc_g2 = 0.0;
    double acc_absf = 0.0;
    double acc_xlam = 0.0;
    std::int64_t absorbed_at = -1;
};

// Terminal statistics of an ensemble, kept sorted by stream so merging is
// associative and commutative over path partitions.
struct EnsembleSummary {
    std::int64_t n_steps = 0;
    std::vector<PathTerminal> rows;

    double fraction_abs_below(double threshold) const;
    double median_of(const std::function<double(const PathTerminal&)>& proj) const;
    double quantile_of(double q, const std::function<double(const PathTerminal&)>& proj) const;
};

EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b);

enum class ExecMode { serial, parallel };

struct EnsembleRun {
    std::vector<PathRecord> records; // stream order 0..n_paths-1
    EnsembleSummary summary;
};

// Paths use streams 0..n_paths-1; results are identical for both execution
// modes and any thread count.
EnsembleRun run_ensemble(const ModelSpec& model, const NoiseSource& source,
                         std::int64_t n_paths, std::int64_t n_steps, double lambda,
                         double mu, const SimOptions& opts = {},
                         ExecMode mode = ExecMode::parallel);

} // namespace sdelab
