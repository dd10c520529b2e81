#include "sdelab/noise.hpp"
#include "sdelab/errors.hpp"
#include "sdelab/rng.hpp"

#include <cmath>

namespace sdelab {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::standard_normal: return "standard_normal";
        case NoiseKind::uniform_symmetric: return "uniform_symmetric";
        case NoiseKind::rademacher: return "rademacher";
        case NoiseKind::student_t: return "student_t";
    }
    return "?";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "standard_normal") return NoiseKind::standard_normal;
    if (name == "uniform_symmetric") return NoiseKind::uniform_symmetric;
    if (name == "rademacher") return NoiseKind::rademacher;
    if (name == "student_t") return NoiseKind::student_t;
    throw ConfigError("noise.kind: unknown noise kind '" + name + "'");
}

double NoiseSpec::nu() const {
    if (kind != NoiseKind::student_t)
        throw ConfigError("noise.params: nu is only defined for student_t");
    if (params.empty())
        throw ConfigError("noise.params: student_t requires degrees of freedom");
    return params[0];
}

NoiseSource make_noise(const NoiseSpec& spec, std::uint64_t master_seed) {
    NoiseSource src;
    src.spec = spec;
    src.master_seed = master_seed;
    switch (spec.kind) {
        case NoiseKind::standard_normal:
        case NoiseKind::uniform_symmetric:
            if (!spec.params.empty())
                throw ConfigError("noise.params: " + to_string(spec.kind) + " takes no parameters");
            src.assumption1_ok = true;
            src.assumption2_ok = true;
            break;
        case NoiseKind::rademacher:
            if (!spec.params.empty())
                throw ConfigError("noise.params: rademacher takes no parameters");
            src.assumption1_ok = false; // no density
            src.assumption2_ok = true;
            break;
        case NoiseKind::student_t: {
            const double nu = spec.nu();
            if (!(nu > 2.0))
                throw ConfigError(
                    "noise.params: student_t requires nu > 2 so that the variance "
                    "can be rescaled to 1 (got nu = " + std::to_string(nu) + ")");
            src.assumption1_ok = nu > 4.0; // bounded third moment with margin
            src.assumption2_ok = false;    // moments above nu diverge
            break;
        }
    }
    return src;
}

double sample(const NoiseSource& source, std::uint64_t stream, std::int64_t index) {
    const double u = counter_uniform(source.master_seed, stream, static_cast<std::uint64_t>(index));
    switch (source.spec.kind) {
        case NoiseKind::standard_normal:
            return inverse_normal_cdf(u);
        case NoiseKind::uniform_symmetric:
            return kSqrt3 * (2.0 * u - 1.0);
        case NoiseKind::rademacher:
            return (u < 0.5) ? -1.0 : 1.0;
        case NoiseKind::student_t: {
            const double nu = source.spec.nu();
            const double scale = std::sqrt((nu - 2.0) / nu);
            return scale * student_t_quantile(u, nu);
        }
    }
    return 0.0;
}

MomentEstimate moment_estimate(const NoiseSource& source, int m, std::int64_t n,
                               std::uint64_t stream) {
    if (m < 1) throw ConfigError("moment_estimate: m must be >= 1");
    if (n < 1000) throw ConfigError("moment_estimate: n must be >= 1000");
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = std::pow(std::fabs(sample(source, stream, i)), m);
        sum += v;
        sum2 += v * v;
    }
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    const double var = std::max(0.0, sum2 / nd - mean * mean);
    return {mean, std::sqrt(var / nd)};
}

} // namespace sdelab
