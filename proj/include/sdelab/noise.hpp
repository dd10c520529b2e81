#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdelab {

enum class NoiseKind { standard_normal, uniform_symmetric, rademacher, student_t };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

// A zero-mean, unit-variance driving distribution. The flags record which
// moment/density conditions the distribution satisfies, so experiments can
// refuse statistics whose hypotheses the noise violates.
//
//   assumption1_ok: density exists, E|xi|^3 bounded, x^3 p(x) -> 0
//                   (normal, uniform; student_t only for nu > 4)
//   assumption2_ok: all moments finite (normal, uniform, rademacher)
struct NoiseSpec {
    NoiseKind kind = NoiseKind::standard_normal;
    std::vector<double> params; // student_t: {nu}

    bool operator==(const NoiseSpec&) const = default;

    double nu() const; // student_t only
};

struct NoiseSource {
    NoiseSpec spec;
    std::uint64_t master_seed = 0;
    bool assumption1_ok = false;
    bool assumption2_ok = false;
};

// Validates parameters and fills the assumption flags.
NoiseSource make_noise(const NoiseSpec& spec, std::uint64_t master_seed);

// Pure function of (master_seed, stream, index); replays bit-identically.
double sample(const NoiseSource& source, std::uint64_t stream, std::int64_t index);

struct MomentEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

// Empirical m-th absolute moment over n draws of the given stream.
MomentEstimate moment_estimate(const NoiseSource& source, int m, std::int64_t n,
                               std::uint64_t stream = 0);

} // namespace sdelab
