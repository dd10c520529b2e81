#include "sdelab/rng.hpp"
#include "sdelab/errors.hpp"

#include <cmath>
#include <limits>

namespace sdelab {

namespace {

// 64-bit finalizer (murmur3 variant); full avalanche per round.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

} // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ ((stream + 1) * 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ ((index + 1) * 0x94d049bb133111ebULL));
    return h;
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t h = counter_hash(seed, stream, index);
    // 53 significant bits, centered so 0 and 1 are never returned.
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Wichura's PPND16 (algorithm AS 241), |relative error| < 1e-15.
double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw ConfigError("inverse_normal_cdf: u must lie strictly inside (0,1)");

    const double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
    }

    double r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        z = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        z = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -z : z;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double t, double nu) {
    const double ln_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                        0.5 * std::log(nu * M_PI);
    return std::exp(ln_c - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_t_cdf(double t, double nu) {
    const double x = nu / (nu + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
    return (t >= 0.0) ? 1.0 - tail : tail;
}

double student_t_quantile(double u, double nu) {
    if (!(u > 0.0 && u < 1.0))
        throw ConfigError("student_t_quantile: u must lie strictly inside (0,1)");
    if (u == 0.5) return 0.0;

    // Bracket, then safeguarded Newton on the CDF.
    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, nu) > u) lo *= 2.0;
    while (student_t_cdf(hi, nu) < u) hi *= 2.0;
    double t = inverse_normal_cdf(u); // decent start for any nu > 2
    if (t < lo || t > hi) t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double f = student_t_cdf(t, nu) - u;
        if (f > 0.0) hi = t; else lo = t;
        const double dens = student_t_pdf(t, nu);
        double step = (dens > 0.0) ? f / dens : 0.0;
        double tn = t - step;
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (std::fabs(tn - t) <= 1e-15 * (1.0 + std::fabs(tn))) { t = tn; break; }
        t = tn;
    }
    return t;
}

} // namespace sdelab
