#include "sdelab/quadrature.hpp"
#include "sdelab/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <algorithm>

namespace sdelab {

namespace {

// Symmetric tridiagonal QL with implicit shifts, tracking only the first row
// of the accumulated eigenvector matrix. diag/offdiag define the Jacobi matrix
// of the orthogonal polynomial family; on return d holds the nodes and z the
// first eigenvector components (weight_i = mu0 * z_i^2).
void tridiag_eigen_first_row(std::vector<double>& d, std::vector<double>& e,
                             std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    e.resize(n); // e[0..n-2] used, e[n-1] workspace
    e[n - 1] = 0.0;
    z.assign(n, 0.0);
    z[0] = 1.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw AccuracyError("gauss rule: eigenvalue iteration failed", 0.0, 0.0);
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

GaussRule build_from_jacobi(std::vector<double> diag, std::vector<double> off, double mu0) {
    const int n = static_cast<int>(diag.size());
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
    std::vector<double> z;
    tridiag_eigen_first_row(diag, e, z);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = diag[order[i]];
        rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
    }
    // Symmetric families: average node pairs so odd moments cancel cleanly.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

std::mutex g_rule_mutex;

} // namespace

const GaussRule& gauss_hermite_probabilists(int n) {
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
    for (int i = 1; i < n; ++i) off[i - 1] = std::sqrt(static_cast<double>(i));
    // mu0 = 1 after normalizing by the total mass of the weight.
    return cache.emplace(n, build_from_jacobi(std::move(diag), std::move(off), 1.0)).first->second;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
    for (int i = 1; i < n; ++i) {
        const double k = static_cast<double>(i);
        off[i - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    }
    return cache.emplace(n, build_from_jacobi(std::move(diag), std::move(off), 2.0)).first->second;
}

QuadResult tanh_sinh_from_left(const std::function<double(double)>& f, double length,
                               double rel_tol, double abs_floor, int max_level) {
    QuadResult res;
    if (length <= 0.0) {
        res.converged = true;
        return res;
    }
    const double half = 0.5 * length;
    const double t_max = 6.0;

    // Evaluates the transformed integrand at abscissa parameter t.
    // Distance from the left endpoint is computed in a cancellation-free form.
    auto term = [&](double t) -> double {
        const double u = 0.5 * M_PI * std::sinh(t);
        const double eu = std::exp(-2.0 * std::fabs(u));
        const double dist_near = length * eu / (1.0 + eu); // from the closer endpoint
        const double d = (u >= 0.0) ? length - dist_near : dist_near;
        if (d <= 0.0 || d >= length) return 0.0;
        const double sech2 = 4.0 * eu / ((1.0 + eu) * (1.0 + eu));
        const double w = half * 0.5 * M_PI * std::cosh(t) * sech2;
        if (w == 0.0) return 0.0;
        const double v = f(d);
        return std::isfinite(v) ? w * v : 0.0;
    };

    double h = 1.0;
    double sum = term(0.0);
    for (int k = 1; k * h <= t_max; ++k) sum += term(k * h) + term(-k * h);
    double integral = h * sum;

    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (int k = 1; k * h <= t_max; k += 2) add += term(k * h) + term(-k * h);
        const double next = 0.5 * integral + h * add;
        res.previous = integral;
        integral = next;
        if (level >= 3 &&
            std::fabs(integral - res.previous) <=
                std::max(rel_tol * std::fabs(integral), abs_floor)) {
            res.value = integral;
            res.converged = true;
            return res;
        }
    }
    res.value = integral;
    res.converged = false;
    return res;
}

QuadResult doubling_ladder(const std::function<double(int)>& eval,
                           const std::vector<int>& sizes, double rel_tol,
                           double abs_floor) {
    QuadResult res;
    double prev = 0.0;
    bool have_prev = false;
    for (int n : sizes) {
        const double cur = eval(n);
        if (have_prev &&
            std::fabs(cur - prev) <= std::max(rel_tol * std::fabs(cur), abs_floor)) {
            res.value = cur;
            res.previous = prev;
            res.converged = true;
            return res;
        }
        prev = cur;
        have_prev = true;
    }
    res.value = prev;
    res.converged = false;
    return res;
}

} // namespace sdelab
