#pragma once

#include <functional>
#include <vector>

namespace sdelab {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite rule for the standard normal weight: E[F(xi)] ~ sum w_i F(x_i),
// weights sum to 1. Rules are cached per n.
const GaussRule& gauss_hermite_probabilists(int n);

// Gauss-Legendre on [-1, 1], weights sum to 2. Cached per n.
const GaussRule& gauss_legendre(int n);

struct QuadResult {
    double value = 0.0;
    bool converged = false;
    double previous = 0.0; // estimate one refinement earlier
};

// Integrates f over [0, length] where f receives the distance from the left
// endpoint. Double-exponential (tanh-sinh) node placement: integrable endpoint
// singularities at 0 (poles |d|^-a with a<1, logarithms, fractional powers)
// converge at full accuracy. Levels double the node count; stops when two
// consecutive levels agree to rel_tol.
QuadResult tanh_sinh_from_left(const std::function<double(double)>& f, double length,
                               double rel_tol, double abs_floor, int max_level = 12);

// Node-doubling ladder over a fixed-node rule: eval(n) evaluates the full rule
// with n nodes; n runs over sizes (doubling), stops on two-level agreement.
QuadResult doubling_ladder(const std::function<double(int)>& eval,
                           const std::vector<int>& sizes, double rel_tol,
                           double abs_floor);

} // namespace sdelab
