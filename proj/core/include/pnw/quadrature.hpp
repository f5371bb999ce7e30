#pragma once

// Small quadrature toolbox: fixed Gauss-Legendre rules, adaptive
// Gauss-Kronrod 15(7) for circle integrals, and Gauss-Hermite rules for
// Gaussian expectations. Nodes are generated once by Newton iteration on the
// orthogonal-polynomial recurrences and cached.

#include <functional>
#include <vector>

namespace pnw {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
const QuadRule& gauss_legendre(int n);

// n-point Gauss-Hermite rule (weight e^{-t^2} on the real line).
const QuadRule& gauss_hermite(int n);

// Fixed-order Gauss-Legendre integral of f over [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order = 8);

// Adaptive Gauss-Kronrod 15(7) with absolute tolerance; bisects until the
// embedded error estimate of every panel is below its share of abs_tol.
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double abs_tol = 1e-10, int max_depth = 30);

} // namespace pnw
