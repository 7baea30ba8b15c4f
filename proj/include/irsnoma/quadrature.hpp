#pragma once

#include <functional>
#include <vector>

namespace irsnoma::quad {

enum class RuleKind { laguerre, chebyshev_first_kind };

/// Nodes and weights of a Gauss rule.
///
/// Laguerre rules integrate against e^(-x) on [0, inf); nodes ascending.
/// Chebyshev rules store x_n = cos((2n-1)pi/(2N)) (descending) with the
/// uniform weight pi/N per node.
struct QuadratureRule {
    RuleKind kind;
    int order;
    std::vector<double> nodes;
    std::vector<double> weights;

    /// sum_i w_i f(x_i)
    template <class F>
    double apply(F&& f) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            s += weights[i] * f(nodes[i]);
        }
        return s;
    }
};

inline constexpr int kMaxLaguerreOrder = 200;
inline constexpr int kMaxChebyshevOrder = 1000;

QuadratureRule gauss_laguerre(int order);
QuadratureRule gauss_chebyshev(int order);

/// Integral of f over [0, inf) with estimated relative error <= tol.
/// Uses x = scale * t / (1 - t) and tanh-sinh refinement on
/// (0, 1). `scale` should be of the order of the integrand's decay length.
/// Throws NumericalError when the error estimate misses tol within the
/// evaluation budget.
double integrate_semi_infinite(const std::function<double(double)>& f, double tol, double scale = 1.0);

/// Adaptive integral of f over [a, b].
double integrate_finite(const std::function<double(double)>& f, double a, double b, double tol);

} // namespace irsnoma::quad
