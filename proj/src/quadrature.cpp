#include "irsnoma/quadrature.hpp"

#include "irsnoma/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace irsnoma::quad {

namespace {

// 2^16 abscissae per side at the finest level, about 2.6e5 evaluations in total
constexpr std::size_t kMaxRefinements = 15;
constexpr int kMaxNewton = 100;

std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct LaguerrePair {
    long double l_n;   // L_n(x)
    long double l_nm1; // L_{n-1}(x)
};

LaguerrePair laguerre_eval(int n, long double x)
{
    long double p0 = 1.0L;
    long double p1 = 0.0L;
    for (int j = 1; j <= n; ++j) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2 * j - 1 - x) * p1 - (j - 1) * p2) / j;
    }
    return {p0, p1};
}

double integrate_unit(const std::function<double(double)>& g, double tol, const char* who)
{
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(kMaxRefinements);
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    double value = 0.0;
    try {
        // the level-difference estimate lags the true error by a level, so ask for
        // a tighter target and judge the outcome against tol
        const double target = std::max(1e-2 * tol, 1e-15);
        value = integrator.integrate([&g](double t) { return g(t); }, 0.0, 1.0, target, &err, &l1, &levels);
    } catch (const std::exception& e) {
        throw NumericalError(std::string(who) + ": " + e.what());
    }
    if (!std::isfinite(value)) {
        throw NumericalError(std::string(who) + ": integrand produced a non-finite value");
    }
    if (err > tol * std::max(std::abs(value), 1e-300) && err > 1e-15 * l1) {
        throw NumericalError(std::string(who) + ": evaluation budget exhausted, error estimate " +
                             fmt_g(err) + " for value " + fmt_g(value));
    }
    return value;
}

} // namespace

QuadratureRule gauss_laguerre(int order)
{
    if (order < 1 || order > kMaxLaguerreOrder) {
        throw DomainError("gauss_laguerre: order must be in [1, 200], got " + std::to_string(order));
    }
    const int n = order;
    QuadratureRule rule{RuleKind::laguerre, n, std::vector<double>(n), std::vector<double>(n)};

    long double z = 0.0L;
    std::vector<long double> roots(n);
    for (int i = 0; i < n; ++i) {
        // initial guesses from the usual asymptotic root spacing
        if (i == 0) {
            z = 3.0L / (1.0L + 2.4L * n);
        } else if (i == 1) {
            z += 15.0L / (1.0L + 2.5L * n);
        } else {
            const long double ai = i - 1;
            z += ((1.0L + 2.55L * ai) / (1.9L * ai)) * (z - roots[i - 2]);
        }
        bool ok = false;
        for (int it = 0; it < kMaxNewton; ++it) {
            const auto [p, pm1] = laguerre_eval(n, z);
            const long double dp = n * (p - pm1) / z;
            const long double z1 = z;
            z = z1 - p / dp;
            if (std::abs(z - z1) <= 1e-14L * std::max(1.0L, std::abs(z))) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw NumericalError("gauss_laguerre: root " + std::to_string(i + 1) + " of order " +
                                 std::to_string(n) + " did not converge");
        }
        roots[i] = z;
    }

    for (int i = 0; i < n; ++i) {
        const long double x = roots[i];
        const long double lnp1 = laguerre_eval(n + 1, x).l_n;
        const long double w = x / ((n + 1.0L) * (n + 1.0L) * lnp1 * lnp1);
        rule.nodes[i] = static_cast<double>(x);
        rule.weights[i] = static_cast<double>(w);
    }
    return rule;
}

QuadratureRule gauss_chebyshev(int order)
{
    if (order < 1 || order > kMaxChebyshevOrder) {
        throw DomainError("gauss_chebyshev: order must be in [1, 1000], got " + std::to_string(order));
    }
    const int n = order;
    QuadratureRule rule{RuleKind::chebyshev_first_kind, n, std::vector<double>(n),
                        std::vector<double>(n, std::numbers::pi / n)};
    // evaluate the upper half and mirror so x_n = -x_{N+1-n} holds exactly
    for (int i = 1; i <= n / 2; ++i) {
        const double x = std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * n));
        rule.nodes[i - 1] = x;
        rule.nodes[n - i] = -x;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

double integrate_semi_infinite(const std::function<double(double)>& f, double tol, double scale)
{
    if (!(tol > 0.0) || !(scale > 0.0)) {
        throw DomainError("integrate_semi_infinite: tol and scale must be positive");
    }
    auto g = [&](double t) -> double {
        if (t >= 1.0) {
            return 0.0;
        }
        const double u = 1.0 - t;
        const double x = scale * t / u;
        const double fx = f(x);
        if (fx == 0.0) {
            return 0.0;
        }
        return fx * scale / (u * u);
    };
    return integrate_unit(g, tol, "integrate_semi_infinite");
}

double integrate_finite(const std::function<double(double)>& f, double a, double b, double tol)
{
    if (!(tol > 0.0) || !(b >= a)) {
        throw DomainError("integrate_finite: need tol > 0 and b >= a");
    }
    if (a == b) {
        return 0.0;
    }
    const double w = b - a;
    auto g = [&](double t) { return w * f(a + w * t); };
    return integrate_unit(g, tol, "integrate_finite");
}

} // namespace irsnoma::quad
