#include "irsnoma/special.hpp"

#include "irsnoma/errors.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>

namespace irsnoma::special {

namespace {

constexpr double kSeriesLimit = 2.0;
// Above this K_0 leaves the normal double range; results go through logs.
constexpr double kDirectLimit = 700.0;
constexpr double kAsymptoticLimit = 1000.0;

void check_args(int nu, double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("bessel_k: argument must be positive and finite, got " + std::to_string(x));
    }
    if (nu < 0 || nu > kMaxBesselOrder) {
        throw DomainError("bessel_k: order must be in [0, 64], got " + std::to_string(nu));
    }
}

// K_0, K_1 by their ascending series (A&S 9.6.13 / 9.6.11), 0 < x <= 2.
std::pair<double, double> k01_series(double x)
{
    const double y = 0.25 * x * x;
    const double lx = std::log(0.5 * x);

    double term0 = 1.0;                           // y^k / (k!)^2
    double term1 = 1.0;                           // y^k / (k! (k+1)!)
    double psi1 = -std::numbers::egamma_v<double>; // psi(k+1)
    double i0 = 0.0, s0 = 0.0, i1 = 0.0, s1 = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double psi2 = psi1 + 1.0 / (k + 1.0); // psi(k+2)
        i0 += term0;
        s0 += psi1 * term0;
        i1 += term1;
        s1 += (psi1 + psi2) * term1;
        if (term0 < 1e-18 * i0 && k > 1) {
            break;
        }
        term0 *= y / ((k + 1.0) * (k + 1.0));
        term1 *= y / ((k + 1.0) * (k + 2.0));
        psi1 = psi2;
    }
    const double k0 = -lx * i0 + s0;
    const double k1 = 1.0 / x + lx * (0.5 * x * i1) - 0.25 * x * s1;
    return {k0, k1};
}

// Exponentially scaled e^x K_0, e^x K_1 from Steed's continued fraction
// (Temme's CF2 with mu = 0), x > 2.
std::pair<double, double> k01_scaled_cf(double x)
{
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    bool converged = false;
    for (int i = 1; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-17) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("bessel_k: continued fraction failed to converge at x = " + std::to_string(x));
    }
    h *= a1;
    const double k0s = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    const double k1s = k0s * (x + 0.5 - h) / x;
    return {k0s, k1s};
}

// Hankel expansion of e^x K_0, e^x K_1 for large x.
std::pair<double, double> k01_scaled_asymptotic(double x)
{
    const double pre = std::sqrt(std::numbers::pi / (2.0 * x));
    double s0 = 1.0, s1 = 1.0, t0 = 1.0, t1 = 1.0;
    for (int k = 1; k < 30; ++k) {
        const double odd = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        t0 *= (0.0 - odd) / (k * 8.0 * x);
        t1 *= (4.0 - odd) / (k * 8.0 * x);
        s0 += t0;
        s1 += t1;
        if (std::abs(t0) < 1e-17 && std::abs(t1) < 1e-17) {
            break;
        }
    }
    return {pre * s0, pre * s1};
}

std::pair<double, double> scaled_k01(double x)
{
    return x > kAsymptoticLimit ? k01_scaled_asymptotic(x) : k01_scaled_cf(x);
}

std::pair<double, double> log_k01(double x)
{
    if (x <= kSeriesLimit) {
        const auto [k0, k1] = k01_series(x);
        return {std::log(k0), std::log(k1)};
    }
    const auto [k0s, k1s] = scaled_k01(x);
    return {std::log(k0s) - x, std::log(k1s) - x};
}

} // namespace

double log_bessel_k_int(int nu, double x)
{
    check_args(nu, x);
    const auto [lk0, lk1] = log_k01(x);
    if (nu == 0) {
        return lk0;
    }
    // ratio form of K_{n+1} = K_{n-1} + (2n/x) K_n
    double ratio = std::exp(lk1 - lk0);
    double lk = lk1;
    for (int n = 1; n < nu; ++n) {
        ratio = 1.0 / ratio + 2.0 * n / x;
        lk += std::log(ratio);
    }
    return lk;
}

BesselK bessel_k_checked(int nu, double x)
{
    check_args(nu, x);
    if (x <= kDirectLimit) {
        double k0 = 0.0;
        double k1 = 0.0;
        if (x <= kSeriesLimit) {
            std::tie(k0, k1) = k01_series(x);
        } else {
            const auto [k0s, k1s] = k01_scaled_cf(x);
            const double e = std::exp(-x);
            k0 = k0s * e;
            k1 = k1s * e;
        }
        if (nu == 0) {
            return {k0, false};
        }
        double prev = k0;
        double cur = k1;
        for (int n = 1; n < nu; ++n) {
            const double next = prev + (2.0 * n / x) * cur;
            if (!(next < 1e300)) {
                const double lk = log_bessel_k_int(nu, x);
                if (lk > std::log(DBL_MAX)) {
                    throw OverflowError("bessel_k: K_" + std::to_string(nu) + "(" + std::to_string(x) +
                                        ") exceeds the double range");
                }
                return {std::exp(lk), false};
            }
            prev = cur;
            cur = next;
        }
        return {cur, false};
    }

    const double lk = log_bessel_k_int(nu, x);
    if (lk < std::log(DBL_MIN)) {
        return {0.0, true};
    }
    return {std::exp(lk), false};
}

double bessel_k_int(int nu, double x)
{
    return bessel_k_checked(nu, x).value;
}

double bessel_k_small_x_approx(int nu, double x)
{
    if (!(x > 0.0)) {
        throw DomainError("bessel_k_small_x_approx: argument must be positive");
    }
    if (nu < 1 || nu > kMaxBesselOrder) {
        throw DomainError("bessel_k_small_x_approx: order must be in [1, 64]");
    }
    if (nu == 1) {
        return 1.0 / x + 0.5 * x * std::log(0.5 * x);
    }
    const double lead = std::exp(nu * std::log(2.0 / x) + log_gamma_int(nu));
    const double next = std::exp((nu - 2) * std::log(2.0 / x) + log_gamma_int(nu - 1));
    return 0.5 * (lead - next);
}

double log_gamma_int(int q)
{
    if (q < 1) {
        throw DomainError("log_gamma_int: argument must be >= 1");
    }
    return std::lgamma(static_cast<double>(q));
}

double binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

} // namespace irsnoma::special
