#pragma once

// Integer-order modified Bessel function of the second kind and small helpers
// shared by the closed-form evaluators.

namespace irsnoma::special {

inline constexpr int kMaxBesselOrder = 64;

/// K_nu(x) together with an underflow flag. When `underflow` is set the true
/// value is below the smallest normal double and `value` is exactly 0.
struct BesselK {
    double value;
    bool underflow;
};

/// K_nu(x) for 0 <= nu <= 64 and x > 0.
/// Throws DomainError for x <= 0 or nu out of range, OverflowError when the
/// result exceeds the double range (tiny x with large nu).
BesselK bessel_k_checked(int nu, double x);

/// Value-only form of bessel_k_checked (underflow silently yields 0).
double bessel_k_int(int nu, double x);

/// ln K_nu(x). Finite for every x > 0, so composites such as
/// x^(nu/2) K_nu(2 sqrt(x)) can be formed without intermediate overflow.
double log_bessel_k_int(int nu, double x);

/// Leading small-argument expansion of K_nu(x), nu >= 1:
///   nu = 1 : 1/x + (x/2) ln(x/2)
///   nu >= 2: (1/2) [2^nu (nu-1)!/x^nu - 2^(nu-2) (nu-2)!/x^(nu-2)]
double bessel_k_small_x_approx(int nu, double x);

/// ln Gamma(q) for integer q >= 1, i.e. ln (q-1)!.
double log_gamma_int(int q);

/// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

} // namespace irsnoma::special
