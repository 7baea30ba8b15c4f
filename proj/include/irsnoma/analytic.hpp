#pragma once

#include "irsnoma/quadrature.hpp"
#include "irsnoma/system_model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace irsnoma::analytic {

inline constexpr int kDefaultLaguerreOrder = 30;
inline constexpr int kDefaultChebyshevOrder = 20;
inline constexpr double kDefaultTol = 1e-8;

// ---- cascade distribution -------------------------------------------------

/// Survival of the unit cascade gain (Omega_sr Omega_rm = 1):
/// S(t) = (2/Gamma(Q)) t^(Q/2) K_Q(2 sqrt t).
double cascade_survival(double t, int q);

/// CDF of the unit cascade gain, 1 - S(t), without cancellation at small t.
double cascade_cdf_unit(double t, int q);

/// CDF of |sum of Q products|^2 with variance product `omega`.
double cascade_cdf(double x, double omega, int q);

/// CDF of the m-th smallest of M i.i.d. variables with CDF value `f`,
/// in the alternating single-sum form used by the closed forms.
double ordered_cdf(double f, int m, int num_users);

/// Same order statistic as sum_{j=m}^{M} C(M,j) f^j (1-f)^(M-j).
double ordered_cdf_binomial(double f, int m, int num_users);

// ---- outage ----------------------------------------------------------------

enum class OutageMethod { exact_ipsic, exact_psic, asymptotic, oma };

std::string to_string(OutageMethod m);

/// Per-user outage. `raw` keeps the unclamped value of the closed form.
struct OutageResult {
    std::vector<double> p;
    std::vector<double> raw;
    std::vector<bool> infeasible;
    OutageMethod method;
};

/// Residual-aware closed form, averaged over the residual power with a
/// Laguerre rule. Rank 1 and varpi*Omega_I = 0 fall back to outage_psic.
OutageResult outage_ipsic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                          const quad::QuadratureRule& laguerre);

OutageResult outage_psic(const NetworkConfig& cfg, const ChannelStats& stats, double rho);

/// Single-entry result for the OMA user.
OutageResult outage_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho);

enum class AsymptoticVariant { ipsic_floor, psic_q1, psic_q2, oma_q1, oma_q2 };

std::string to_string(AsymptoticVariant v);
AsymptoticVariant parse_asymptotic_variant(const std::string& s);

/// High-SNR forms. ipsic_floor ignores rho; rank 1 has no floor and reports 0.
/// Throws DomainError when the variant does not match Q.
OutageResult outage_asymptotic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                               AsymptoticVariant variant, const quad::QuadratureRule& laguerre);
OutageResult outage_asymptotic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                               AsymptoticVariant variant);

/// Least-squares slope of -log10 P against log10 rho on `points` SNRs evenly
/// spaced in dB. Zero or non-finite probabilities are dropped.
double diversity_fit(const std::function<double(double)>& outage_of_rho, double lo_db, double hi_db,
                     int points = 31);

// ---- ergodic rate ----------------------------------------------------------

enum class ErgodicMethod { ipsic_numeric, psic_closed, ceiling, upper_bound, oma };

std::string to_string(ErgodicMethod m);

struct ErgodicResult {
    double rate = 0.0;
    double raw = 0.0;
    ErgodicMethod method = ErgodicMethod::psic_closed;
    // filled only by the simulation-backed evaluator
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

/// Rank m < M with perfect SIC, Chebyshev-Gauss rule of the given order.
ErgodicResult ergodic_psic_m(const NetworkConfig& cfg, const ChannelStats& stats, double rho, int m,
                             const quad::QuadratureRule& chebyshev);

/// The same rate by adaptive integration of (1/ln2) int_0^{a_m/abar_m} (1-F_Y(y))/(1+y) dy.
double ergodic_psic_m_integral(const NetworkConfig& cfg, const ChannelStats& stats, double rho, int m,
                               double tol = 1e-10);

/// Strongest user (rank M), alternating binomial sum of semi-infinite integrals.
ErgodicResult ergodic_psic_M(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                             double tol = kDefaultTol);

/// Strongest user through the single integral (rho a_M/ln2) int (1-(1-S)^{MP}) / (1 + rho a_M x) dx.
double ergodic_psic_M_collapsed(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                double tol = kDefaultTol);

/// Jensen bound log2(1 + rho a_M E[Z]) on the strongest user's rate, where
/// Z is that user's selected gain. E[Z] is fixed by the constructor.
class MthUserRateBound {
public:
    MthUserRateBound(const NetworkConfig& cfg, const ChannelStats& stats, double tol = kDefaultTol);

    /// int_0^inf x F(x)^{MP-1} x^{(Q-1)/2} K_{Q-1}(2 sqrt(x/Omega)) dx
    double phi() const { return phi_; }
    double mean_gain() const { return mean_gain_; }
    ErgodicResult at(double rho) const;

private:
    double alloc_m_;
    double phi_;
    double mean_gain_;
};

ErgodicResult ergodic_upper_bound_M(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                    double tol = kDefaultTol);

/// log2(1 + a_m / abar_m) for m < M.
ErgodicResult ergodic_ceiling(const NetworkConfig& cfg, int m);

ErgodicResult ergodic_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                          double tol = kDefaultTol);

/// No closed form exists under ipSIC; one Monte-Carlo estimate per rank.
/// Throws DomainError for trials < 1.
std::vector<ErgodicResult> ergodic_ipsic_numeric(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                                 std::int64_t trials, std::uint64_t seed);

// ---- throughput and energy -------------------------------------------------

double throughput_delay_limited(const OutageResult& outage, const NetworkConfig& cfg);
double throughput_delay_tolerant(const std::vector<ErgodicResult>& rates);

double dbw_to_watt(double dbw);
double dbm_to_watt(double dbm);

/// Linear watts throughout.
struct EnergyModel {
    double kappa = 1.2;
    double p_s = 0.0;
    double p_bs = 0.0;
    double p_k_b = 0.0;
    std::vector<double> p_ue;

    static EnergyModel from_db(double kappa, double p_s_dbw, double p_bs_dbw, double p_k_b_dbm, double p_ue_dbm,
                               int num_users);

    /// kappa P_S + P_BS + K P_k(b) + sum P_UE
    double total_power(int elements) const;
};

double energy_efficiency(double throughput, const EnergyModel& energy, int elements);

} // namespace irsnoma::analytic
