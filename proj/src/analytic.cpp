#include "irsnoma/analytic.hpp"

#include "irsnoma/errors.hpp"
#include "irsnoma/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace irsnoma::analytic {

namespace {

constexpr double kSeriesSwitch = 0.1;
const double kLn2 = std::numbers::ln2;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ln S(t) for t > 0
double log_survival(double t, int q)
{
    return std::numbers::ln2 - special::log_gamma_int(q) + 0.5 * q * std::log(t) +
           special::log_bessel_k_int(q, 2.0 * std::sqrt(t));
}

// 1 - S(t) from the ascending series of t^(n/2) K_n(2 sqrt t)
double cdf_series(double t, int n)
{
    const double lf = special::log_gamma_int(n); // ln (n-1)!
    double head = 0.0;
    for (int k = 1; k <= n - 1; ++k) {
        const double c = std::exp(special::log_gamma_int(n - k) - std::lgamma(k + 1.0) - lf);
        head += c * std::pow(-t, k);
    }
    // sum_k t^(n+k)/(k!(n+k)!) and the digamma-weighted companion
    double psi_a = -std::numbers::egamma_v<double>; // psi(k+1)
    double psi_b = -std::numbers::egamma_v<double>; // psi(n+k+1)
    for (int j = 1; j <= n; ++j) {
        psi_b += 1.0 / j;
    }
    double term = std::exp(n * std::log(t) - std::lgamma(n + 1.0));
    double s_log = 0.0;
    double s_psi = 0.0;
    for (int k = 0; k < 200; ++k) {
        s_log += term;
        s_psi += (psi_a + psi_b) * term;
        if (term < 1e-18 * std::abs(s_log)) {
            break;
        }
        term *= t / ((k + 1.0) * (n + k + 1.0));
        psi_a += 1.0 / (k + 1.0);
        psi_b += 1.0 / (n + k + 1.0);
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0; // (-1)^n
    const double inv = std::exp(-lf);
    return -head + sign * inv * std::log(t) * s_log - sign * inv * s_psi;
}

void require_rank(const NetworkConfig& cfg, int m, const char* who)
{
    if (m < 1 || m > cfg.num_users) {
        throw DomainError(std::string(who) + ": rank must be in [1, M], got " + std::to_string(m));
    }
}

// F_(m)(t)^P on the unit-normalized argument t
double ordered_pow(double t, int q, int m, int num_users, int p)
{
    return std::pow(ordered_cdf(cascade_cdf_unit(t, q), m, num_users), p);
}

OutageResult make_outage(int n, OutageMethod method)
{
    return OutageResult{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<bool>(n, false), method};
}

// (rho a / ln2) sum_r C(R, r) (-1)^(r+1) int S(x/omega)^r / (1 + rho a x) dx
double strongest_rate(double rho, double a, double omega, int q, int big_r, double tol)
{
    if (rho == 0.0) {
        return 0.0;
    }
    const double c = rho * a;
    double total = 0.0;
    for (int r = 1; r <= big_r; ++r) {
        auto f = [&](double x) -> double {
            if (x <= 0.0) {
                return 1.0;
            }
            const double ls = r * log_survival(x / omega, q);
            return std::exp(ls) / (1.0 + c * x);
        };
        double integral = 0.0;
        try {
            integral = quad::integrate_semi_infinite(f, tol, omega);
        } catch (const NumericalError& e) {
            throw NumericalError("strongest-user rate, binomial term r=" + std::to_string(r) + ": " + e.what());
        }
        const double sign = (r % 2 == 1) ? 1.0 : -1.0;
        total += sign * special::binomial(big_r, r) * integral;
    }
    return c * total / kLn2;
}

} // namespace

double cascade_survival(double t, int q)
{
    if (q < 1 || q > special::kMaxBesselOrder) {
        throw DomainError("cascade_survival: Q must be in [1, 64]");
    }
    if (!(t >= 0.0)) {
        throw DomainError("cascade_survival: argument must be non-negative");
    }
    if (t == 0.0) {
        return 1.0;
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    return std::min(1.0, std::exp(log_survival(t, q)));
}

double cascade_cdf_unit(double t, int q)
{
    if (q < 1 || q > special::kMaxBesselOrder) {
        throw DomainError("cascade_cdf: Q must be in [1, 64]");
    }
    if (!(t >= 0.0)) {
        throw DomainError("cascade_cdf: argument must be non-negative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    if (t < kSeriesSwitch) {
        return clamp01(cdf_series(t, q));
    }
    return clamp01(1.0 - cascade_survival(t, q));
}

double cascade_cdf(double x, double omega, int q)
{
    if (!(omega > 0.0)) {
        throw DomainError("cascade_cdf: omega must be positive");
    }
    return cascade_cdf_unit(x / omega, q);
}

double ordered_cdf(double f, int m, int num_users)
{
    if (m < 1 || m > num_users) {
        throw DomainError("ordered_cdf: need 1 <= m <= M");
    }
    const int big_m = num_users;
    const double phi =
        std::exp(std::lgamma(big_m + 1.0) - std::lgamma(big_m - m + 1.0) - std::lgamma(static_cast<double>(m)));
    double s = 0.0;
    for (int l = 0; l <= big_m - m; ++l) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        s += special::binomial(big_m - m, l) * sign / (m + l) * std::pow(f, m + l);
    }
    return phi * s;
}

double ordered_cdf_binomial(double f, int m, int num_users)
{
    if (m < 1 || m > num_users) {
        throw DomainError("ordered_cdf_binomial: need 1 <= m <= M");
    }
    double s = 0.0;
    for (int j = m; j <= num_users; ++j) {
        s += special::binomial(num_users, j) * std::pow(f, j) * std::pow(1.0 - f, num_users - j);
    }
    return s;
}

std::string to_string(OutageMethod m)
{
    switch (m) {
    case OutageMethod::exact_ipsic:
        return "exact-ipsic";
    case OutageMethod::exact_psic:
        return "exact-psic";
    case OutageMethod::asymptotic:
        return "asymptotic";
    case OutageMethod::oma:
        return "oma";
    }
    return "?";
}

OutageResult outage_psic(const NetworkConfig& cfg, const ChannelStats& stats, double rho)
{
    if (!(rho > 0.0)) {
        throw DomainError("outage_psic: rho must be positive");
    }
    const int big_m = cfg.num_users;
    auto res = make_outage(big_m, OutageMethod::exact_psic);
    for (int m = 1; m <= big_m; ++m) {
        const double w = worst_threshold(cfg, m);
        if (std::isinf(w)) {
            res.p[m - 1] = res.raw[m - 1] = 1.0;
            res.infeasible[m - 1] = true;
            continue;
        }
        const double v = ordered_pow(w / (rho * stats.cascade(m)), cfg.group_size, m, big_m, cfg.partition);
        res.raw[m - 1] = v;
        res.p[m - 1] = clamp01(v);
    }
    return res;
}

OutageResult outage_ipsic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                          const quad::QuadratureRule& laguerre)
{
    if (laguerre.kind != quad::RuleKind::laguerre) {
        throw DomainError("outage_ipsic: needs a Laguerre rule");
    }
    auto res = outage_psic(cfg, stats, rho);
    res.method = OutageMethod::exact_ipsic;
    const double load = cfg.varpi() * cfg.residual_interference;
    if (load == 0.0) {
        return res;
    }
    const int big_m = cfg.num_users;
    for (int m = 2; m <= big_m; ++m) {
        if (res.infeasible[m - 1]) {
            continue;
        }
        const double s = worst_threshold(cfg, m) / (rho * stats.cascade(m));
        const double avg = laguerre.apply([&](double r) {
            const double lambda = rho * load * r + 1.0;
            return ordered_cdf(cascade_cdf_unit(s * lambda, cfg.group_size), m, big_m);
        });
        const double v = std::pow(avg, cfg.partition);
        res.raw[m - 1] = v;
        res.p[m - 1] = clamp01(v);
    }
    return res;
}

OutageResult outage_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho)
{
    if (!(rho > 0.0)) {
        throw DomainError("outage_oma: rho must be positive");
    }
    auto res = make_outage(1, OutageMethod::oma);
    const double g = threshold(cfg.oma_rate);
    const double v = std::pow(cascade_cdf_unit(g / (rho * stats.cascade_oma()), cfg.group_size), cfg.partition);
    res.raw[0] = v;
    res.p[0] = clamp01(v);
    return res;
}

std::string to_string(AsymptoticVariant v)
{
    switch (v) {
    case AsymptoticVariant::ipsic_floor:
        return "ipsic-floor";
    case AsymptoticVariant::psic_q1:
        return "psic-q1";
    case AsymptoticVariant::psic_q2:
        return "psic-q2";
    case AsymptoticVariant::oma_q1:
        return "oma-q1";
    case AsymptoticVariant::oma_q2:
        return "oma-q2";
    }
    return "?";
}

AsymptoticVariant parse_asymptotic_variant(const std::string& s)
{
    for (auto v : {AsymptoticVariant::ipsic_floor, AsymptoticVariant::psic_q1, AsymptoticVariant::psic_q2,
                   AsymptoticVariant::oma_q1, AsymptoticVariant::oma_q2}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    throw DomainError("unknown asymptotic variant '" + s + "'");
}

OutageResult outage_asymptotic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                               AsymptoticVariant variant, const quad::QuadratureRule& laguerre)
{
    const int q = cfg.group_size;
    const bool needs_q1 = variant == AsymptoticVariant::psic_q1 || variant == AsymptoticVariant::oma_q1;
    const bool needs_q2 = variant == AsymptoticVariant::psic_q2 || variant == AsymptoticVariant::oma_q2;
    if ((needs_q1 && q != 1) || (needs_q2 && q < 2)) {
        throw DomainError("outage_asymptotic: variant " + to_string(variant) + " does not apply to Q=" +
                          std::to_string(q));
    }
    if (variant != AsymptoticVariant::ipsic_floor && !(rho > 0.0)) {
        throw DomainError("outage_asymptotic: rho must be positive");
    }
    const int big_m = cfg.num_users;

    if (variant == AsymptoticVariant::oma_q1 || variant == AsymptoticVariant::oma_q2) {
        auto res = make_outage(1, OutageMethod::asymptotic);
        const double t = threshold(cfg.oma_rate) / (rho * stats.cascade_oma());
        double v = 0.0;
        if (t > 0.0) {
            v = variant == AsymptoticVariant::oma_q1 ? std::pow(-2.0 * t * std::log(std::sqrt(t)), cfg.elements)
                                                     : std::pow(t / (q - 1.0), cfg.partition);
        }
        res.raw[0] = v;
        res.p[0] = clamp01(v);
        return res;
    }

    auto res = make_outage(big_m, OutageMethod::asymptotic);
    for (int m = 1; m <= big_m; ++m) {
        const double w = worst_threshold(cfg, m);
        if (std::isinf(w)) {
            res.p[m - 1] = res.raw[m - 1] = 1.0;
            res.infeasible[m - 1] = true;
            continue;
        }
        const double omega = stats.cascade(m);
        double v = 0.0;
        switch (variant) {
        case AsymptoticVariant::ipsic_floor: {
            if (laguerre.kind != quad::RuleKind::laguerre) {
                throw DomainError("outage_asymptotic: ipsic-floor needs a Laguerre rule");
            }
            const double load = cfg.varpi() * cfg.residual_interference;
            if (m == 1 || load == 0.0) {
                v = 0.0;
                break;
            }
            const double comb = special::binomial(big_m, m);
            const double avg = laguerre.apply(
                [&](double r) { return std::pow(cascade_cdf_unit(w * load * r / omega, q), m); });
            v = std::pow(comb * avg, cfg.partition);
            break;
        }
        case AsymptoticVariant::psic_q1: {
            const double t = w / (rho * omega);
            v = t > 0.0 ? std::pow(special::binomial(big_m, m) * std::pow(-2.0 * t * std::log(std::sqrt(t)), m),
                                   cfg.elements)
                        : 0.0;
            break;
        }
        case AsymptoticVariant::psic_q2: {
            const double t = w / (rho * omega);
            v = std::pow(special::binomial(big_m, m) * std::pow(t / (q - 1.0), m), cfg.partition);
            break;
        }
        default:
            break;
        }
        res.raw[m - 1] = v;
        res.p[m - 1] = clamp01(v);
    }
    return res;
}

OutageResult outage_asymptotic(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                               AsymptoticVariant variant)
{
    static const auto rule = quad::gauss_laguerre(kDefaultLaguerreOrder);
    return outage_asymptotic(cfg, stats, rho, variant, rule);
}

double diversity_fit(const std::function<double(double)>& outage_of_rho, double lo_db, double hi_db, int points)
{
    if (points < 3 || !(hi_db > lo_db)) {
        throw DomainError("diversity_fit: need at least 3 points on a non-empty window");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (int i = 0; i < points; ++i) {
        const double db = lo_db + (hi_db - lo_db) * i / (points - 1);
        const double p = outage_of_rho(db_to_linear(db));
        if (!(p > 0.0) || !std::isfinite(p)) {
            continue;
        }
        const double x = db / 10.0;
        const double y = -std::log10(p);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 3) {
        throw NumericalError("diversity_fit: fewer than 3 usable points in the window");
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string to_string(ErgodicMethod m)
{
    switch (m) {
    case ErgodicMethod::ipsic_numeric:
        return "ipsic-numeric";
    case ErgodicMethod::psic_closed:
        return "psic-closed";
    case ErgodicMethod::ceiling:
        return "ceiling";
    case ErgodicMethod::upper_bound:
        return "upper-bound";
    case ErgodicMethod::oma:
        return "oma";
    }
    return "?";
}

ErgodicResult ergodic_psic_m(const NetworkConfig& cfg, const ChannelStats& stats, double rho, int m,
                             const quad::QuadratureRule& chebyshev)
{
    require_rank(cfg, m, "ergodic_psic_m");
    if (m == cfg.num_users) {
        throw DomainError("ergodic_psic_m: rank M has no interference term; use ergodic_psic_M");
    }
    if (chebyshev.kind != quad::RuleKind::chebyshev_first_kind) {
        throw DomainError("ergodic_psic_m: needs a Chebyshev rule");
    }
    if (!(rho >= 0.0)) {
        throw DomainError("ergodic_psic_m: rho must be non-negative");
    }
    ErgodicResult out;
    out.method = ErgodicMethod::psic_closed;
    if (rho == 0.0) {
        return out;
    }
    const double am = cfg.power_alloc[m - 1];
    const double ab = cfg.alloc_tail(m);
    const double varphi = 1.0 / (rho * stats.cascade(m));
    double s = 0.0;
    for (std::size_t n = 0; n < chebyshev.nodes.size(); ++n) {
        const double x = chebyshev.nodes[n];
        const double t = varphi * (1.0 + x) / (ab * (1.0 - x));
        const double fy = ordered_pow(t, cfg.group_size, m, cfg.num_users, cfg.partition);
        s += std::sqrt(1.0 - x * x) / (2.0 * ab + (1.0 + x) * am) * (1.0 - fy);
    }
    out.raw = std::numbers::pi * am / (chebyshev.order * kLn2) * s;
    out.rate = std::max(0.0, out.raw);
    return out;
}

double ergodic_psic_m_integral(const NetworkConfig& cfg, const ChannelStats& stats, double rho, int m, double tol)
{
    require_rank(cfg, m, "ergodic_psic_m_integral");
    if (m == cfg.num_users) {
        throw DomainError("ergodic_psic_m_integral: rank M has no interference term");
    }
    if (rho == 0.0) {
        return 0.0;
    }
    const double am = cfg.power_alloc[m - 1];
    const double ab = cfg.alloc_tail(m);
    const double omega = stats.cascade(m);
    auto f = [&](double y) -> double {
        const double den = rho * (am - y * ab);
        if (den <= 0.0) {
            return 0.0;
        }
        const double fy = ordered_pow(y / (den * omega), cfg.group_size, m, cfg.num_users, cfg.partition);
        return (1.0 - fy) / (1.0 + y);
    };
    return quad::integrate_finite(f, 0.0, am / ab, tol) / kLn2;
}

ErgodicResult ergodic_psic_M(const NetworkConfig& cfg, const ChannelStats& stats, double rho, double tol)
{
    if (!(rho >= 0.0)) {
        throw DomainError("ergodic_psic_M: rho must be non-negative");
    }
    const int big_m = cfg.num_users;
    ErgodicResult out;
    out.method = ErgodicMethod::psic_closed;
    out.raw = strongest_rate(rho, cfg.power_alloc[big_m - 1], stats.cascade(big_m), cfg.group_size,
                             big_m * cfg.partition, tol);
    out.rate = std::max(0.0, out.raw);
    return out;
}

double ergodic_psic_M_collapsed(const NetworkConfig& cfg, const ChannelStats& stats, double rho, double tol)
{
    if (rho == 0.0) {
        return 0.0;
    }
    const int big_m = cfg.num_users;
    const double c = rho * cfg.power_alloc[big_m - 1];
    const double omega = stats.cascade(big_m);
    const int big_r = big_m * cfg.partition;
    auto f = [&](double x) -> double {
        const double cdf = cascade_cdf_unit(x / omega, cfg.group_size);
        return (1.0 - std::pow(cdf, big_r)) / (1.0 + c * x);
    };
    return c * quad::integrate_semi_infinite(f, tol, omega) / kLn2;
}

MthUserRateBound::MthUserRateBound(const NetworkConfig& cfg, const ChannelStats& stats, double tol)
{
    const int big_m = cfg.num_users;
    const int q = cfg.group_size;
    const int big_r = big_m * cfg.partition;
    const double omega = stats.cascade(big_m);
    alloc_m_ = cfg.power_alloc[big_m - 1];
    auto f = [&](double x) -> double {
        if (x <= 0.0) {
            return 0.0;
        }
        const double cdf_term = big_r > 1 ? std::pow(cascade_cdf_unit(x / omega, q), big_r - 1) : 1.0;
        if (cdf_term == 0.0) {
            return 0.0;
        }
        const double lk = special::log_bessel_k_int(q - 1, 2.0 * std::sqrt(x / omega));
        return cdf_term * std::exp(0.5 * (q + 1) * std::log(x) + lk);
    };
    try {
        phi_ = quad::integrate_semi_infinite(f, tol, omega);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("rate bound constant: ") + e.what());
    }
    mean_gain_ = 2.0 * big_r * phi_ /
                 std::exp(special::log_gamma_int(q) + 0.5 * (q + 1) * std::log(omega));
}

ErgodicResult MthUserRateBound::at(double rho) const
{
    if (!(rho >= 0.0)) {
        throw DomainError("rate bound: rho must be non-negative");
    }
    ErgodicResult out;
    out.method = ErgodicMethod::upper_bound;
    out.raw = out.rate = std::log2(1.0 + rho * alloc_m_ * mean_gain_);
    return out;
}

ErgodicResult ergodic_upper_bound_M(const NetworkConfig& cfg, const ChannelStats& stats, double rho, double tol)
{
    return MthUserRateBound(cfg, stats, tol).at(rho);
}

ErgodicResult ergodic_ceiling(const NetworkConfig& cfg, int m)
{
    require_rank(cfg, m, "ergodic_ceiling");
    if (m == cfg.num_users) {
        throw DomainError("ergodic_ceiling: rank M has no rate ceiling");
    }
    ErgodicResult out;
    out.method = ErgodicMethod::ceiling;
    out.raw = out.rate = std::log2(1.0 + cfg.power_alloc[m - 1] / cfg.alloc_tail(m));
    return out;
}

ErgodicResult ergodic_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho, double tol)
{
    if (!(rho >= 0.0)) {
        throw DomainError("ergodic_oma: rho must be non-negative");
    }
    ErgodicResult out;
    out.method = ErgodicMethod::oma;
    out.raw = strongest_rate(rho, 1.0, stats.cascade_oma(), cfg.group_size, cfg.partition, tol);
    out.rate = std::max(0.0, out.raw);
    return out;
}

double throughput_delay_limited(const OutageResult& outage, const NetworkConfig& cfg)
{
    if (outage.p.size() != cfg.target_rates.size()) {
        throw DomainError("throughput_delay_limited: one outage value per user required");
    }
    double s = 0.0;
    for (std::size_t m = 0; m < outage.p.size(); ++m) {
        s += (1.0 - outage.p[m]) * cfg.target_rates[m];
    }
    return s;
}

double throughput_delay_tolerant(const std::vector<ErgodicResult>& rates)
{
    double s = 0.0;
    for (const auto& r : rates) {
        s += r.rate;
    }
    return s;
}

double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

EnergyModel EnergyModel::from_db(double kappa, double p_s_dbw, double p_bs_dbw, double p_k_b_dbm, double p_ue_dbm,
                                 int num_users)
{
    EnergyModel e;
    e.kappa = kappa;
    e.p_s = dbw_to_watt(p_s_dbw);
    e.p_bs = dbw_to_watt(p_bs_dbw);
    e.p_k_b = dbm_to_watt(p_k_b_dbm);
    e.p_ue.assign(num_users, dbm_to_watt(p_ue_dbm));
    return e;
}

double EnergyModel::total_power(int elements) const
{
    double s = kappa * p_s + p_bs + elements * p_k_b;
    for (double p : p_ue) {
        s += p;
    }
    return s;
}

double energy_efficiency(double throughput, const EnergyModel& energy, int elements)
{
    const double total = energy.total_power(elements);
    if (!(total > 0.0)) {
        throw DomainError("energy_efficiency: total power must be positive");
    }
    return throughput / total;
}

} // namespace irsnoma::analytic
