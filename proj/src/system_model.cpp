#include "irsnoma/system_model.hpp"

#include "irsnoma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace irsnoma {

std::string to_string(SicMode m) { return m == SicMode::ipsic ? "ipsic" : "psic"; }

std::string to_string(OrderingMode m) { return m == OrderingMode::per_column ? "per-column" : "effective-gain"; }

std::string to_string(ChannelModel m) { return m == ChannelModel::independent ? "independent" : "shared-bs-link"; }

SicMode parse_sic_mode(const std::string& s)
{
    if (s == "ipsic") {
        return SicMode::ipsic;
    }
    if (s == "psic") {
        return SicMode::psic;
    }
    throw ConfigError("sic_mode", "sic_mode must be ipsic or psic, got '" + s + "'");
}

OrderingMode parse_ordering_mode(const std::string& s)
{
    if (s == "per-column") {
        return OrderingMode::per_column;
    }
    if (s == "effective-gain") {
        return OrderingMode::effective_gain;
    }
    throw ConfigError("ordering", "ordering must be per-column or effective-gain, got '" + s + "'");
}

ChannelModel parse_channel_model(const std::string& s)
{
    if (s == "independent") {
        return ChannelModel::independent;
    }
    if (s == "shared-bs-link") {
        return ChannelModel::shared_bs_link;
    }
    throw ConfigError("channel_model", "channel_model must be independent or shared-bs-link, got '" + s + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

NetworkConfig NetworkConfig::reference() { return NetworkConfig{}; }

void NetworkConfig::validate(bool require_ordered_alloc) const
{
    if (num_users < 1) {
        throw ConfigError("num_users", "num_users must be at least 1");
    }
    if (partition < 1 || group_size < 1 || elements < 1) {
        throw ConfigError("elements", "K, P and Q must be positive");
    }
    if (elements != partition * group_size) {
        throw ConfigError("elements", "K must equal P*Q (K=" + std::to_string(elements) + ", P=" +
                                          std::to_string(partition) + ", Q=" + std::to_string(group_size) + ")");
    }
    const auto m = static_cast<std::size_t>(num_users);
    if (power_alloc.size() != m) {
        throw ConfigError("power_alloc", "power_alloc needs one entry per user");
    }
    if (target_rates.size() != m) {
        throw ConfigError("target_rates", "target_rates needs one entry per user");
    }
    if (d_rm.size() != m) {
        throw ConfigError("d_rm", "d_rm needs one entry per user");
    }
    // a power grid may sweep a fraction down to zero; that user is then
    // infeasible rather than invalid
    for (double a : power_alloc) {
        if (!std::isfinite(a) || a < 0.0 || (require_ordered_alloc && a == 0.0)) {
            throw ConfigError("power_alloc", "power_alloc entries must be positive");
        }
    }
    const double sum = std::accumulate(power_alloc.begin(), power_alloc.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("power_alloc", "power_alloc must sum to 1");
    }
    if (require_ordered_alloc) {
        for (std::size_t i = 1; i < m; ++i) {
            if (power_alloc[i] > power_alloc[i - 1]) {
                throw ConfigError("power_alloc", "power_alloc must be non-increasing (a_" + std::to_string(i) +
                                                     " >= a_" + std::to_string(i + 1) + ")");
            }
        }
    }
    for (double r : target_rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ConfigError("target_rates", "target_rates must be non-negative");
        }
    }
    if (!(oma_rate >= 0.0) || !std::isfinite(oma_rate)) {
        throw ConfigError("oma_rate", "oma_rate must be non-negative");
    }
    if (!(pathloss_exponent > 0.0)) {
        throw ConfigError("pathloss_exponent", "pathloss_exponent must be positive");
    }
    if (!(d_sr > 0.0) || !(d_rd > 0.0)) {
        throw ConfigError(d_sr > 0.0 ? "d_rd" : "d_sr", "distances must be positive");
    }
    for (double d : d_rm) {
        if (!(d > 0.0)) {
            throw ConfigError("d_rm", "distances must be positive");
        }
    }
    if (!(residual_interference >= 0.0) || !std::isfinite(residual_interference)) {
        throw ConfigError("residual_interference_db", "residual interference must be non-negative");
    }
    if (!(reflection_amplitude > 0.0 && reflection_amplitude <= 1.0)) {
        throw ConfigError("reflection_amplitude", "reflection_amplitude must be in (0, 1]");
    }
}

double NetworkConfig::alloc_tail(int m) const
{
    double s = 0.0;
    for (int i = m; i < num_users; ++i) {
        s += power_alloc[i];
    }
    return s;
}

ChannelStats derive_stats(const NetworkConfig& cfg)
{
    cfg.validate(false);
    const double a = cfg.pathloss_exponent;
    ChannelStats s;
    s.omega_sr = std::pow(cfg.d_sr, -a);
    s.omega_rd = std::pow(cfg.d_rd, -a);
    s.omega_rm.reserve(cfg.d_rm.size());
    for (double d : cfg.d_rm) {
        s.omega_rm.push_back(std::pow(d, -a));
    }
    return s;
}

double threshold(double rate)
{
    if (!(rate >= 0.0)) {
        throw DomainError("threshold: rate must be non-negative");
    }
    return std::exp2(rate) - 1.0;
}

std::vector<double> rho_free_thresholds(const NetworkConfig& cfg)
{
    std::vector<double> psi(cfg.num_users);
    for (int q = 1; q <= cfg.num_users; ++q) {
        const double g = threshold(cfg.target_rates[q - 1]);
        const double den = cfg.power_alloc[q - 1] - g * cfg.alloc_tail(q);
        psi[q - 1] = den > 0.0 ? g / den : -1.0;
    }
    return psi;
}

double worst_threshold(const NetworkConfig& cfg, int m)
{
    const auto psi = rho_free_thresholds(cfg);
    double w = 0.0;
    for (int q = 1; q <= m; ++q) {
        if (psi[q - 1] < 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        w = std::max(w, psi[q - 1]);
    }
    return w;
}

std::vector<int> Codebook::selector(int p) const
{
    std::vector<int> v(elements(), 0);
    std::fill(v.begin() + first(p), v.begin() + last(p), 1);
    return v;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

namespace {

void fill_cn(std::vector<cplx>& v, std::size_t n, double omega, Rng& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    const double s = std::sqrt(0.5 * omega);
    v.resize(n);
    for (auto& z : v) {
        const double re = nd(rng);
        const double im = nd(rng);
        z = cplx(s * re, s * im);
    }
}

} // namespace

ChannelSampler::ChannelSampler(const NetworkConfig& cfg, const ChannelStats& stats) : cfg_(cfg), stats_(stats)
{
    cfg_.validate(false);
}

void ChannelSampler::sample(Rng& rng, ChannelDraw& out) const
{
    const int m_users = cfg_.num_users;
    const int k = cfg_.elements;
    const auto mk = static_cast<std::size_t>(m_users) * k;

    if (cfg_.channel == ChannelModel::independent) {
        out.pools.resize(m_users);
        for (int m = 0; m < m_users; ++m) {
            auto& pool = out.pools[m];
            pool.users = m_users;
            pool.elements = k;
            pool.shared_sr = false;
            fill_cn(pool.h_sr, mk, stats_.omega_sr, rng);
            fill_cn(pool.h_rm, mk, stats_.omega_rm[m], rng);
        }
        out.oma.users = 1;
        out.oma.elements = k;
        out.oma.shared_sr = true;
        fill_cn(out.oma.h_sr, k, stats_.omega_sr, rng);
        fill_cn(out.oma.h_rm, k, stats_.omega_rd, rng);
    } else {
        out.pools.resize(1);
        auto& pool = out.pools[0];
        pool.users = m_users;
        pool.elements = k;
        pool.shared_sr = true;
        fill_cn(pool.h_sr, k, stats_.omega_sr, rng);
        pool.h_rm.resize(mk);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int u = 0; u < m_users; ++u) {
            const double s = std::sqrt(0.5 * stats_.omega_rm[u]);
            for (int i = 0; i < k; ++i) {
                const double re = nd(rng);
                const double im = nd(rng);
                pool.h_rm[u * k + i] = cplx(s * re, s * im);
            }
        }
        out.oma.users = 1;
        out.oma.elements = k;
        out.oma.shared_sr = true;
        out.oma.h_sr = pool.h_sr;
        fill_cn(out.oma.h_rm, k, stats_.omega_rd, rng);
    }

    // drawn under pSIC too so paired runs consume identical streams
    std::exponential_distribution<double> ed(1.0);
    out.residual.resize(m_users);
    for (auto& r : out.residual) {
        r = cfg_.residual_interference * ed(rng);
    }
}

ChannelDraw ChannelSampler::sample(Rng& rng) const
{
    ChannelDraw d;
    sample(rng, d);
    return d;
}

ChannelDraw sample_draw(const NetworkConfig& cfg, const ChannelStats& stats, Rng& rng)
{
    return ChannelSampler(cfg, stats).sample(rng);
}

void cascade_gains(const CascadePool& pool, const Codebook& cb, GainMatrix& out)
{
    if (pool.elements != cb.elements()) {
        throw DomainError("cascade_gains: pool has " + std::to_string(pool.elements) + " elements, codebook " +
                          std::to_string(cb.elements()));
    }
    out.users = pool.users;
    out.columns = cb.partition;
    out.x.resize(static_cast<std::size_t>(pool.users) * cb.partition);
    for (int u = 0; u < pool.users; ++u) {
        for (int p = 0; p < cb.partition; ++p) {
            cplx s(0.0, 0.0);
            for (int k = cb.first(p); k < cb.last(p); ++k) {
                s += pool.sr(u, k) * pool.rm(u, k);
            }
            out(u, p) = std::norm(s);
        }
    }
}

GainMatrix cascade_gains(const CascadePool& pool, const Codebook& cb)
{
    GainMatrix g;
    cascade_gains(pool, cb, g);
    return g;
}

void order_users(const GainMatrix& x, OrderingMode mode, std::vector<double>& out)
{
    out.assign(x.users, 0.0);
    if (mode == OrderingMode::effective_gain || x.columns == 1) {
        for (int u = 0; u < x.users; ++u) {
            double best = x(u, 0);
            for (int p = 1; p < x.columns; ++p) {
                best = std::max(best, x(u, p));
            }
            out[u] = best;
        }
        std::sort(out.begin(), out.end());
        return;
    }
    std::vector<double> col(x.users);
    for (int p = 0; p < x.columns; ++p) {
        for (int u = 0; u < x.users; ++u) {
            col[u] = x(u, p);
        }
        std::sort(col.begin(), col.end());
        for (int u = 0; u < x.users; ++u) {
            out[u] = p == 0 ? col[u] : std::max(out[u], col[u]);
        }
    }
}

std::vector<double> order_users(const GainMatrix& x, OrderingMode mode)
{
    std::vector<double> g;
    order_users(x, mode, g);
    return g;
}

void rank_gains(const ChannelDraw& draw, const NetworkConfig& cfg, std::vector<double>& out)
{
    const Codebook cb(cfg);
    GainMatrix gm;
    std::vector<double> sorted;
    if (cfg.channel == ChannelModel::shared_bs_link) {
        cascade_gains(draw.pools.at(0), cb, gm);
        order_users(gm, cfg.ordering, out);
        return;
    }
    out.resize(cfg.num_users);
    for (int m = 0; m < cfg.num_users; ++m) {
        cascade_gains(draw.pools.at(m), cb, gm);
        order_users(gm, cfg.ordering, sorted);
        out[m] = sorted[m];
    }
}

std::vector<double> rank_gains(const ChannelDraw& draw, const NetworkConfig& cfg)
{
    std::vector<double> g;
    rank_gains(draw, cfg, g);
    return g;
}

double oma_gain(const ChannelDraw& draw, const Codebook& cb)
{
    const GainMatrix gm = cascade_gains(draw.oma, cb);
    double best = gm(0, 0);
    for (int p = 1; p < gm.columns; ++p) {
        best = std::max(best, gm(0, p));
    }
    return best;
}

double sinr_noma(double g, int q, int m, double rho, double residual, const NetworkConfig& cfg)
{
    if (q < 1 || m < q || m > cfg.num_users) {
        throw DomainError("sinr_noma: need 1 <= q <= m <= M (q=" + std::to_string(q) + ", m=" + std::to_string(m) +
                          ")");
    }
    if (!(rho > 0.0)) {
        throw DomainError("sinr_noma: rho must be positive");
    }
    const double res = m == 1 ? 0.0 : cfg.varpi() * rho * residual;
    const double sg = rho * g;
    return sg * cfg.power_alloc[q - 1] / (sg * cfg.alloc_tail(q) + res + 1.0);
}

double snr_oma(double g, double rho)
{
    if (!(rho > 0.0)) {
        throw DomainError("snr_oma: rho must be positive");
    }
    return rho * g;
}

} // namespace irsnoma
