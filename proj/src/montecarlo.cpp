#include "irsnoma/montecarlo.hpp"

#include "irsnoma/analytic.hpp"
#include "irsnoma/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace irsnoma::mc {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::uint64_t kNomaTag = 0x4e4f4d41ULL;
constexpr std::uint64_t kRelayTag = 0x52454c41ULL;

struct Tally {
    std::vector<std::int64_t> hits;
    std::vector<double> sum;
    std::vector<double> sum_sq;

    explicit Tally(std::size_t n = 0) : hits(n, 0), sum(n, 0.0), sum_sq(n, 0.0) {}

    void merge(const Tally& o)
    {
        for (std::size_t i = 0; i < hits.size(); ++i) {
            hits[i] += o.hits[i];
            sum[i] += o.sum[i];
            sum_sq[i] += o.sum_sq[i];
        }
    }
};

void check_options(const McOptions& opt)
{
    if (opt.trials < 1) {
        throw DomainError("monte carlo: trials must be at least 1");
    }
    if (opt.chunk_size < 1) {
        throw DomainError("monte carlo: chunk_size must be at least 1");
    }
}

// Runs body(rng, count, tally) over fixed chunks; chunk c always draws from
// stream (seed, tag, c) and tallies are merged in chunk order.
template <class Body>
Tally run_chunks(const McOptions& opt, std::uint64_t tag, std::size_t slots, Body body)
{
    check_options(opt);
    const std::int64_t n_chunks = (opt.trials + opt.chunk_size - 1) / opt.chunk_size;
    std::vector<Tally> parts(n_chunks, Tally(slots));
    int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp<int>(threads, 1, static_cast<int>(std::min<std::int64_t>(n_chunks, 256)));

    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) {
                return;
            }
            const std::int64_t count = std::min(opt.chunk_size, opt.trials - c * opt.chunk_size);
            Rng rng = make_stream(opt.seed, splitmix64(tag) ^ static_cast<std::uint64_t>(c));
            body(rng, count, parts[c]);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    Tally total(slots);
    for (const auto& p : parts) {
        total.merge(p);
    }
    return total;
}

McEstimate mean_estimate(double sum, double sum_sq, std::int64_t n)
{
    McEstimate e;
    e.trials = n;
    e.metric = Metric::ergodic;
    e.value = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0;
    e.std_error = std::sqrt(var / n);
    e.ci_lo = e.value - kZ95 * e.std_error;
    e.ci_hi = e.value + kZ95 * e.std_error;
    return e;
}

std::string noma_scheme(const NetworkConfig& cfg)
{
    return cfg.sic == SicMode::ipsic ? "irs-noma-ipsic" : "irs-noma-psic";
}

struct NomaPlan {
    std::vector<double> a;
    std::vector<double> abar;
    std::vector<double> gamma;
    double varpi;
};

NomaPlan make_plan(const NetworkConfig& cfg)
{
    NomaPlan p;
    for (int q = 1; q <= cfg.num_users; ++q) {
        p.a.push_back(cfg.power_alloc[q - 1]);
        p.abar.push_back(cfg.alloc_tail(q));
        p.gamma.push_back(threshold(cfg.target_rates[q - 1]));
    }
    p.varpi = cfg.varpi();
    return p;
}

template <class PerTrial>
Tally run_noma(const NetworkConfig& cfg, const ChannelStats& stats, std::size_t slots, const McOptions& opt,
               PerTrial per_trial)
{
    cfg.validate(false);
    const ChannelSampler sampler(cfg, stats);
    const Codebook cb(cfg);
    return run_chunks(opt, kNomaTag, slots, [&](Rng& rng, std::int64_t count, Tally& t) {
        ChannelDraw draw;
        std::vector<double> g;
        for (std::int64_t i = 0; i < count; ++i) {
            sampler.sample(rng, draw);
            rank_gains(draw, cfg, g);
            per_trial(draw, g, cb, t);
        }
    });
}

} // namespace

std::string to_string(Metric m) { return m == Metric::outage ? "outage" : "ergodic"; }

McEstimate proportion_estimate(std::int64_t hits, std::int64_t trials)
{
    if (trials < 1) {
        throw DomainError("proportion_estimate: trials must be positive");
    }
    McEstimate e;
    e.trials = trials;
    e.metric = Metric::outage;
    const double n = static_cast<double>(trials);
    const double p = hits / n;
    e.value = p;
    e.std_error = std::sqrt(p * (1.0 - p) / n);
    if (p < 1e-3) {
        const double z2 = kZ95 * kZ95;
        const double den = 1.0 + z2 / n;
        const double centre = (p + z2 / (2.0 * n)) / den;
        const double half = kZ95 / den * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
        e.ci_lo = std::min(p, std::max(0.0, centre - half));
        e.ci_hi = std::max(p, std::min(1.0, centre + half));
    } else {
        e.ci_lo = std::max(0.0, p - kZ95 * e.std_error);
        e.ci_hi = std::min(1.0, p + kZ95 * e.std_error);
    }
    return e;
}

std::int64_t trials_for_relative_precision(double p, double relative)
{
    if (!(p > 0.0 && p <= 1.0) || !(relative > 0.0)) {
        throw DomainError("trials_for_relative_precision: need 0 < p <= 1 and relative > 0");
    }
    return static_cast<std::int64_t>(std::ceil((1.0 - p) / (relative * relative * p)));
}

std::vector<std::vector<McEstimate>> outage_noma(const NetworkConfig& cfg, const ChannelStats& stats,
                                                 const std::vector<double>& rhos, const McOptions& opt)
{
    const int big_m = cfg.num_users;
    const auto plan = make_plan(cfg);
    const std::size_t n_rho = rhos.size();
    const Tally t = run_noma(cfg, stats, n_rho * big_m, opt,
                             [&](const ChannelDraw& draw, const std::vector<double>& g, const Codebook&, Tally& acc) {
                                 for (std::size_t s = 0; s < n_rho; ++s) {
                                     const double rho = rhos[s];
                                     for (int m = 1; m <= big_m; ++m) {
                                         const double sg = rho * g[m - 1];
                                         const double res =
                                             m == 1 ? 0.0 : plan.varpi * rho * draw.residual[m - 1];
                                         bool out = false;
                                         for (int q = 1; q <= m && !out; ++q) {
                                             const double sinr =
                                                 sg * plan.a[q - 1] / (sg * plan.abar[q - 1] + res + 1.0);
                                             out = sinr < plan.gamma[q - 1];
                                         }
                                         acc.hits[s * big_m + (m - 1)] += out ? 1 : 0;
                                     }
                                 }
                             });
    std::vector<std::vector<McEstimate>> result(n_rho);
    for (std::size_t s = 0; s < n_rho; ++s) {
        for (int m = 1; m <= big_m; ++m) {
            auto e = proportion_estimate(t.hits[s * big_m + (m - 1)], opt.trials);
            e.seed = opt.seed;
            e.scheme = noma_scheme(cfg);
            e.user = m;
            result[s].push_back(e);
        }
    }
    return result;
}

std::vector<std::vector<McEstimate>> ergodic_noma(const NetworkConfig& cfg, const ChannelStats& stats,
                                                  const std::vector<double>& rhos, const McOptions& opt)
{
    const int big_m = cfg.num_users;
    const auto plan = make_plan(cfg);
    const std::size_t n_rho = rhos.size();
    const Tally t = run_noma(cfg, stats, n_rho * big_m, opt,
                             [&](const ChannelDraw& draw, const std::vector<double>& g, const Codebook&, Tally& acc) {
                                 for (std::size_t s = 0; s < n_rho; ++s) {
                                     const double rho = rhos[s];
                                     for (int m = 1; m <= big_m; ++m) {
                                         const double sg = rho * g[m - 1];
                                         const double res =
                                             m == 1 ? 0.0 : plan.varpi * rho * draw.residual[m - 1];
                                         const double sinr =
                                             sg * plan.a[m - 1] / (sg * plan.abar[m - 1] + res + 1.0);
                                         const double r = std::log2(1.0 + sinr);
                                         const std::size_t k = s * big_m + (m - 1);
                                         acc.sum[k] += r;
                                         acc.sum_sq[k] += r * r;
                                     }
                                 }
                             });
    std::vector<std::vector<McEstimate>> result(n_rho);
    for (std::size_t s = 0; s < n_rho; ++s) {
        for (int m = 1; m <= big_m; ++m) {
            const std::size_t k = s * big_m + (m - 1);
            auto e = mean_estimate(t.sum[k], t.sum_sq[k], opt.trials);
            e.seed = opt.seed;
            e.scheme = noma_scheme(cfg);
            e.user = m;
            result[s].push_back(e);
        }
    }
    return result;
}

std::vector<McEstimate> oma(const NetworkConfig& cfg, const ChannelStats& stats, const std::vector<double>& rhos,
                            const McOptions& opt, Metric metric)
{
    const double gamma = threshold(cfg.oma_rate);
    const std::size_t n_rho = rhos.size();
    const Tally t = run_noma(cfg, stats, n_rho, opt,
                             [&](const ChannelDraw& draw, const std::vector<double>&, const Codebook& cb, Tally& acc) {
                                 const double g = oma_gain(draw, cb);
                                 for (std::size_t s = 0; s < n_rho; ++s) {
                                     const double snr = rhos[s] * g;
                                     if (metric == Metric::outage) {
                                         acc.hits[s] += snr < gamma ? 1 : 0;
                                     } else {
                                         const double r = std::log2(1.0 + snr);
                                         acc.sum[s] += r;
                                         acc.sum_sq[s] += r * r;
                                     }
                                 }
                             });
    std::vector<McEstimate> result;
    for (std::size_t s = 0; s < n_rho; ++s) {
        auto e = metric == Metric::outage ? proportion_estimate(t.hits[s], opt.trials)
                                          : mean_estimate(t.sum[s], t.sum_sq[s], opt.trials);
        e.seed = opt.seed;
        e.scheme = "irs-oma";
        e.user = 0;
        result.push_back(e);
    }
    return result;
}

std::vector<McEstimate> mc_outage_noma(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                       std::int64_t trials, std::uint64_t seed)
{
    McOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    return outage_noma(cfg, stats, {rho}, opt).front();
}

std::vector<McEstimate> mc_ergodic_noma(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                        std::int64_t trials, std::uint64_t seed)
{
    McOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    return ergodic_noma(cfg, stats, {rho}, opt).front();
}

McEstimate mc_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho, std::int64_t trials,
                  std::uint64_t seed, Metric metric)
{
    McOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    return oma(cfg, stats, {rho}, opt, metric).front();
}

std::string to_string(BaselineScheme s)
{
    switch (s) {
    case BaselineScheme::af_variable_gain:
        return "af";
    case BaselineScheme::df_fd:
        return "df-fd";
    case BaselineScheme::df_hd:
        return "df-hd";
    }
    return "?";
}

BaselineScheme parse_baseline_scheme(const std::string& s)
{
    if (s == "af" || s == "af-variable-gain") {
        return BaselineScheme::af_variable_gain;
    }
    if (s == "df-fd") {
        return BaselineScheme::df_fd;
    }
    if (s == "df-hd") {
        return BaselineScheme::df_hd;
    }
    throw ConfigError("schemes", "unknown relaying scheme '" + s + "'");
}

std::vector<McEstimate> baseline(const BaselineConfig& bc, const std::vector<double>& rhos, const McOptions& opt,
                                 Metric metric)
{
    if (bc.scheme == BaselineScheme::df_fd && !(bc.omega_li >= 0.0)) {
        throw ConfigError("loop_interference_db", "FD relaying needs the loop interference level");
    }
    if (!(bc.omega1 > 0.0) || !(bc.omega2 > 0.0)) {
        throw ConfigError("baselines", "hop variances must be positive");
    }
    const double omega_li = std::max(0.0, bc.omega_li);
    const std::size_t n_rho = rhos.size();
    const Tally t = run_chunks(opt, kRelayTag, n_rho, [&](Rng& rng, std::int64_t count, Tally& acc) {
        std::exponential_distribution<double> ed(1.0);
        for (std::int64_t i = 0; i < count; ++i) {
            // all three draws every trial so the schemes share random numbers
            const double g1 = bc.omega1 * ed(rng);
            const double g2 = bc.omega2 * ed(rng);
            const double gli = omega_li * ed(rng);
            for (std::size_t s = 0; s < n_rho; ++s) {
                const double rho = rhos[s];
                const double y1 = rho * g1;
                const double y2 = rho * g2;
                double rate = 0.0;
                switch (bc.scheme) {
                case BaselineScheme::af_variable_gain:
                    rate = 0.5 * std::log2(1.0 + y1 * y2 / (y1 + y2 + 1.0));
                    break;
                case BaselineScheme::df_hd:
                    rate = 0.5 * std::log2(1.0 + std::min(y1, y2));
                    break;
                case BaselineScheme::df_fd:
                    rate = std::log2(1.0 + std::min(y1 / (rho * gli + 1.0), y2));
                    break;
                }
                if (metric == Metric::outage) {
                    acc.hits[s] += rate < bc.target_rate ? 1 : 0;
                } else {
                    acc.sum[s] += rate;
                    acc.sum_sq[s] += rate * rate;
                }
            }
        }
    });
    std::vector<McEstimate> result;
    for (std::size_t s = 0; s < n_rho; ++s) {
        auto e = metric == Metric::outage ? proportion_estimate(t.hits[s], opt.trials)
                                          : mean_estimate(t.sum[s], t.sum_sq[s], opt.trials);
        e.seed = opt.seed;
        e.scheme = to_string(bc.scheme);
        e.user = 0;
        result.push_back(e);
    }
    return result;
}

McEstimate mc_baseline(const BaselineConfig& bc, double rho, std::int64_t trials, std::uint64_t seed, Metric metric)
{
    McOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    return baseline(bc, {rho}, opt, metric).front();
}

} // namespace irsnoma::mc

namespace irsnoma::analytic {

std::vector<ErgodicResult> ergodic_ipsic_numeric(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                                 std::int64_t trials, std::uint64_t seed)
{
    if (trials < 1) {
        throw DomainError("ergodic_ipsic_numeric: trials must be at least 1");
    }
    const auto est = mc::mc_ergodic_noma(cfg, stats, rho, trials, seed);
    std::vector<ErgodicResult> out;
    for (const auto& e : est) {
        ErgodicResult r;
        r.method = ErgodicMethod::ipsic_numeric;
        r.rate = r.raw = e.value;
        r.ci_lo = e.ci_lo;
        r.ci_hi = e.ci_hi;
        r.std_error = e.std_error;
        r.trials = e.trials;
        out.push_back(r);
    }
    return out;
}

} // namespace irsnoma::analytic
