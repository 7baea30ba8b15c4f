#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace irsnoma {

enum class SicMode { ipsic, psic };
enum class OrderingMode { per_column, effective_gain };

/// How the Monte-Carlo generator couples the users.
///   independent    : every rank m is drawn as the m-th order statistic of M
///                    i.i.d. cascades at (Omega_sr, Omega_rm). This is the
///                    statistical model the closed forms are derived under.
///   shared_bs_link : one physical BS-IRS vector shared by all users, user u
///                    at its own Omega_ru, ranks taken from that single draw.
enum class ChannelModel { independent, shared_bs_link };

std::string to_string(SicMode m);
std::string to_string(OrderingMode m);
std::string to_string(ChannelModel m);
SicMode parse_sic_mode(const std::string& s);
OrderingMode parse_ordering_mode(const std::string& s);
ChannelModel parse_channel_model(const std::string& s);

double db_to_linear(double db);
double linear_to_db(double lin);

struct NetworkConfig {
    int num_users = 3;           // M
    int elements = 1;            // K
    int partition = 1;           // P
    int group_size = 1;          // Q
    std::vector<double> power_alloc{0.5, 0.4, 0.1};
    std::vector<double> target_rates{0.6, 1.6, 2.0};
    double oma_rate = 4.2;
    double pathloss_exponent = 2.0;
    double d_sr = 0.5;
    std::vector<double> d_rm{0.5, 0.4, 0.3};
    double d_rd = 0.5;
    double residual_interference = 0.1; // Omega_I, linear
    // Reflection amplitude. Under 1-bit coding the selected entries are 1,
    // so this is carried for completeness and never scales a gain.
    double reflection_amplitude = 1.0;
    SicMode sic = SicMode::psic;
    OrderingMode ordering = OrderingMode::per_column;
    ChannelModel channel = ChannelModel::independent;

    /// The three-user reference scenario (K = P = Q = 1).
    static NetworkConfig reference();

    /// Throws ConfigError naming the field for any broken invariant.
    /// `require_ordered_alloc` = false skips a_1 >= ... >= a_M and admits zero
    /// fractions (power grids).
    void validate(bool require_ordered_alloc = true) const;

    /// 1 under ipSIC, 0 under pSIC.
    double varpi() const { return sic == SicMode::ipsic ? 1.0 : 0.0; }

    /// a_{m+1} + ... + a_M for the 1-based rank m.
    double alloc_tail(int m) const;
};

struct ChannelStats {
    double omega_sr;
    std::vector<double> omega_rm;
    double omega_rd;

    /// Omega_sr * Omega_rm for 1-based rank m.
    double cascade(int m) const { return omega_sr * omega_rm.at(m - 1); }
    double cascade_oma() const { return omega_sr * omega_rd; }
};

ChannelStats derive_stats(const NetworkConfig& cfg);

/// 2^rate - 1.
double threshold(double rate);

/// Per-rank SINR thresholds psi_q = gamma_q / (a_q - gamma_q * abar_q), with
/// the transmit SNR factored out. A non-positive entry means the allocation
/// cannot support that rate at any SNR.
std::vector<double> rho_free_thresholds(const NetworkConfig& cfg);

/// max_{q<=m} psi_q for 1-based m; +inf when any q <= m is infeasible.
double worst_threshold(const NetworkConfig& cfg, int m);

/// Disjoint Q-element groups of a K = P*Q element surface.
struct Codebook {
    int partition;
    int group_size;

    explicit Codebook(const NetworkConfig& cfg) : partition(cfg.partition), group_size(cfg.group_size) {}
    Codebook(int p, int q) : partition(p), group_size(q) {}

    int elements() const { return partition * group_size; }
    int first(int p) const { return p * group_size; }
    int last(int p) const { return (p + 1) * group_size; }
    /// 0/1 selector column v_p.
    std::vector<int> selector(int p) const;
};

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for (seed, stream); distinct streams never share state.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

using cplx = std::complex<double>;

/// Cascade channels of `users` terminals behind one K-element surface.
/// h_sr has K entries when shared, users*K otherwise (row-major).
struct CascadePool {
    int users = 0;
    int elements = 0;
    bool shared_sr = true;
    std::vector<cplx> h_sr;
    std::vector<cplx> h_rm; // users * K, row-major

    const cplx& sr(int u, int k) const { return shared_sr ? h_sr[k] : h_sr[u * elements + k]; }
    const cplx& rm(int u, int k) const { return h_rm[u * elements + k]; }
};

/// One Monte-Carlo realization.
struct ChannelDraw {
    std::vector<CascadePool> pools; // one per rank (independent) or one shared
    CascadePool oma;                // single OMA user
    std::vector<double> residual;   // |h_I|^2 per rank
};

/// Reusable sampler. Owns no generator; every call takes the caller's state.
class ChannelSampler {
public:
    ChannelSampler(const NetworkConfig& cfg, const ChannelStats& stats);

    void sample(Rng& rng, ChannelDraw& out) const;
    ChannelDraw sample(Rng& rng) const;

    const NetworkConfig& config() const { return cfg_; }

private:
    NetworkConfig cfg_;
    ChannelStats stats_;
};

ChannelDraw sample_draw(const NetworkConfig& cfg, const ChannelStats& stats, Rng& rng);

/// users x P gains, row-major.
struct GainMatrix {
    int users = 0;
    int columns = 0;
    std::vector<double> x;

    double operator()(int u, int p) const { return x[u * columns + p]; }
    double& operator()(int u, int p) { return x[u * columns + p]; }
};

/// X[u][p] = |sum_{k in group p} h_sr,k h_ru,k|^2
void cascade_gains(const CascadePool& pool, const Codebook& cb, GainMatrix& out);
GainMatrix cascade_gains(const CascadePool& pool, const Codebook& cb);

/// Ascending effective gains, one per rank.
void order_users(const GainMatrix& x, OrderingMode mode, std::vector<double>& out);
std::vector<double> order_users(const GainMatrix& x, OrderingMode mode);

/// Gain seen by each rank 1..M in one draw (index 0 is rank 1).
void rank_gains(const ChannelDraw& draw, const NetworkConfig& cfg, std::vector<double>& out);
std::vector<double> rank_gains(const ChannelDraw& draw, const NetworkConfig& cfg);

/// max_p gain of the OMA user.
double oma_gain(const ChannelDraw& draw, const Codebook& cb);

/// SINR at rank m when decoding the message of rank q (1-based, q <= m).
double sinr_noma(double g, int q, int m, double rho, double residual, const NetworkConfig& cfg);

double snr_oma(double g, double rho);

} // namespace irsnoma
