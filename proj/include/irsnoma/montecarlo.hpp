#pragma once

#include "irsnoma/system_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace irsnoma::mc {

enum class Metric { outage, ergodic };

std::string to_string(Metric m);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0; // 95 %
    double ci_hi = 0.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    int user = 0; // 1-based rank, 0 for single-user schemes
    Metric metric = Metric::outage;
};

struct McOptions {
    std::int64_t trials = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;                 // 0: hardware concurrency
    std::int64_t chunk_size = 16384; // trials per generator stream
};

/// Estimates at each rho of `rhos`, indexed [snr][rank-1]. The same channel
/// draws are reused across the whole span.
std::vector<std::vector<McEstimate>> outage_noma(const NetworkConfig& cfg, const ChannelStats& stats,
                                                 const std::vector<double>& rhos, const McOptions& opt);
std::vector<std::vector<McEstimate>> ergodic_noma(const NetworkConfig& cfg, const ChannelStats& stats,
                                                  const std::vector<double>& rhos, const McOptions& opt);
/// One estimate per rho. Uses the OMA channel of the same draws as the NOMA runs.
std::vector<McEstimate> oma(const NetworkConfig& cfg, const ChannelStats& stats, const std::vector<double>& rhos,
                            const McOptions& opt, Metric metric);

std::vector<McEstimate> mc_outage_noma(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                       std::int64_t trials, std::uint64_t seed);
std::vector<McEstimate> mc_ergodic_noma(const NetworkConfig& cfg, const ChannelStats& stats, double rho,
                                        std::int64_t trials, std::uint64_t seed);
McEstimate mc_oma(const NetworkConfig& cfg, const ChannelStats& stats, double rho, std::int64_t trials,
                  std::uint64_t seed, Metric metric);

enum class BaselineScheme { af_variable_gain, df_fd, df_hd };

std::string to_string(BaselineScheme s);
BaselineScheme parse_baseline_scheme(const std::string& s);

/// Two-hop relay with exponential per-hop gains.
struct BaselineConfig {
    BaselineScheme scheme = BaselineScheme::af_variable_gain;
    double omega_li = -1.0; // loop interference, linear; negative = not configured
    double omega1 = 1.0;
    double omega2 = 1.0;
    double target_rate = 4.2;
};

/// AF and HD DF carry a 1/2 prelog; FD DF runs at full rate with loop
/// interference on the first hop. Throws ConfigError for FD without omega_li.
std::vector<McEstimate> baseline(const BaselineConfig& bc, const std::vector<double>& rhos, const McOptions& opt,
                                 Metric metric);
McEstimate mc_baseline(const BaselineConfig& bc, double rho, std::int64_t trials, std::uint64_t seed,
                       Metric metric);

/// Proportion estimate with binomial standard error; Wilson interval below 1e-3.
McEstimate proportion_estimate(std::int64_t hits, std::int64_t trials);

/// Trials needed to estimate p to the given relative standard error.
std::int64_t trials_for_relative_precision(double p, double relative = 0.1);

} // namespace irsnoma::mc
