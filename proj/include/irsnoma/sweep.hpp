#pragma once

#include "irsnoma/analytic.hpp"
#include "irsnoma/montecarlo.hpp"
#include "irsnoma/system_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace irsnoma::sweep {

enum class Experiment { outage_sweep, ergodic_sweep, distance_sweep, power_grid, energy_sweep, validate };
enum class Method { analytic, asymptotic, bound, mc, z };
enum class ThroughputMode { delay_limited, delay_tolerant };
enum class Format { csv, json };

std::string to_string(Experiment e);
std::string to_string(Method m);
std::string to_string(ThroughputMode m);
Experiment parse_experiment(const std::string& s);
Method parse_method(const std::string& s);
ThroughputMode parse_throughput_mode(const std::string& s);
Format parse_format(const std::string& s);

/// Scheme names: irs-noma-ipsic, irs-noma-psic, irs-oma, af, df-fd, df-hd.
bool is_known_scheme(const std::string& s);

struct SweepSpec {
    std::optional<Experiment> experiment;
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
    std::vector<double> sweep_values; // d_sr for distance-sweep, a_theta for power-grid
    std::vector<std::string> schemes;  // empty: NOMA under the configured SIC plus OMA
    std::vector<Method> methods{Method::analytic, Method::asymptotic, Method::mc};
    std::vector<mc::Metric> metrics{mc::Metric::outage, mc::Metric::ergodic}; // validate only
    std::string output_path;
    Format format = Format::csv;
    std::int64_t trials = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;
    int laguerre_order = analytic::kDefaultLaguerreOrder;
    int chebyshev_order = analytic::kDefaultChebyshevOrder;
    double tol = analytic::kDefaultTol;
    double loop_interference = 0.1; // linear
    ThroughputMode mode = ThroughputMode::delay_limited;
    bool power_tied_to_snr = false;
    double noise_dbw = -30.0; // only with power_tied_to_snr: P_S = rho * noise
    double z_threshold = 3.0;
    double max_breach_fraction = 0.01;
};

struct Scenario {
    NetworkConfig network;
    SweepSpec spec;
    analytic::EnergyModel energy;
};

/// YAML scenario. Missing keys take the reference defaults; unknown keys,
/// bad values and broken invariants throw ConfigError naming the key.
Scenario parse_config(const std::string& text);
Scenario load_config(const std::string& path);

/// Final checks after command-line overrides.
void validate(const Scenario& sc);

struct Row {
    std::string scheme;
    int user = 0;
    std::string metric;
    std::string method;
    double snr_db = 0.0;
    std::optional<double> sweep_var;
    std::optional<double> value;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    std::string error;
};

using Table = std::vector<Row>;

struct RunReport {
    Table rows;
    std::vector<std::string> warnings;
    int failed_points = 0;
    int z_checked = 0;
    int z_breaches = 0;

    bool validation_breached(const SweepSpec& spec) const;
};

RunReport run_sweep(const Scenario& sc);

/// Orders by scheme, user, metric, method, sweep_var, snr_db.
void sort_rows(Table& t);

std::string format_csv(const Table& t);
std::string format_json(const Table& t);
Table parse_csv(const std::string& text);

/// Writes the table; throws DomainError for an empty table (nothing is
/// created) and std::runtime_error when the path cannot be written.
void emit(const Table& t, Format format, const std::string& path);

} // namespace irsnoma::sweep
