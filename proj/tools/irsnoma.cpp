// irsnoma <experiment> --config <path> [options]
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
// 4 validate found too many |z| above threshold.

#include "irsnoma/errors.hpp"
#include "irsnoma/sweep.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace irsnoma;

int main(int argc, char** argv)
{
    CLI::App app{"IRS-assisted NOMA outage, rate and energy sweeps"};

    std::string experiment;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> ordering;
    std::optional<int> quad_u;
    std::optional<int> quad_n;
    std::optional<double> tol;

    app.add_option("experiment", experiment,
                   "outage-sweep | ergodic-sweep | distance-sweep | power-grid | energy-sweep | validate")
        ->required();
    app.add_option("--config", config_path, "YAML scenario file")->required();
    app.add_option("--out", out, "output path, '-' for stdout");
    app.add_option("--format", format, "csv or json");
    app.add_option("--trials", trials, "Monte-Carlo trials per point");
    app.add_option("--seed", seed, "Monte-Carlo seed");
    app.add_option("--ordering", ordering, "per-column or effective-gain");
    app.add_option("--quad-u", quad_u, "Gauss-Laguerre order");
    app.add_option("--quad-n", quad_n, "Gauss-Chebyshev order");
    app.add_option("--tol", tol, "relative tolerance of the adaptive integrals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    sweep::RunReport report;
    sweep::Scenario sc;
    try {
        sc = sweep::load_config(config_path);
        const auto exp = sweep::parse_experiment(experiment);
        if (sc.spec.experiment && *sc.spec.experiment != exp) {
            throw ConfigError("experiment", "config is written for " + sweep::to_string(*sc.spec.experiment) +
                                                ", not " + experiment);
        }
        sc.spec.experiment = exp;
        if (out) {
            sc.spec.output_path = *out;
        }
        if (format) {
            sc.spec.format = sweep::parse_format(*format);
        }
        if (trials) {
            sc.spec.trials = *trials;
        }
        if (seed) {
            sc.spec.seed = *seed;
        }
        if (ordering) {
            sc.network.ordering = parse_ordering_mode(*ordering);
        }
        if (quad_u) {
            sc.spec.laguerre_order = *quad_u;
        }
        if (quad_n) {
            sc.spec.chebyshev_order = *quad_n;
        }
        if (tol) {
            sc.spec.tol = *tol;
        }
        sweep::validate(sc);
    } catch (const ConfigError& e) {
        std::cerr << "config error [" << e.key() << "]: " << e.what() << "\n";
        return 2;
    }

    try {
        report = sweep::run_sweep(sc);
        sweep::emit(report.rows, sc.spec.format, sc.spec.output_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error [" << e.key() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    if (report.failed_points > 0) {
        std::cerr << report.failed_points << " point(s) failed, see the error column\n";
        return 3;
    }
    if (*sc.spec.experiment == sweep::Experiment::validate) {
        std::cerr << "validate: " << report.z_breaches << " of " << report.z_checked << " points with |z| > "
                  << sc.spec.z_threshold << "\n";
        if (report.validation_breached(sc.spec)) {
            return 4;
        }
    }
    return 0;
}
