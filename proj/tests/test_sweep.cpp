#include "doctest.h"

#include "irsnoma/errors.hpp"
#include "irsnoma/sweep.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace irsnoma;
using namespace irsnoma::sweep;

namespace {

std::string config_error_key(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key() + ": " + e.what();
    }
    return "";
}

Scenario small(const std::string& text)
{
    auto sc = parse_config(text);
    sc.spec.trials = 20000;
    return sc;
}

} // namespace

TEST_CASE("empty config gives the reference scenario")
{
    const auto sc = parse_config("");
    const auto ref = NetworkConfig::reference();
    CHECK(sc.network.num_users == 3);
    CHECK(sc.network.power_alloc == ref.power_alloc);
    CHECK(sc.network.target_rates == ref.target_rates);
    CHECK(sc.network.d_rm == ref.d_rm);
    CHECK(sc.network.d_sr == 0.5);
    CHECK(sc.network.pathloss_exponent == 2.0);
    CHECK(sc.spec.trials == 1000000);
    CHECK(sc.network.oma_rate == doctest::Approx(4.2));
    CHECK_FALSE(sc.spec.experiment.has_value());
    CHECK(sc.energy.kappa == 1.2);
    CHECK(parse_config("# only a comment\n").network.num_users == 3);
}

TEST_CASE("configuration errors name the key")
{
    const auto k = config_error_key("network:\n  elements: 3\n  partition: 2\n  group_size: 2\n");
    CHECK(k.find("K must equal P*Q") != std::string::npos);

    const auto a = config_error_key("network:\n  users: 2\n  power_alloc: [0.3, 0.7]\n  target_rates: [0.1, 0.4]\n"
                                    "  d_rm: [0.5, 0.4]\n");
    CHECK(a.rfind("power_alloc", 0) == 0);
    CHECK(a.find("a_1 >= a_2") != std::string::npos);

    CHECK(config_error_key("network:\n  element: 2\n").rfind("network.element", 0) == 0);
    CHECK(config_error_key("sweep:\n  snr_db: [10, 5]\n").rfind("sweep.snr_db", 0) == 0);
    CHECK(config_error_key("sweep:\n  schemes: [noma]\n").rfind("sweep.schemes", 0) == 0);
    CHECK(config_error_key("sweep:\n  trials: lots\n").rfind("sweep.trials", 0) == 0);
    CHECK(config_error_key("network: [1, 2\n").rfind("line ", 0) == 0);
    CHECK(config_error_key("experiment: plot\n").rfind("experiment", 0) == 0);
    CHECK(config_error_key("experiment: power-grid\nsweep:\n  values: [0.1, 0.2]\n").rfind("network.users", 0) == 0);
    CHECK(config_error_key("experiment: distance-sweep\nsweep:\n  values: [0.0, 0.5]\n").rfind("sweep.values", 0) ==
          0);
    CHECK_THROWS_AS(load_config("/nonexistent/scenario.yaml"), ConfigError);
}

TEST_CASE("grids and overrides")
{
    const auto sc = parse_config("network:\n  target_rates: [0.6, 0.6, 0.6]\n  residual_interference_db: -20\n"
                                 "sweep:\n  snr_db: {start: 10, stop: 40, step: 5}\n"
                                 "quadrature: {laguerre: 40, chebyshev: 25, tol: 1e-9}\n");
    CHECK(sc.spec.snr_db == std::vector<double>{10, 15, 20, 25, 30, 35, 40});
    CHECK(sc.network.oma_rate == doctest::Approx(1.8));
    CHECK(sc.network.residual_interference == doctest::Approx(0.01));
    CHECK(sc.spec.laguerre_order == 40);
    CHECK(sc.spec.chebyshev_order == 25);
    CHECK(sc.spec.tol == 1e-9);
    CHECK(parse_config("sweep:\n  snr_db: {start: 0, stop: 1, step: 0.1}\n").spec.snr_db.size() == 11);
}

TEST_CASE("emit")
{
    const auto dir = std::filesystem::temp_directory_path() / "irsnoma_emit_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "empty.csv").string();
    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit({}, Format::csv, path), DomainError);
    CHECK_FALSE(std::filesystem::exists(path));

    Row r;
    r.scheme = "irs-oma";
    r.metric = "outage";
    r.method = "analytic";
    r.snr_db = 20;
    r.value = 0.0123456789123;
    const auto csv = format_csv({r});
    CHECK(csv == "scheme,user,metric,method,snr_db,sweep_var,value,ci_lo,ci_hi,trials,seed,error\n"
                 "irs-oma,0,outage,analytic,2.00000000e+01,,1.23456789e-02,,,,,\n");

    CHECK_THROWS(emit({r}, Format::csv, (dir / "missing" / "x.csv").string()));

    Row m = r;
    m.method = "mc";
    m.user = 2;
    m.sweep_var = 0.35;
    m.value = 1.0 / 3.0;
    m.ci_lo = 0.3;
    m.ci_hi = 0.36;
    m.trials = 1000000;
    m.seed = 42;
    Row e = r;
    e.value.reset();
    e.error = "integrator: no convergence, \"tail\"";
    const Table t{r, m, e};
    const auto back = parse_csv(format_csv(t));
    REQUIRE(back.size() == 3);
    CHECK(format_csv(back) == format_csv(t));
    CHECK(*back[1].value == std::stod("3.33333333e-01"));
    CHECK(*back[1].trials == 1000000);
    CHECK(back[2].error == e.error);
    CHECK_FALSE(back[2].value.has_value());

    const auto j = nlohmann::json::parse(format_json(t));
    REQUIRE(j.size() == 3);
    CHECK(j[0]["ci_lo"].is_null());
    CHECK(j[0]["trials"].is_null());
    CHECK(j[1]["seed"] == 42);
    CHECK(j[1]["value"].get<double>() == *back[1].value);
    CHECK(j[2]["value"].is_null());
    CHECK(j[2]["error"] == e.error);

    const auto out = (dir / "t.json").string();
    emit(t, Format::json, out);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == format_json(t));
    std::filesystem::remove_all(dir);
}

TEST_CASE("outage sweep composes every scheme")
{
    auto sc = small("sweep:\n  snr_db: [10, 20]\n  schemes: [irs-noma-psic, irs-oma, af, df-fd, df-hd]\n");
    sc.spec.experiment = Experiment::outage_sweep;
    const auto rep = run_sweep(sc);
    CHECK(rep.failed_points == 0);
    std::set<std::tuple<std::string, int, std::string>> seen;
    for (const auto& r : rep.rows) {
        seen.insert({r.scheme, r.user, r.method});
        CHECK(r.value.has_value());
        if (r.method == "mc") {
            CHECK(r.trials.has_value());
            CHECK(*r.ci_lo <= *r.value);
        } else {
            CHECK_FALSE(r.trials.has_value());
        }
    }
    for (int m = 1; m <= 3; ++m) {
        for (const char* method : {"analytic", "asymptotic", "mc"}) {
            CHECK(seen.count({"irs-noma-psic", m, method}) == 1);
        }
    }
    CHECK(seen.count({"irs-oma", 0, "analytic"}) == 1);
    CHECK(seen.count({"af", 0, "mc"}) == 1);
    CHECK(seen.count({"df-fd", 0, "mc"}) == 1);
    CHECK(seen.count({"df-hd", 0, "mc"}) == 1);
    CHECK(seen.count({"af", 0, "analytic"}) == 0);
    // 3 users x 3 methods + oma x 3 methods + 3 relays, two SNRs each
    CHECK(rep.rows.size() == 2 * (9 + 3 + 3));

    auto sorted = rep.rows;
    sort_rows(sorted);
    CHECK(format_csv(sorted) == format_csv(rep.rows));
}

TEST_CASE("reruns are byte-identical")
{
    auto sc = small("sweep:\n  snr_db: [0, 15, 30]\n  schemes: [irs-noma-ipsic, irs-oma, df-fd]\n");
    sc.spec.experiment = Experiment::outage_sweep;
    sc.spec.threads = 1;
    const auto a = format_csv(run_sweep(sc).rows);
    sc.spec.threads = 4;
    const auto b = format_csv(run_sweep(sc).rows);
    CHECK(a == b);
    sc.spec.seed = 2;
    CHECK(format_csv(run_sweep(sc).rows) != a);
}

TEST_CASE("ergodic sweep methods")
{
    auto sc = small("sweep:\n  snr_db: [10, 30]\n  schemes: [irs-noma-psic, irs-noma-ipsic]\n"
                    "  methods: [analytic, asymptotic, bound, mc]\n");
    sc.spec.experiment = Experiment::ergodic_sweep;
    const auto rep = run_sweep(sc);
    CHECK(rep.failed_points == 0);
    int bound = 0, ceiling = 0, ipsic_analytic = 0;
    for (const auto& r : rep.rows) {
        bound += r.method == "bound";
        ceiling += r.method == "asymptotic";
        ipsic_analytic += r.scheme == "irs-noma-ipsic" && r.method != "mc";
        if (r.method == "bound") {
            CHECK(r.user == 3);
        }
    }
    CHECK(bound == 2);
    CHECK(ceiling == 4);
    CHECK(ipsic_analytic == 0);
}

TEST_CASE("distance sweep peaks inside the interval")
{
    auto sc = small("experiment: distance-sweep\nnetwork:\n  elements: 2\n  group_size: 2\n"
                    "  target_rates: [0.6, 0.6, 0.6]\n"
                    "sweep:\n  snr_db: [20]\n  values: {start: 0.1, stop: 0.9, step: 0.1}\n"
                    "  schemes: [irs-noma-psic]\n  methods: [analytic]\n");
    const auto rep = run_sweep(sc);
    for (int m = 1; m <= 3; ++m) {
        double best = -1.0, at = 0.0;
        for (const auto& r : rep.rows) {
            if (r.user == m && *r.value > best) {
                best = *r.value;
                at = *r.sweep_var;
            }
        }
        CHECK(at > 0.1 + 1e-9);
        CHECK(at < 0.9 - 1e-9);
    }
}

TEST_CASE("power grid")
{
    auto sc = small("experiment: power-grid\nnetwork:\n  users: 2\n  power_alloc: [0.7, 0.3]\n"
                    "  target_rates: [0.1, 0.4]\n  d_rm: [0.5, 0.4]\n"
                    "sweep:\n  snr_db: [20]\n  values: [0.0, 0.2, 0.5, 0.8, 1.0]\n  methods: [analytic, mc]\n");
    const auto rep = run_sweep(sc);
    CHECK(rep.failed_points == 0);
    for (const auto& r : rep.rows) {
        REQUIRE(r.sweep_var.has_value());
        // the user left without power is certain to fail
        if (r.method == "analytic" && *r.sweep_var == 0.0) {
            if (r.user == 2) {
                CHECK(*r.value == 1.0);
            }
            if (r.user == 1) {
                CHECK(*r.value < 0.01);
            }
        }
        if (r.method == "analytic" && *r.sweep_var == 1.0 && r.user == 1) {
            CHECK(*r.value == 1.0);
        }
        if (r.method == "analytic" && *r.sweep_var == 0.2) {
            CHECK(*r.value < 0.1);
        }
    }
}

TEST_CASE("energy sweep")
{
    auto sc = small("experiment: energy-sweep\nnetwork:\n  elements: 2\n  group_size: 2\n"
                    "sweep:\n  snr_db: [20, 30]\n  schemes: [irs-noma-psic, irs-oma, af]\n"
                    "energy: {mode: delay-limited, kappa: 1.2, p_s_dbw: 5, p_bs_dbw: 2, p_k_dbm: 10, p_ue_dbm: 10}\n");
    const auto rep = run_sweep(sc);
    CHECK(rep.failed_points == 0);
    std::map<std::tuple<std::string, std::string, double>, double> v;
    for (const auto& r : rep.rows) {
        if (r.metric == "energy-efficiency") {
            v[{r.scheme, r.method, r.snr_db}] = *r.value;
        }
    }
    const double power = 1.2 * std::pow(10.0, 0.5) + std::pow(10.0, 0.2) + 2 * 0.01 + 3 * 0.01;
    CHECK(v.size() == 10);
    for (const auto& [k, ee] : v) {
        CHECK(ee > 0.0);
        CHECK(ee <= 4.2 / power + 1e-12);
    }
    CHECK(v[{"irs-noma-psic", "analytic", 30.0}] >= v[{"irs-oma", "analytic", 30.0}]);
    CHECK(v[{"irs-oma", "analytic", 30.0}] > v[{"af", "mc", 30.0}]);
}

TEST_CASE("validate emits z scores")
{
    auto sc = small("experiment: validate\nsweep:\n  snr_db: [5, 15, 25]\n  schemes: [irs-noma-psic, irs-oma]\n");
    sc.spec.trials = 200000;
    const auto rep = run_sweep(sc);
    CHECK(rep.failed_points == 0);
    CHECK(rep.z_checked > 10);
    CHECK_FALSE(rep.validation_breached(sc.spec));
    int z = 0;
    for (const auto& r : rep.rows) {
        if (r.method == "z") {
            ++z;
            CHECK(std::abs(*r.value) < 6.0);
        }
    }
    CHECK(z == rep.z_checked);
}
