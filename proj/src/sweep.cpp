#include "irsnoma/sweep.hpp"

#include "irsnoma/errors.hpp"
#include "irsnoma/quadrature.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <tuple>

namespace irsnoma::sweep {

namespace {

const std::vector<std::string> kSchemes{"irs-noma-ipsic", "irs-noma-psic", "irs-oma", "af", "df-fd", "df-hd"};

template <class E>
E lookup(const std::vector<std::pair<const char*, E>>& table, const std::string& s, const char* key)
{
    std::string names;
    for (const auto& [name, value] : table) {
        if (s == name) {
            return value;
        }
        names += names.empty() ? "" : ", ";
        names += name;
    }
    throw ConfigError(key, std::string(key) + " must be one of " + names + ", got '" + s + "'");
}

const std::vector<std::pair<const char*, Experiment>> kExperiments{
    {"outage-sweep", Experiment::outage_sweep}, {"ergodic-sweep", Experiment::ergodic_sweep},
    {"distance-sweep", Experiment::distance_sweep}, {"power-grid", Experiment::power_grid},
    {"energy-sweep", Experiment::energy_sweep}, {"validate", Experiment::validate}};

const std::vector<std::pair<const char*, Method>> kMethods{{"analytic", Method::analytic},
                                                           {"asymptotic", Method::asymptotic},
                                                           {"bound", Method::bound},
                                                           {"mc", Method::mc},
                                                           {"z", Method::z}};

const std::vector<std::pair<const char*, ThroughputMode>> kModes{{"delay-limited", ThroughputMode::delay_limited},
                                                                 {"delay-tolerant", ThroughputMode::delay_tolerant}};

} // namespace

std::string to_string(Experiment e)
{
    for (const auto& [name, value] : kExperiments) {
        if (value == e) {
            return name;
        }
    }
    return "?";
}

std::string to_string(Method m)
{
    for (const auto& [name, value] : kMethods) {
        if (value == m) {
            return name;
        }
    }
    return "?";
}

std::string to_string(ThroughputMode m) { return m == ThroughputMode::delay_limited ? "delay-limited" : "delay-tolerant"; }

Experiment parse_experiment(const std::string& s) { return lookup(kExperiments, s, "experiment"); }
Method parse_method(const std::string& s) { return lookup(kMethods, s, "methods"); }
ThroughputMode parse_throughput_mode(const std::string& s) { return lookup(kModes, s, "energy.mode"); }

Format parse_format(const std::string& s)
{
    return lookup<Format>({{"csv", Format::csv}, {"json", Format::json}}, s, "format");
}

bool is_known_scheme(const std::string& s) { return std::find(kSchemes.begin(), kSchemes.end(), s) != kSchemes.end(); }

// ---- configuration ---------------------------------------------------------

namespace {

std::string line_of(const YAML::Node& n)
{
    const auto m = n.Mark();
    return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

void allow_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!node.IsMap()) {
        throw ConfigError(where, where + " must be a mapping" + line_of(node));
    }
    for (const auto& kv : node) {
        const auto k = kv.first.as<std::string>();
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
            const std::string full = where.empty() ? k : where + "." + k;
            throw ConfigError(full, "unknown key '" + full + "'" + line_of(kv.first));
        }
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key)
{
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key, "bad value for '" + key + "'" + line_of(n));
    }
}

template <class T>
void read(const YAML::Node& parent, const char* name, const std::string& where, T& out)
{
    if (const auto n = parent[name]) {
        out = get<T>(n, where.empty() ? name : where + "." + name);
    }
}

// A list, or {start, stop, step} end-inclusive.
std::vector<double> read_grid(const YAML::Node& n, const std::string& key)
{
    if (n.IsSequence()) {
        return get<std::vector<double>>(n, key);
    }
    if (n.IsScalar()) {
        return {get<double>(n, key)};
    }
    allow_keys(n, key, {"start", "stop", "step"});
    if (!n["start"] || !n["stop"] || !n["step"]) {
        throw ConfigError(key, key + " range needs start, stop and step" + line_of(n));
    }
    const double start = get<double>(n["start"], key + ".start");
    const double stop = get<double>(n["stop"], key + ".stop");
    const double step = get<double>(n["step"], key + ".step");
    if (!(step > 0.0) || !(stop >= start)) {
        throw ConfigError(key, key + " range needs step > 0 and stop >= start");
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) {
        throw ConfigError(key, key + " range is too long");
    }
    std::vector<double> out;
    for (long i = 0; i < count; ++i) {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

void check_grid(const std::vector<double>& g, const std::string& key)
{
    if (g.empty()) {
        throw ConfigError(key, key + " must not be empty");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i])) {
            throw ConfigError(key, key + " entries must be finite");
        }
        if (i > 0 && !(g[i] > g[i - 1])) {
            throw ConfigError(key, key + " must be strictly increasing");
        }
    }
}

} // namespace

Scenario parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1), std::string("parse error: ") + e.what());
    }

    Scenario sc;
    sc.network = NetworkConfig::reference();
    auto& net = sc.network;
    auto& sp = sc.spec;
    double kappa = 1.2, ps = 5.0, pbs = 2.0, pk = 10.0, pue = 10.0;

    if (root.IsNull()) {
        sc.energy = analytic::EnergyModel::from_db(kappa, ps, pbs, pk, pue, net.num_users);
        validate(sc);
        return sc;
    }
    allow_keys(root, "", {"experiment", "network", "sweep", "quadrature", "baseline", "energy", "validate", "output"});

    if (const auto n = root["experiment"]) {
        sp.experiment = parse_experiment(get<std::string>(n, "experiment"));
    }

    bool oma_given = false;
    if (const auto n = root["network"]) {
        allow_keys(n, "network",
                   {"users", "elements", "partition", "group_size", "power_alloc", "target_rates", "oma_rate",
                    "pathloss_exponent", "d_sr", "d_rm", "d_rd", "residual_interference_db", "sic", "ordering",
                    "channel"});
        read(n, "users", "network", net.num_users);
        read(n, "elements", "network", net.elements);
        read(n, "partition", "network", net.partition);
        read(n, "group_size", "network", net.group_size);
        read(n, "power_alloc", "network", net.power_alloc);
        read(n, "target_rates", "network", net.target_rates);
        oma_given = static_cast<bool>(n["oma_rate"]);
        read(n, "oma_rate", "network", net.oma_rate);
        read(n, "pathloss_exponent", "network", net.pathloss_exponent);
        read(n, "d_sr", "network", net.d_sr);
        read(n, "d_rm", "network", net.d_rm);
        read(n, "d_rd", "network", net.d_rd);
        if (const auto r = n["residual_interference_db"]) {
            net.residual_interference = db_to_linear(get<double>(r, "network.residual_interference_db"));
        }
        if (const auto s = n["sic"]) {
            net.sic = parse_sic_mode(get<std::string>(s, "network.sic"));
        }
        if (const auto s = n["ordering"]) {
            net.ordering = parse_ordering_mode(get<std::string>(s, "network.ordering"));
        }
        if (const auto s = n["channel"]) {
            net.channel = parse_channel_model(get<std::string>(s, "network.channel"));
        }
        // the orthogonal user carries the sum of the NOMA rates unless told otherwise
        if (!oma_given && n["target_rates"]) {
            net.oma_rate = 0.0;
            for (double r : net.target_rates) {
                net.oma_rate += r;
            }
        }
    }

    if (const auto n = root["sweep"]) {
        allow_keys(n, "sweep", {"snr_db", "values", "schemes", "methods", "metrics", "trials", "seed", "threads"});
        if (const auto g = n["snr_db"]) {
            sp.snr_db = read_grid(g, "sweep.snr_db");
        }
        if (const auto g = n["values"]) {
            sp.sweep_values = read_grid(g, "sweep.values");
        }
        read(n, "schemes", "sweep", sp.schemes);
        if (const auto m = n["methods"]) {
            sp.methods.clear();
            for (const auto& s : get<std::vector<std::string>>(m, "sweep.methods")) {
                sp.methods.push_back(parse_method(s));
            }
        }
        if (const auto m = n["metrics"]) {
            sp.metrics.clear();
            for (const auto& s : get<std::vector<std::string>>(m, "sweep.metrics")) {
                if (s == "outage") {
                    sp.metrics.push_back(mc::Metric::outage);
                } else if (s == "ergodic") {
                    sp.metrics.push_back(mc::Metric::ergodic);
                } else {
                    throw ConfigError("sweep.metrics", "metrics must be outage or ergodic, got '" + s + "'");
                }
            }
        }
        read(n, "trials", "sweep", sp.trials);
        read(n, "seed", "sweep", sp.seed);
        read(n, "threads", "sweep", sp.threads);
    }

    if (const auto n = root["quadrature"]) {
        allow_keys(n, "quadrature", {"laguerre", "chebyshev", "tol"});
        read(n, "laguerre", "quadrature", sp.laguerre_order);
        read(n, "chebyshev", "quadrature", sp.chebyshev_order);
        read(n, "tol", "quadrature", sp.tol);
    }

    if (const auto n = root["baseline"]) {
        allow_keys(n, "baseline", {"loop_interference_db"});
        if (const auto li = n["loop_interference_db"]) {
            sp.loop_interference = db_to_linear(get<double>(li, "baseline.loop_interference_db"));
        }
    }

    if (const auto n = root["energy"]) {
        allow_keys(n, "energy",
                   {"mode", "kappa", "p_s_dbw", "p_bs_dbw", "p_k_dbm", "p_ue_dbm", "power_tied_to_snr", "noise_dbw"});
        if (const auto m = n["mode"]) {
            sp.mode = parse_throughput_mode(get<std::string>(m, "energy.mode"));
        }
        read(n, "kappa", "energy", kappa);
        read(n, "p_s_dbw", "energy", ps);
        read(n, "p_bs_dbw", "energy", pbs);
        read(n, "p_k_dbm", "energy", pk);
        read(n, "p_ue_dbm", "energy", pue);
        read(n, "power_tied_to_snr", "energy", sp.power_tied_to_snr);
        read(n, "noise_dbw", "energy", sp.noise_dbw);
    }

    if (const auto n = root["validate"]) {
        allow_keys(n, "validate", {"z_threshold", "max_breach_fraction"});
        read(n, "z_threshold", "validate", sp.z_threshold);
        read(n, "max_breach_fraction", "validate", sp.max_breach_fraction);
    }

    if (const auto n = root["output"]) {
        allow_keys(n, "output", {"path", "format"});
        read(n, "path", "output", sp.output_path);
        if (const auto f = n["format"]) {
            sp.format = parse_format(get<std::string>(f, "output.format"));
        }
    }

    if (!(kappa > 0.0)) {
        throw ConfigError("energy.kappa", "kappa must be positive");
    }
    if (net.num_users < 1) {
        throw ConfigError("network.users", "users must be at least 1");
    }
    sc.energy = analytic::EnergyModel::from_db(kappa, ps, pbs, pk, pue, net.num_users);
    validate(sc);
    return sc;
}

Scenario load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const Scenario& sc)
{
    const auto& sp = sc.spec;
    const bool grid = sp.experiment == Experiment::power_grid;
    check_grid(sp.snr_db, "sweep.snr_db");
    if (sp.experiment == Experiment::distance_sweep || grid) {
        check_grid(sp.sweep_values, "sweep.values");
    }
    if (grid) {
        if (sc.network.num_users != 2) {
            throw ConfigError("network.users", "power-grid needs a two-user network");
        }
        // the grid owns the allocation
        auto cfg = sc.network;
        cfg.power_alloc = {1.0 - sp.sweep_values.front(), sp.sweep_values.front()};
        cfg.validate(false);
    } else {
        sc.network.validate(true);
    }
    if (sp.experiment == Experiment::distance_sweep || grid) {
        for (double v : sp.sweep_values) {
            if (grid && (v < 0.0 || v > 1.0)) {
                throw ConfigError("sweep.values", "a_theta must lie in [0, 1]");
            }
            if (!grid && (v <= 0.0 || v >= 1.0)) {
                throw ConfigError("sweep.values", "d_sr must lie strictly between 0 and 1");
            }
        }
    }
    for (const auto& s : sp.schemes) {
        if (!is_known_scheme(s)) {
            throw ConfigError("sweep.schemes", "unknown scheme '" + s + "'");
        }
    }
    if (sp.methods.empty()) {
        throw ConfigError("sweep.methods", "methods must not be empty");
    }
    if (sp.experiment == Experiment::validate && sp.metrics.empty()) {
        throw ConfigError("sweep.metrics", "metrics must not be empty");
    }
    if (sp.trials < 1) {
        throw ConfigError("sweep.trials", "trials must be at least 1");
    }
    if (sp.threads < 0) {
        throw ConfigError("sweep.threads", "threads must be non-negative");
    }
    if (sp.laguerre_order < 1 || sp.laguerre_order > 200) {
        throw ConfigError("quadrature.laguerre", "laguerre order must be in 1..200");
    }
    if (sp.chebyshev_order < 1 || sp.chebyshev_order > 1000) {
        throw ConfigError("quadrature.chebyshev", "chebyshev order must be in 1..1000");
    }
    if (!(sp.tol > 0.0 && sp.tol < 1.0)) {
        throw ConfigError("quadrature.tol", "tol must be in (0, 1)");
    }
    if (!(sp.loop_interference >= 0.0)) {
        throw ConfigError("baseline.loop_interference_db", "loop interference must be non-negative");
    }
    if (!(sp.z_threshold > 0.0) || !(sp.max_breach_fraction >= 0.0)) {
        throw ConfigError("validate", "z_threshold must be positive and max_breach_fraction non-negative");
    }
}

// ---- orchestration ---------------------------------------------------------

bool RunReport::validation_breached(const SweepSpec& spec) const
{
    return z_breaches > spec.max_breach_fraction * z_checked;
}

namespace {

bool is_noma(const std::string& s) { return s.rfind("irs-noma-", 0) == 0; }
bool is_relay(const std::string& s) { return s == "af" || s == "df-fd" || s == "df-hd"; }

class Runner {
public:
    Runner(const Scenario& sc)
        : sc_(sc), sp_(sc.spec), lag_(quad::gauss_laguerre(sp_.laguerre_order)),
          cheb_(quad::gauss_chebyshev(sp_.chebyshev_order))
    {
        for (auto m : sp_.methods) {
            methods_.insert(m);
        }
        schemes_ = sp_.schemes;
        if (schemes_.empty()) {
            schemes_.push_back(std::string("irs-noma-") + to_string(sc.network.sic));
            if (sp_.experiment != Experiment::power_grid) {
                schemes_.push_back("irs-oma");
            }
        }
    }

    RunReport run()
    {
        const auto exp = sp_.experiment.value_or(Experiment::outage_sweep);
        for (const auto& scheme : schemes_) {
            switch (exp) {
            case Experiment::outage_sweep:
                outage(scheme, sc_.network, std::nullopt);
                break;
            case Experiment::ergodic_sweep:
                ergodic(scheme, sc_.network);
                break;
            case Experiment::distance_sweep:
                for (double d : sp_.sweep_values) {
                    auto cfg = sc_.network;
                    cfg.d_sr = d;
                    std::fill(cfg.d_rm.begin(), cfg.d_rm.end(), 1.0 - d);
                    cfg.d_rd = 1.0 - d;
                    outage(scheme, cfg, d);
                }
                break;
            case Experiment::power_grid:
                for (double t : sp_.sweep_values) {
                    auto cfg = sc_.network;
                    cfg.power_alloc = {1.0 - t, t};
                    outage(scheme, cfg, t);
                }
                break;
            case Experiment::energy_sweep:
                energy(scheme);
                break;
            case Experiment::validate:
                validate_scheme(scheme);
                break;
            }
        }
        for (const auto& [key, need] : budget_) {
            rep_.warnings.push_back(key + ": analytic outage implies " + std::to_string(need) +
                                    " trials for 10% relative precision, running " + std::to_string(sp_.trials));
        }
        sort_rows(rep_.rows);
        return std::move(rep_);
    }

private:
    const Scenario& sc_;
    const SweepSpec& sp_;
    quad::QuadratureRule lag_;
    quad::QuadratureRule cheb_;
    std::set<Method> methods_;
    std::vector<std::string> schemes_;
    std::map<std::string, std::int64_t> budget_;
    RunReport rep_;

    bool want(Method m) const { return methods_.count(m) > 0; }

    mc::McOptions mc_options() const
    {
        mc::McOptions o;
        o.trials = sp_.trials;
        o.seed = sp_.seed;
        o.threads = sp_.threads;
        return o;
    }

    static NetworkConfig with_scheme(NetworkConfig cfg, const std::string& scheme)
    {
        if (scheme == "irs-noma-ipsic") {
            cfg.sic = SicMode::ipsic;
        } else if (scheme == "irs-noma-psic") {
            cfg.sic = SicMode::psic;
        }
        return cfg;
    }

    std::vector<double> rhos() const
    {
        std::vector<double> r;
        for (double db : sp_.snr_db) {
            r.push_back(db_to_linear(db));
        }
        return r;
    }

    Row base(const std::string& scheme, int user, const std::string& metric, Method method, double snr_db,
             std::optional<double> sv) const
    {
        Row r;
        r.scheme = scheme;
        r.user = user;
        r.metric = metric;
        r.method = to_string(method);
        r.snr_db = snr_db;
        r.sweep_var = sv;
        return r;
    }

    void add_value(const std::string& scheme, int user, const std::string& metric, Method method, double snr_db,
                   std::optional<double> sv, double value)
    {
        auto r = base(scheme, user, metric, method, snr_db, sv);
        r.value = value;
        rep_.rows.push_back(std::move(r));
    }

    void add_error(const std::string& scheme, int user, const std::string& metric, Method method, double snr_db,
                   std::optional<double> sv, const std::string& what)
    {
        auto r = base(scheme, user, metric, method, snr_db, sv);
        r.error = what;
        rep_.rows.push_back(std::move(r));
        ++rep_.failed_points;
    }

    void add_mc(const mc::McEstimate& e, const std::string& metric, double snr_db, std::optional<double> sv)
    {
        auto r = base(e.scheme, e.user, metric, Method::mc, snr_db, sv);
        r.value = e.value;
        r.ci_lo = e.ci_lo;
        r.ci_hi = e.ci_hi;
        r.trials = e.trials;
        r.seed = e.seed;
        rep_.rows.push_back(std::move(r));
    }

    // Evaluates fn per SNR point; failures go to the error column.
    void per_point(const std::string& scheme, const std::vector<int>& users, const std::string& metric, Method method,
                   std::optional<double> sv, const std::function<std::vector<double>(double)>& fn)
    {
        for (double db : sp_.snr_db) {
            try {
                const auto v = fn(db_to_linear(db));
                for (std::size_t i = 0; i < users.size(); ++i) {
                    add_value(scheme, users[i], metric, method, db, sv, v[i]);
                }
            } catch (const std::exception& e) {
                for (int u : users) {
                    add_error(scheme, u, metric, method, db, sv, e.what());
                }
            }
        }
    }

    std::vector<int> ranks(const NetworkConfig& cfg) const
    {
        std::vector<int> u(cfg.num_users);
        for (int m = 1; m <= cfg.num_users; ++m) {
            u[m - 1] = m;
        }
        return u;
    }

    mc::BaselineConfig relay(const std::string& scheme, const NetworkConfig& cfg, const ChannelStats& st) const
    {
        mc::BaselineConfig b;
        b.scheme = mc::parse_baseline_scheme(scheme);
        b.omega_li = sp_.loop_interference;
        b.omega1 = st.omega_sr;
        b.omega2 = st.omega_rd;
        b.target_rate = cfg.oma_rate;
        return b;
    }

    void note_budget(const std::string& scheme, int user, double p)
    {
        if (!want(Method::mc) || !(p > 0.0) || p >= 1.0) {
            return;
        }
        const auto need = mc::trials_for_relative_precision(p);
        if (need > sp_.trials) {
            auto& slot = budget_[scheme + " user " + std::to_string(user)];
            slot = std::max(slot, need);
        }
    }

    template <class F>
    void mc_span(const std::string& scheme, const std::vector<int>& users, const std::string& metric,
                 std::optional<double> sv, F&& fn)
    {
        try {
            fn();
        } catch (const std::exception& e) {
            for (double db : sp_.snr_db) {
                for (int u : users) {
                    add_error(scheme, u, metric, Method::mc, db, sv, e.what());
                }
            }
        }
    }

    void outage(const std::string& scheme, const NetworkConfig& base_cfg, std::optional<double> sv)
    {
        const auto cfg = with_scheme(base_cfg, scheme);
        const auto st = derive_stats(cfg);
        const auto rho = rhos();
        const std::string metric = "outage";
        if (is_noma(scheme)) {
            const auto users = ranks(cfg);
            const bool ip = cfg.sic == SicMode::ipsic;
            if (want(Method::analytic)) {
                per_point(scheme, users, metric, Method::analytic, sv, [&](double r) {
                    auto o = ip ? analytic::outage_ipsic(cfg, st, r, lag_) : analytic::outage_psic(cfg, st, r);
                    for (int m : users) {
                        note_budget(scheme, m, o.p[m - 1]);
                    }
                    return o.p;
                });
            }
            if (want(Method::asymptotic)) {
                const auto v = ip ? analytic::AsymptoticVariant::ipsic_floor
                                  : (cfg.group_size == 1 ? analytic::AsymptoticVariant::psic_q1
                                                         : analytic::AsymptoticVariant::psic_q2);
                per_point(scheme, users, metric, Method::asymptotic, sv,
                          [&](double r) { return analytic::outage_asymptotic(cfg, st, r, v, lag_).p; });
            }
            if (want(Method::mc)) {
                mc_span(scheme, users, metric, sv, [&] {
                    const auto est = mc::outage_noma(cfg, st, rho, mc_options());
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        for (const auto& e : est[i]) {
                            add_mc(e, metric, sp_.snr_db[i], sv);
                        }
                    }
                });
            }
        } else if (scheme == "irs-oma") {
            if (want(Method::analytic)) {
                per_point(scheme, {0}, metric, Method::analytic, sv, [&](double r) {
                    auto o = analytic::outage_oma(cfg, st, r);
                    note_budget(scheme, 0, o.p[0]);
                    return o.p;
                });
            }
            if (want(Method::asymptotic)) {
                const auto v = cfg.group_size == 1 ? analytic::AsymptoticVariant::oma_q1
                                                   : analytic::AsymptoticVariant::oma_q2;
                per_point(scheme, {0}, metric, Method::asymptotic, sv,
                          [&](double r) { return analytic::outage_asymptotic(cfg, st, r, v).p; });
            }
            if (want(Method::mc)) {
                mc_span(scheme, {0}, metric, sv, [&] {
                    const auto est = mc::oma(cfg, st, rho, mc_options(), mc::Metric::outage);
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        add_mc(est[i], metric, sp_.snr_db[i], sv);
                    }
                });
            }
        } else if (want(Method::mc)) {
            mc_span(scheme, {0}, metric, sv, [&] {
                const auto est = mc::baseline(relay(scheme, cfg, st), rho, mc_options(), mc::Metric::outage);
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    add_mc(est[i], metric, sp_.snr_db[i], sv);
                }
            });
        }
    }

    void ergodic(const std::string& scheme, const NetworkConfig& base_cfg)
    {
        const auto cfg = with_scheme(base_cfg, scheme);
        const auto st = derive_stats(cfg);
        const auto rho = rhos();
        const std::string metric = "ergodic";
        const std::optional<double> sv;
        const int big_m = cfg.num_users;
        if (is_noma(scheme)) {
            const auto users = ranks(cfg);
            std::vector<int> weak(users.begin(), users.end() - 1);
            // closed forms exist only with perfect SIC
            if (cfg.sic == SicMode::psic) {
                if (want(Method::analytic)) {
                    per_point(scheme, weak, metric, Method::analytic, sv, [&](double r) {
                        std::vector<double> v;
                        for (int m : weak) {
                            v.push_back(analytic::ergodic_psic_m(cfg, st, r, m, cheb_).rate);
                        }
                        return v;
                    });
                    per_point(scheme, {big_m}, metric, Method::analytic, sv, [&](double r) {
                        return std::vector<double>{analytic::ergodic_psic_M(cfg, st, r, sp_.tol).rate};
                    });
                }
                if (want(Method::asymptotic)) {
                    per_point(scheme, weak, metric, Method::asymptotic, sv, [&](double) {
                        std::vector<double> v;
                        for (int m : weak) {
                            v.push_back(analytic::ergodic_ceiling(cfg, m).rate);
                        }
                        return v;
                    });
                }
                if (want(Method::bound)) {
                    std::optional<analytic::MthUserRateBound> bound;
                    per_point(scheme, {big_m}, metric, Method::bound, sv, [&](double r) {
                        if (!bound) {
                            bound.emplace(cfg, st, sp_.tol);
                        }
                        return std::vector<double>{bound->at(r).rate};
                    });
                }
            }
            if (want(Method::mc)) {
                mc_span(scheme, users, metric, sv, [&] {
                    const auto est = mc::ergodic_noma(cfg, st, rho, mc_options());
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        for (const auto& e : est[i]) {
                            add_mc(e, metric, sp_.snr_db[i], sv);
                        }
                    }
                });
            }
        } else if (scheme == "irs-oma") {
            if (want(Method::analytic)) {
                per_point(scheme, {0}, metric, Method::analytic, sv, [&](double r) {
                    return std::vector<double>{analytic::ergodic_oma(cfg, st, r, sp_.tol).rate};
                });
            }
            if (want(Method::mc)) {
                mc_span(scheme, {0}, metric, sv, [&] {
                    const auto est = mc::oma(cfg, st, rho, mc_options(), mc::Metric::ergodic);
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        add_mc(est[i], metric, sp_.snr_db[i], sv);
                    }
                });
            }
        } else if (want(Method::mc)) {
            mc_span(scheme, {0}, metric, sv, [&] {
                const auto est = mc::baseline(relay(scheme, cfg, st), rho, mc_options(), mc::Metric::ergodic);
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    add_mc(est[i], metric, sp_.snr_db[i], sv);
                }
            });
        }
    }

    // Total consumed power at one grid point. Relays are active: source and
    // relay each pay the amplifier and static draw, one terminal listens.
    double total_power(const std::string& scheme, double snr_db) const
    {
        auto e = sc_.energy;
        if (sp_.power_tied_to_snr) {
            e.p_s = analytic::dbw_to_watt(snr_db + sp_.noise_dbw);
        }
        if (is_relay(scheme)) {
            return 2.0 * (e.kappa * e.p_s + e.p_bs) + (e.p_ue.empty() ? 0.0 : e.p_ue.front());
        }
        return e.total_power(sc_.network.elements);
    }

    void add_energy(const std::string& scheme, Method method, double snr_db, double throughput,
                    std::optional<std::int64_t> trials)
    {
        const double power = total_power(scheme, snr_db);
        for (const char* metric : {"throughput", "energy-efficiency"}) {
            auto r = base(scheme, 0, metric, method, snr_db, std::nullopt);
            r.value = std::string(metric) == "throughput" ? throughput : throughput / power;
            if (trials) {
                r.trials = trials;
                r.seed = sp_.seed;
            }
            rep_.rows.push_back(std::move(r));
        }
    }

    void energy_error(const std::string& scheme, Method method, double snr_db, const std::string& what)
    {
        add_error(scheme, 0, "throughput", method, snr_db, std::nullopt, what);
        add_error(scheme, 0, "energy-efficiency", method, snr_db, std::nullopt, what);
    }

    void energy(const std::string& scheme)
    {
        const auto cfg = with_scheme(sc_.network, scheme);
        const auto st = derive_stats(cfg);
        const auto rho = rhos();
        const bool limited = sp_.mode == ThroughputMode::delay_limited;
        const auto& dbs = sp_.snr_db;

        if (want(Method::analytic) && !is_relay(scheme)) {
            for (std::size_t i = 0; i < rho.size(); ++i) {
                try {
                    double t = 0.0;
                    if (is_noma(scheme) && limited) {
                        const auto o = cfg.sic == SicMode::ipsic ? analytic::outage_ipsic(cfg, st, rho[i], lag_)
                                                                 : analytic::outage_psic(cfg, st, rho[i]);
                        t = analytic::throughput_delay_limited(o, cfg);
                    } else if (is_noma(scheme)) {
                        if (cfg.sic == SicMode::ipsic) {
                            break; // no closed form; the mc rows carry this scheme
                        }
                        std::vector<analytic::ErgodicResult> rates;
                        for (int m = 1; m < cfg.num_users; ++m) {
                            rates.push_back(analytic::ergodic_psic_m(cfg, st, rho[i], m, cheb_));
                        }
                        rates.push_back(analytic::ergodic_psic_M(cfg, st, rho[i], sp_.tol));
                        t = analytic::throughput_delay_tolerant(rates);
                    } else if (limited) {
                        t = (1.0 - analytic::outage_oma(cfg, st, rho[i]).p[0]) * cfg.oma_rate;
                    } else {
                        t = analytic::ergodic_oma(cfg, st, rho[i], sp_.tol).rate;
                    }
                    add_energy(scheme, Method::analytic, dbs[i], t, std::nullopt);
                } catch (const std::exception& e) {
                    energy_error(scheme, Method::analytic, dbs[i], e.what());
                }
            }
        }
        if (!want(Method::mc)) {
            return;
        }
        try {
            const auto metric = limited ? mc::Metric::outage : mc::Metric::ergodic;
            std::vector<double> t(rho.size(), 0.0);
            if (is_noma(scheme)) {
                const auto est = limited ? mc::outage_noma(cfg, st, rho, mc_options())
                                         : mc::ergodic_noma(cfg, st, rho, mc_options());
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    for (int m = 0; m < cfg.num_users; ++m) {
                        t[i] += limited ? (1.0 - est[i][m].value) * cfg.target_rates[m] : est[i][m].value;
                    }
                }
            } else {
                const auto est = scheme == "irs-oma" ? mc::oma(cfg, st, rho, mc_options(), metric)
                                                     : mc::baseline(relay(scheme, cfg, st), rho, mc_options(), metric);
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    t[i] = limited ? (1.0 - est[i].value) * cfg.oma_rate : est[i].value;
                }
            }
            for (std::size_t i = 0; i < rho.size(); ++i) {
                add_energy(scheme, Method::mc, dbs[i], t[i], sp_.trials);
            }
        } catch (const std::exception& e) {
            for (double db : dbs) {
                energy_error(scheme, Method::mc, db, e.what());
            }
        }
    }

    void add_z(const std::string& scheme, int user, const std::string& metric, double snr_db, double z)
    {
        auto r = base(scheme, user, metric, Method::z, snr_db, std::nullopt);
        r.value = z;
        r.trials = sp_.trials;
        r.seed = sp_.seed;
        rep_.rows.push_back(std::move(r));
        ++rep_.z_checked;
        if (std::abs(z) > sp_.z_threshold) {
            ++rep_.z_breaches;
        }
    }

    // Outage z uses the binomial error at the analytic p, and is skipped where
    // fewer than ten outages (or successes) are expected.
    void validate_outage(const std::string& scheme, int user, double snr_db, double p, const mc::McEstimate& e)
    {
        const double n = static_cast<double>(e.trials);
        add_value(scheme, user, "outage", Method::analytic, snr_db, std::nullopt, p);
        add_mc(e, "outage", snr_db, std::nullopt);
        if (n * p < 10.0 || n * (1.0 - p) < 10.0) {
            return;
        }
        add_z(scheme, user, "outage", snr_db, (p - e.value) / std::sqrt(p * (1.0 - p) / n));
    }

    void validate_ergodic(const std::string& scheme, int user, double snr_db, double rate, const mc::McEstimate& e)
    {
        add_value(scheme, user, "ergodic", Method::analytic, snr_db, std::nullopt, rate);
        add_mc(e, "ergodic", snr_db, std::nullopt);
        if (e.std_error > 0.0) {
            add_z(scheme, user, "ergodic", snr_db, (rate - e.value) / e.std_error);
        }
    }

    void validate_scheme(const std::string& scheme)
    {
        if (is_relay(scheme)) {
            rep_.warnings.push_back(scheme + ": no closed form to validate against, skipped");
            return;
        }
        const auto cfg = with_scheme(sc_.network, scheme);
        const auto st = derive_stats(cfg);
        const auto rho = rhos();
        const auto& dbs = sp_.snr_db;
        for (auto metric : sp_.metrics) {
            const std::string name = mc::to_string(metric);
            try {
                if (metric == mc::Metric::outage && is_noma(scheme)) {
                    const auto est = mc::outage_noma(cfg, st, rho, mc_options());
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        const auto o = cfg.sic == SicMode::ipsic ? analytic::outage_ipsic(cfg, st, rho[i], lag_)
                                                                 : analytic::outage_psic(cfg, st, rho[i]);
                        for (int m = 1; m <= cfg.num_users; ++m) {
                            validate_outage(scheme, m, dbs[i], o.p[m - 1], est[i][m - 1]);
                        }
                    }
                } else if (metric == mc::Metric::outage) {
                    const auto est = mc::oma(cfg, st, rho, mc_options(), metric);
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        validate_outage(scheme, 0, dbs[i], analytic::outage_oma(cfg, st, rho[i]).p[0], est[i]);
                    }
                } else if (is_noma(scheme)) {
                    if (cfg.sic == SicMode::ipsic) {
                        rep_.warnings.push_back(scheme + ": no closed-form ergodic rate, skipped");
                        continue;
                    }
                    const auto est = mc::ergodic_noma(cfg, st, rho, mc_options());
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        // the adaptive route: the Chebyshev sum's bias is larger than the MC error
                        for (int m = 1; m < cfg.num_users; ++m) {
                            validate_ergodic(scheme, m, dbs[i],
                                             analytic::ergodic_psic_m_integral(cfg, st, rho[i], m), est[i][m - 1]);
                        }
                        const int big_m = cfg.num_users;
                        validate_ergodic(scheme, big_m, dbs[i], analytic::ergodic_psic_M(cfg, st, rho[i], sp_.tol).rate,
                                         est[i][big_m - 1]);
                    }
                } else {
                    const auto est = mc::oma(cfg, st, rho, mc_options(), metric);
                    for (std::size_t i = 0; i < rho.size(); ++i) {
                        validate_ergodic(scheme, 0, dbs[i], analytic::ergodic_oma(cfg, st, rho[i], sp_.tol).rate,
                                         est[i]);
                    }
                }
            } catch (const std::exception& e) {
                for (double db : dbs) {
                    add_error(scheme, 0, name, Method::z, db, std::nullopt, e.what());
                }
            }
        }
    }
};

} // namespace

RunReport run_sweep(const Scenario& sc)
{
    validate(sc);
    return Runner(sc).run();
}

void sort_rows(Table& t)
{
    // sweep_var absent sorts first
    auto key = [](const Row& r) {
        return std::make_tuple(std::string_view(r.scheme), r.user, std::string_view(r.metric),
                               std::string_view(r.method), r.sweep_var.has_value(), r.sweep_var.value_or(0.0),
                               r.snr_db);
    };
    std::stable_sort(t.begin(), t.end(), [&](const Row& a, const Row& b) { return key(a) < key(b); });
}

// ---- emission --------------------------------------------------------------

namespace {

const char* kHeader = "scheme,user,metric,method,snr_db,sweep_var,value,ci_lo,ci_hi,trials,seed,error";

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

template <class I>
std::string opt_int(const std::optional<I>& v)
{
    return v ? std::to_string(*v) : "";
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

} // namespace

std::string format_csv(const Table& t)
{
    std::string out = std::string(kHeader) + "\n";
    for (const auto& r : t) {
        out += csv_field(r.scheme) + "," + std::to_string(r.user) + "," + csv_field(r.metric) + "," +
               csv_field(r.method) + "," + num(r.snr_db) + "," + opt_num(r.sweep_var) + "," + opt_num(r.value) + "," +
               opt_num(r.ci_lo) + "," + opt_num(r.ci_hi) + "," + opt_int(r.trials) + "," + opt_int(r.seed) + "," +
               csv_field(r.error) + "\n";
    }
    return out;
}

std::string format_json(const Table& t)
{
    // numbers are written with the CSV formatting, which is valid JSON
    auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
    auto jnum = [](const std::optional<double>& v) { return v && std::isfinite(*v) ? num(*v) : "null"; };
    auto jint = [](const auto& v) { return v ? std::to_string(*v) : std::string("null"); };
    std::string out = "[\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& r = t[i];
        out += "  {\"scheme\": " + str(r.scheme) + ", \"user\": " + std::to_string(r.user) +
               ", \"metric\": " + str(r.metric) + ", \"method\": " + str(r.method) +
               ", \"snr_db\": " + jnum(r.snr_db) + ", \"sweep_var\": " + jnum(r.sweep_var) +
               ", \"value\": " + jnum(r.value) + ", \"ci_lo\": " + jnum(r.ci_lo) + ", \"ci_hi\": " + jnum(r.ci_hi) +
               ", \"trials\": " + jint(r.trials) + ", \"seed\": " + jint(r.seed) +
               ", \"error\": " + (r.error.empty() ? std::string("null") : str(r.error)) + "}";
        out += i + 1 < t.size() ? ",\n" : "\n";
    }
    return out + "]\n";
}

Table parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw DomainError("parse_csv: unexpected header");
    }
    auto opt_d = [](const std::string& s) { return s.empty() ? std::optional<double>() : std::stod(s); };
    Table t;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 12) {
            throw DomainError("parse_csv: expected 12 fields, got " + std::to_string(f.size()));
        }
        Row r;
        r.scheme = f[0];
        r.user = std::stoi(f[1]);
        r.metric = f[2];
        r.method = f[3];
        r.snr_db = std::stod(f[4]);
        r.sweep_var = opt_d(f[5]);
        r.value = opt_d(f[6]);
        r.ci_lo = opt_d(f[7]);
        r.ci_hi = opt_d(f[8]);
        if (!f[9].empty()) {
            r.trials = std::stoll(f[9]);
        }
        if (!f[10].empty()) {
            r.seed = std::stoull(f[10]);
        }
        r.error = f[11];
        t.push_back(std::move(r));
    }
    return t;
}

void emit(const Table& t, Format format, const std::string& path)
{
    if (t.empty()) {
        throw DomainError("emit: empty result table, nothing written");
    }
    const std::string body = format == Format::csv ? format_csv(t) : format_json(t);
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << body;
    out.close();
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

} // namespace irsnoma::sweep
