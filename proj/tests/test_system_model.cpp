#include "doctest.h"

#include "irsnoma/analytic.hpp"
#include "irsnoma/errors.hpp"
#include "irsnoma/system_model.hpp"
#include "ks.hpp"

#include <cmath>

using namespace irsnoma;
using irsnoma::testing::ks_distance;

TEST_CASE("variances from distances")
{
    NetworkConfig cfg;
    cfg.d_sr = 0.5;
    cfg.d_rm = {1.0, 0.5, 0.5};
    cfg.d_rd = 1.0;
    cfg.pathloss_exponent = 2.0;
    auto s = derive_stats(cfg);
    CHECK(s.omega_sr == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(s.omega_rm[0] == 1.0);
    CHECK(s.omega_rd == 1.0);
    cfg.pathloss_exponent = 3.7;
    CHECK(derive_stats(cfg).omega_rm[0] == 1.0);

    const auto t2 = derive_stats(NetworkConfig::reference());
    CHECK(t2.omega_sr == doctest::Approx(4.0));
    CHECK(t2.omega_rm[0] == doctest::Approx(4.0));
    CHECK(t2.omega_rm[1] == doctest::Approx(6.25));
    CHECK(t2.omega_rm[2] == doctest::Approx(11.1111).epsilon(1e-5));
}

TEST_CASE("rate thresholds")
{
    CHECK(threshold(0.6) == doctest::Approx(0.5157166).epsilon(1e-7));
    CHECK(threshold(2.0) == 3.0);
    CHECK(threshold(0.0) == 0.0);
    CHECK_THROWS_AS(threshold(-1.0), DomainError);
}

TEST_CASE("reference allocation is decodable")
{
    const auto cfg = NetworkConfig::reference();
    const double g2 = threshold(1.6);
    CHECK(cfg.power_alloc[1] - g2 * cfg.power_alloc[2] == doctest::Approx(0.19686).epsilon(1e-4));
    for (double psi : rho_free_thresholds(cfg)) {
        CHECK(psi > 0.0);
    }
    CHECK(std::isfinite(worst_threshold(cfg, 3)));

    NetworkConfig bad = cfg;
    bad.target_rates = {0.6, 3.0, 2.0};
    CHECK(std::isinf(worst_threshold(bad, 2)));
    CHECK(std::isfinite(worst_threshold(bad, 1)));
}

TEST_CASE("configuration validation")
{
    NetworkConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    NetworkConfig kpq = cfg;
    kpq.elements = 3;
    kpq.partition = 2;
    kpq.group_size = 2;
    try {
        kpq.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "elements");
        CHECK(std::string(e.what()).find("K must equal P*Q") != std::string::npos);
    }

    NetworkConfig order = cfg;
    order.num_users = 2;
    order.power_alloc = {0.3, 0.7};
    order.target_rates = {0.1, 0.4};
    order.d_rm = {0.5, 0.5};
    CHECK_THROWS_AS(order.validate(), ConfigError);
    CHECK_NOTHROW(order.validate(false));

    NetworkConfig sum = cfg;
    sum.power_alloc = {0.5, 0.4, 0.2};
    CHECK_THROWS_AS(sum.validate(), ConfigError);

    NetworkConfig dist = cfg;
    dist.d_sr = 0.0;
    CHECK_THROWS_AS(dist.validate(), ConfigError);

    NetworkConfig oi = cfg;
    oi.residual_interference = -0.1;
    CHECK_THROWS_AS(oi.validate(), ConfigError);

    NetworkConfig one;
    one.num_users = 1;
    one.power_alloc = {1.0};
    one.target_rates = {1.0};
    one.d_rm = {0.5};
    CHECK_NOTHROW(one.validate());
}

TEST_CASE("codebook selectors are disjoint and cover the surface")
{
    const Codebook cb(3, 2);
    std::vector<int> cover(cb.elements(), 0);
    for (int p = 0; p < cb.partition; ++p) {
        const auto v = cb.selector(p);
        int ones = 0;
        for (int k = 0; k < cb.elements(); ++k) {
            ones += v[k];
            cover[k] += v[k];
        }
        CHECK(ones == 2);
        for (int l = 0; l < cb.partition; ++l) {
            if (l == p) {
                continue;
            }
            const auto w = cb.selector(l);
            int dot = 0;
            for (int k = 0; k < cb.elements(); ++k) {
                dot += v[k] * w[k];
            }
            CHECK(dot == 0);
        }
    }
    for (int c : cover) {
        CHECK(c == 1);
    }
}

TEST_CASE("generator streams")
{
    auto a = make_stream(42, 0);
    auto b = make_stream(42, 0);
    auto c = make_stream(42, 1);
    auto d = make_stream(43, 0);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("draws are reproducible from a cloned state")
{
    const auto cfg = NetworkConfig::reference();
    const auto st = derive_stats(cfg);
    auto r1 = make_stream(9, 3);
    auto r2 = r1;
    const auto d1 = sample_draw(cfg, st, r1);
    const auto d2 = sample_draw(cfg, st, r2);
    REQUIRE(d1.pools.size() == d2.pools.size());
    for (std::size_t i = 0; i < d1.pools.size(); ++i) {
        CHECK(d1.pools[i].h_sr == d2.pools[i].h_sr);
        CHECK(d1.pools[i].h_rm == d2.pools[i].h_rm);
    }
    CHECK(d1.oma.h_rm == d2.oma.h_rm);
    CHECK(d1.residual == d2.residual);
    for (const auto& p : d1.pools) {
        for (const auto& z : p.h_sr) {
            CHECK(std::isfinite(z.real()));
            CHECK(std::isfinite(z.imag()));
        }
    }
}

TEST_CASE("sample moments")
{
    auto cfg = NetworkConfig::reference();
    cfg.elements = 2;
    cfg.group_size = 2;
    const auto st = derive_stats(cfg);
    const ChannelSampler sampler(cfg, st);
    auto rng = make_stream(5, 0);
    const int n = 100000;
    double s_sr = 0.0, s_x = 0.0, s_x2 = 0.0, s_res = 0.0;
    ChannelDraw d;
    const Codebook cb(cfg);
    for (int i = 0; i < n; ++i) {
        sampler.sample(rng, d);
        s_sr += std::norm(d.pools[0].sr(0, 0));
        const double x = cascade_gains(d.pools[1], cb)(0, 0);
        s_x += x;
        s_x2 += x * x;
        s_res += d.residual[1];
    }
    // |h|^2 is exponential: standard deviation equals the mean
    const double se_sr = st.omega_sr / std::sqrt(n);
    CHECK(std::abs(s_sr / n - st.omega_sr) < 3 * se_sr);
    const double mean_x = s_x / n;
    const double se_x = std::sqrt((s_x2 / n - mean_x * mean_x) / n);
    CHECK(std::abs(mean_x - 2.0 * st.cascade(2)) < 3 * se_x);
    CHECK(std::abs(s_res / n - 0.1) < 3 * 0.1 / std::sqrt(n));
}

TEST_CASE("no residual power when the level is zero")
{
    auto cfg = NetworkConfig::reference();
    cfg.residual_interference = 0.0;
    auto rng = make_stream(1, 1);
    const auto d = sample_draw(cfg, derive_stats(cfg), rng);
    for (double r : d.residual) {
        CHECK(r == 0.0);
    }
}

TEST_CASE("cascade gains")
{
    CascadePool pool;
    pool.users = 1;
    pool.elements = 1;
    pool.shared_sr = true;
    pool.h_sr = {cplx(1.0, 2.0)};
    pool.h_rm = {cplx(-0.5, 0.25)};
    const auto g = cascade_gains(pool, Codebook(1, 1));
    CHECK(g(0, 0) == doctest::Approx(std::norm(cplx(1.0, 2.0) * cplx(-0.5, 0.25))));

    CascadePool zero;
    zero.users = 2;
    zero.elements = 4;
    zero.shared_sr = true;
    zero.h_sr.assign(4, cplx(0.0, 0.0));
    zero.h_rm.assign(8, cplx(0.0, 0.0));
    const auto gz = cascade_gains(zero, Codebook(2, 2));
    for (double v : gz.x) {
        CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(cascade_gains(zero, Codebook(3, 1)), DomainError);
}

TEST_CASE("single cascade gain follows the Bessel closed form")
{
    auto cfg = NetworkConfig::reference();
    cfg.elements = 2;
    cfg.group_size = 2;
    const auto st = derive_stats(cfg);
    const ChannelSampler sampler(cfg, st);
    auto rng = make_stream(11, 0);
    const Codebook cb(cfg);
    std::vector<double> xs;
    ChannelDraw d;
    for (int i = 0; i < 100000; ++i) {
        sampler.sample(rng, d);
        xs.push_back(cascade_gains(d.pools[0], cb)(1, 0));
    }
    const double omega = st.cascade(1);
    const double ks = ks_distance(xs, [&](double x) { return analytic::cascade_cdf(x, omega, 2); });
    CHECK(ks < 0.01);
}

TEST_CASE("ordering modes")
{
    GainMatrix one_col{3, 1, {0.7, 0.1, 0.4}};
    const auto a = order_users(one_col, OrderingMode::per_column);
    const auto b = order_users(one_col, OrderingMode::effective_gain);
    CHECK(a == b);
    CHECK(a == std::vector<double>{0.1, 0.4, 0.7});

    GainMatrix single{1, 3, {0.2, 0.9, 0.5}};
    CHECK(order_users(single, OrderingMode::per_column) == std::vector<double>{0.9});
    CHECK(order_users(single, OrderingMode::effective_gain) == std::vector<double>{0.9});

    // users x columns: the two schemes differ here
    GainMatrix x{2, 2, {0.1, 0.8, 0.5, 0.2}};
    CHECK(order_users(x, OrderingMode::per_column) == std::vector<double>{0.2, 0.8});
    CHECK(order_users(x, OrderingMode::effective_gain) == std::vector<double>{0.5, 0.8});

    auto cfg = NetworkConfig::reference();
    cfg.elements = 4;
    cfg.partition = 2;
    cfg.group_size = 2;
    for (auto model : {ChannelModel::independent, ChannelModel::shared_bs_link}) {
        cfg.channel = model;
        const ChannelSampler sampler(cfg, derive_stats(cfg));
        auto rng = make_stream(3, 0);
        for (int i = 0; i < 200; ++i) {
            const auto d = sampler.sample(rng);
            const Codebook cb(cfg);
            for (auto mode : {OrderingMode::per_column, OrderingMode::effective_gain}) {
                const auto g = order_users(cascade_gains(d.pools[0], cb), mode);
                for (std::size_t m = 1; m < g.size(); ++m) {
                    CHECK(g[m] >= g[m - 1]);
                }
            }
        }
    }
}

TEST_CASE("per-column ranks follow the ordered closed form")
{
    auto cfg = NetworkConfig::reference();
    cfg.elements = 2;
    cfg.partition = 2;
    cfg.group_size = 1;
    const auto st = derive_stats(cfg);
    const ChannelSampler sampler(cfg, st);
    auto rng = make_stream(12, 0);
    const int n = 1000000;
    std::vector<std::vector<double>> g(3, std::vector<double>(n));
    ChannelDraw d;
    std::vector<double> r;
    for (int i = 0; i < n; ++i) {
        sampler.sample(rng, d);
        rank_gains(d, cfg, r);
        for (int m = 0; m < 3; ++m) {
            g[m][i] = r[m];
        }
    }
    for (int m = 1; m <= 3; ++m) {
        const double omega = st.cascade(m);
        const double ks = ks_distance(g[m - 1], [&](double x) {
            return std::pow(analytic::ordered_cdf(analytic::cascade_cdf(x, omega, 1), m, 3), 2);
        });
        CHECK_MESSAGE(ks < 0.005, "rank " << m << " ks " << ks);
    }
}

TEST_CASE("OMA gain is the column maximum")
{
    auto cfg = NetworkConfig::reference();
    cfg.elements = 2;
    cfg.partition = 2;
    const auto st = derive_stats(cfg);
    const ChannelSampler sampler(cfg, st);
    auto rng = make_stream(13, 0);
    const Codebook cb(cfg);
    std::vector<double> xs;
    ChannelDraw d;
    for (int i = 0; i < 1000000; ++i) {
        sampler.sample(rng, d);
        xs.push_back(oma_gain(d, cb));
    }
    const double ks =
        ks_distance(xs, [&](double x) { return std::pow(analytic::cascade_cdf(x, st.cascade_oma(), 1), 2); });
    CHECK(ks < 0.005);

    CHECK(snr_oma(0.0, 10.0) == 0.0);
    CHECK(snr_oma(0.3, 10.0) == doctest::Approx(3.0));
}

TEST_CASE("NOMA SINR")
{
    auto cfg = NetworkConfig::reference();
    // own signal of rank M, unit gain
    CHECK(sinr_noma(1.0, 3, 3, 10.0, 0.0, cfg) == doctest::Approx(1.0));
    CHECK(sinr_noma(0.0, 1, 2, 10.0, 0.3, cfg) == 0.0);
    // rank 1 decoding: interference from a_2 + a_3 = 0.5
    const double s = sinr_noma(2.0, 1, 3, 5.0, 0.0, cfg);
    CHECK(s == doctest::Approx(10.0 * 0.5 / (10.0 * 0.5 + 1.0)));

    cfg.sic = SicMode::ipsic;
    const double with_res = sinr_noma(2.0, 2, 3, 5.0, 0.4, cfg);
    CHECK(with_res == doctest::Approx(10.0 * 0.4 / (10.0 * 0.1 + 5.0 * 0.4 + 1.0)));
    // rank 1 never sees the residual
    CHECK(sinr_noma(2.0, 1, 1, 5.0, 0.4, cfg) == doctest::Approx(10.0 * 0.5 / (10.0 * 0.5 + 1.0)));

    double prev = -1.0;
    for (double g = 0.0; g < 5.0; g += 0.25) {
        const double v = sinr_noma(g, 2, 3, 5.0, 0.4, cfg);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 1e300;
    for (double res = 0.0; res < 5.0; res += 0.25) {
        const double v = sinr_noma(1.0, 2, 3, 5.0, res, cfg);
        CHECK(v <= prev);
        prev = v;
    }

    CHECK_THROWS_AS(sinr_noma(1.0, 3, 2, 5.0, 0.0, cfg), DomainError);
    CHECK_THROWS_AS(sinr_noma(1.0, 0, 2, 5.0, 0.0, cfg), DomainError);
    CHECK_THROWS_AS(sinr_noma(1.0, 1, 4, 5.0, 0.0, cfg), DomainError);
}
