#include "doctest.h"

#include "irsnoma/errors.hpp"
#include "irsnoma/special.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace irsnoma;
using special::bessel_k_int;

namespace {

struct OraclePoint {
    int nu;
    double x;
    double k;
};

std::vector<OraclePoint> load_oracle()
{
    std::ifstream in(std::string(IRSNOMA_FIXTURES) + "/bessel_k_oracle.csv");
    REQUIRE(in.good());
    std::vector<OraclePoint> pts;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        pts.push_back({std::stoi(a), std::stod(b), std::stod(c)});
    }
    return pts;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("K_nu agrees with the arbitrary precision oracle")
{
    const auto pts = load_oracle();
    REQUIRE(pts.size() >= 200);
    double worst = 0.0;
    for (const auto& p : pts) {
        const double got = bessel_k_int(p.nu, p.x);
        const double e = rel(got, p.k);
        worst = std::max(worst, e);
        CHECK_MESSAGE(e <= 1e-10, "nu=" << p.nu << " x=" << p.x << " got " << got << " want " << p.k);
    }
    MESSAGE("worst relative error " << worst);
}

TEST_CASE("K_nu reference values")
{
    CHECK(std::abs(bessel_k_int(0, 1.0) - 0.4210244382) < 1e-10);
    CHECK(rel(bessel_k_int(1, 1e-6), 1e6) < 1e-5);
    CHECK(bessel_k_int(3, 2.0) == bessel_k_int(1, 2.0) + 2.0 * bessel_k_int(2, 2.0));
}

TEST_CASE("K_nu domain, underflow and overflow")
{
    CHECK_THROWS_AS(bessel_k_int(0, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_k_int(1, -1.0), DomainError);
    CHECK_THROWS_AS(bessel_k_int(65, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_k_int(-1, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_k_int(64, 1e-8), OverflowError);

    const auto deep = special::bessel_k_checked(0, 800.0);
    CHECK(deep.underflow);
    CHECK(deep.value == 0.0);
    const auto edge = special::bessel_k_checked(0, 700.0);
    CHECK_FALSE(edge.underflow);
    CHECK(edge.value > 0.0);

    // log form stays finite where the value itself does not
    CHECK(std::isfinite(special::log_bessel_k_int(0, 2000.0)));
    CHECK(std::isfinite(special::log_bessel_k_int(64, 1e-8)));
    CHECK(rel(special::log_bessel_k_int(5, 3.0), std::log(bessel_k_int(5, 3.0))) < 1e-13);
}

TEST_CASE("upward recurrence holds")
{
    for (double x : {0.1, 1.0, 10.0, 100.0}) {
        for (int nu = 1; nu <= 20; ++nu) {
            const double lhs = bessel_k_int(nu + 1, x);
            const double rhs = bessel_k_int(nu - 1, x) + (2.0 * nu / x) * bessel_k_int(nu, x);
            CHECK(rel(lhs, rhs) < 1e-9);
        }
    }
}

TEST_CASE("monotone in x and in order")
{
    for (int nu : {0, 1, 2, 5, 16}) {
        double prev = bessel_k_int(nu, 1e-3);
        for (double x = 2e-3; x < 600.0; x *= 1.3) {
            const double k = bessel_k_int(nu, x);
            CHECK(k < prev);
            prev = k;
        }
    }
    for (double x : {0.01, 0.5, 3.0, 40.0}) {
        for (int nu = 0; nu < 30; ++nu) {
            CHECK(bessel_k_int(nu + 1, x) > bessel_k_int(nu, x));
        }
    }
}

TEST_CASE("small argument expansion")
{
    using special::bessel_k_small_x_approx;
    CHECK(std::abs(bessel_k_small_x_approx(1, 0.01) - 99.97351) < 1e-4);
    CHECK(std::abs(bessel_k_small_x_approx(2, 0.1) - 199.5) < 1e-12);
    CHECK(rel(bessel_k_small_x_approx(2, 0.01), bessel_k_int(2, 0.01)) < 1e-3);
    CHECK_THROWS_AS(bessel_k_small_x_approx(0, 0.1), DomainError);
    CHECK_THROWS_AS(bessel_k_small_x_approx(1, 0.0), DomainError);

    for (int nu : {1, 2, 3, 4}) {
        double prev = 1e300;
        for (int k = 1; k <= 4; ++k) {
            const double x = std::pow(10.0, -k);
            const double e = rel(bessel_k_small_x_approx(nu, x), bessel_k_int(nu, x));
            CHECK(e < prev);
            prev = e;
        }
    }
}

TEST_CASE("log gamma and binomial")
{
    CHECK(rel(special::log_gamma_int(5), std::log(24.0)) < 1e-14);
    CHECK(special::log_gamma_int(1) == 0.0);
    CHECK(special::binomial(5, 2) == 10.0);
    CHECK(special::binomial(6, 0) == 1.0);
    CHECK(special::binomial(3, 4) == 0.0);
    CHECK_THROWS_AS(special::log_gamma_int(0), DomainError);
}
