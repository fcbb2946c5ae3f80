#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "etm/admissible.hpp"
#include "etm/errors.hpp"

using namespace etm;
using doctest::Approx;

namespace {

// polynomials written out independently of the library
double linear_ref(double beta, double b) { return (1 - 2 * beta) * b + 6; }
double cubic_ref(double beta, double b) {
    return 4 * (2 * beta - 1) * b * b * b + 4 * (4 * beta * beta - 12 * beta + 11) * b * b +
           (8 * beta * beta * beta - 44 * beta * beta + 70 * beta - 73) * b - 6 * (2 * beta - 1) * (2 * beta - 1);
}

} // namespace

TEST_CASE("membership examples") {
    auto m = nstar_membership(0, 5);
    CHECK(m.member);
    CHECK(m.linear == Approx(11));
    CHECK(m.cubic == Approx(229));

    m = nstar_membership(0, 1);
    CHECK_FALSE(m.member);
    CHECK(m.cubic == Approx(-39));

    m = nstar_membership(0, -0.5);
    CHECK(m.member);
    CHECK(m.linear == Approx(5.5));
    CHECK(m.cubic == Approx(42));

    CHECK(nstar_membership(0.25, -0.25).cubic == Approx(15.125));
    CHECK(nstar_membership(0.25, 5).cubic == Approx(282.875));
}

TEST_CASE("property: margins match the written-out polynomials") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> bd(-0.5, 0.5), bb(-10, 10);
    for (int k = 0; k < 2000; ++k) {
        const double beta = bd(rng), b = bb(rng);
        const auto m = nstar_membership(beta, b);
        CHECK(m.linear == Approx(linear_ref(beta, b)).epsilon(1e-12));
        CHECK(m.cubic == Approx(cubic_ref(beta, b)).epsilon(1e-12).scale(100));
        CHECK(m.member == (m.linear > 0 && m.cubic > 0));
    }
}

TEST_CASE("named pairs") {
    CHECK(nbeta_membership(0.25, -0.25, 5));
    for (double beta : {-0.4, -0.2, 0.0, 0.2, 0.4}) CHECK(nbeta_membership(beta, beta - 0.5, 5));
    for (double beta : {0.0, 0.1, 0.2, 0.3, 0.4}) {
        CHECK(nstar_membership(beta, beta - 0.5).member);
        CHECK(nstar_membership(beta, 2.5 - beta).member);
        CHECK(nbeta_membership(beta, -3, 5));
    }
    CHECK_FALSE(nbeta_membership(0, 5, -0.5));
    CHECK_FALSE(nbeta_membership(0, -0.5, 2.0));
}

TEST_CASE("quadratic form coefficients") {
    const auto q = quad_form_coeffs(0, 5);
    CHECK(q.A == Approx(11.0 / 3.0));
    CHECK(q.B == Approx(121.0 / 12.0));
    CHECK(q.C == Approx(32.5));
    CHECK(q.discriminant() == Approx(17.4931).epsilon(1e-5));
    CHECK(quad_form_coeffs(0, 0).C == 0.0);
    CHECK(quad_form_coeffs(0, 1).discriminant() < 0);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> bd(-0.5, 0.5), bb(-10, 10);
    for (int k = 0; k < 1000; ++k) {
        const double beta = bd(rng), b = bb(rng);
        const auto c = quad_form_coeffs(beta, b);
        CHECK(c.discriminant() ==
              Approx(linear_ref(beta, b) * cubic_ref(beta, b) / 144.0).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("equivalence of positive definiteness and membership") {
    CHECK(positive_definite_equiv_check(0, 5).agree());
    CHECK(positive_definite_equiv_check(0, 5).member);
    CHECK(positive_definite_equiv_check(0, 1).agree());
    CHECK_FALSE(positive_definite_equiv_check(0, 1).positive_definite);
    const auto stats = sample_equivalence(10000, -0.5, 0.5, -10, 10, 12345);
    CHECK(stats.samples == 10000);
    CHECK(stats.disagreements == 0);
    CHECK(stats.boundary < 10);
}

TEST_CASE("axis ranges and scan validation") {
    AxisRange r{-0.5, 0.5, 0.01, false};
    const auto v = r.values();
    CHECK(v.size() == 100);
    CHECK(v.front() == -0.5);
    CHECK(v.back() == Approx(0.49));
    CHECK(v[63] == 0.13);
    AxisRange s{-10, 10, 0.01, true};
    CHECK(s.values().size() == 2001);
    CHECK(s.values().back() == 10.0);

    RegionScanSpec ok;
    CHECK_NOTHROW(ok.validate());
    RegionScanSpec bad = ok;
    bad.beta.step = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.b.min = 11;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.b.step = 0.03;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("default region scan") {
    const RegionScanSpec spec;
    const auto scan = region_scan(spec);
    CHECK(scan.beta_count == 100);
    CHECK(scan.b_count == 2001);
    CHECK(scan.cells.size() == scan.beta_count * scan.b_count);
    CHECK(scan.gap_violations.empty());
    for (const auto& c : scan.cells)
        if (c.margins.member) CHECK((c.b <= 0 || c.b >= 2));

    const auto* c5 = scan.find(0, 5);
    REQUIRE(c5);
    CHECK(c5->margins.member);
    const auto* c1 = scan.find(0, 1);
    REQUIRE(c1);
    CHECK_FALSE(c1->margins.member);
    const auto* ch = scan.find(0, -0.5);
    REQUIRE(ch);
    CHECK(ch->margins.member);

    for (double beta : {0.0, 0.1, 0.2, 0.3, 0.4}) {
        for (double b : {beta - 0.5, 2.5 - beta, -3.0, 5.0}) {
            const auto* c = scan.find(beta, b);
            REQUIRE(c);
            CHECK(c->margins.member);
        }
    }
}

TEST_CASE("region csv rows and determinism") {
    RegionScanSpec spec;
    spec.beta = {-0.5, 0.5, 0.1, false};
    spec.b = {-10, 10, 0.5, true};
    std::ostringstream a, b;
    write_region_csv(a, region_scan(spec));
    write_region_csv(b, region_scan(spec));
    CHECK(a.str() == b.str());
    const std::string text = a.str();
    CHECK(text.rfind("beta,b,member,margin_linear,margin_cubic\n", 0) == 0);
    CHECK(text.find("\n0,5,true,11,229\n") != std::string::npos);
    CHECK(text.find("\n0,1,false,7,-39\n") != std::string::npos);
    CHECK(text.find('\r') == std::string::npos);
    std::size_t lines = 0;
    for (char ch : text) lines += ch == '\n';
    CHECK(lines == 1 + 10 * 41);
}
