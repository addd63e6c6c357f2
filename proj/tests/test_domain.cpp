#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <string>

#include "edlab/constants.hpp"
#include "edlab/errors.hpp"
#include "edlab/field.hpp"
#include "edlab/grid.hpp"

using namespace edlab;

namespace {

double max_abs_interior(ScalarField const& f, ScalarField const& g)
{
    double worst = 0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        worst = std::max(worst, std::abs(f[i] - g[i]));
    return worst;
}

}  // namespace

TEST_CASE("physical constants derive the mass")
{
    PhysicalConstants c(1.0, 2.0, 1.0);
    CHECK(c.mass() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(c.diffusion() == doctest::Approx(0.5));

    auto const p = PhysicalConstants::from_partial(1.0, 2.0, 1.0, std::nullopt);
    CHECK(p.mass() == 2.0);

    auto const q = PhysicalConstants::from_partial(std::nullopt, 2.0, 1.0, 4.0);
    CHECK(q.sigma2() == doctest::Approx(0.5));
    CHECK(q.mass() * q.sigma2() == doctest::Approx(q.eta() * q.tau()));

    auto const natural = PhysicalConstants::from_partial({}, {}, {}, {});
    CHECK(natural.mass() == 1.0);
}

TEST_CASE("inconsistent constants name the violated relation")
{
    try
    {
        (void)PhysicalConstants::from_partial(1.0, 2.0, 1.0, 3.0);
        FAIL("expected a configuration error");
    }
    catch (ConfigurationError const& e)
    {
        CHECK(std::string(e.what()).find("m * sigma2 must equal eta * tau") != std::string::npos);
    }
    CHECK_THROWS_AS(PhysicalConstants(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(PhysicalConstants(1.0, -1.0, 1.0), DomainError);
}

TEST_CASE("mass scaling keeps S/m dynamics consistent")
{
    PhysicalConstants c(1.0, 1.0, 1.0);
    auto const heavy = c.with_mass_scaled(100.0);
    CHECK(heavy.mass() == doctest::Approx(100.0));
    CHECK(heavy.diffusion() == doctest::Approx(0.01));
    CHECK(heavy.eta() == c.eta());
}

TEST_CASE("grid geometry")
{
    SpatialGrid periodic(0.0, 1.0, 10);
    CHECK(periodic.h() == doctest::Approx(0.1));
    CHECK(periodic.weight(0) == doctest::Approx(0.1));
    CHECK(periodic.displacement(9, 0) == doctest::Approx(0.1));
    CHECK(periodic.displacement(0, 9) == doctest::Approx(-0.1));

    SpatialGrid reflecting(0.0, 1.0, 11, Boundary::reflecting);
    CHECK(reflecting.h() == doctest::Approx(0.1));
    CHECK(reflecting.weight(0) == doctest::Approx(0.05));
    CHECK(reflecting.weight(10) == doctest::Approx(0.05));
    CHECK(reflecting.x(10) == doctest::Approx(1.0));

    CHECK(boundary_from_string("periodic") == Boundary::periodic);
    CHECK(boundary_from_string("reflecting") == Boundary::reflecting);
    CHECK_THROWS_AS(boundary_from_string("open"), ConfigurationError);
}

TEST_CASE("undersized or inverted grids are configuration errors")
{
    CHECK_THROWS_AS(SpatialGrid(0.0, 1.0, 4), ConfigurationError);
    CHECK_THROWS_AS(SpatialGrid(1.0, 0.0, 16), ConfigurationError);
    CHECK_THROWS_AS(SpatialGrid(4, Axis{}), ConfigurationError);
}

TEST_CASE("gradient examples")
{
    SpatialGrid g(-1.0, 1.0, 201, Boundary::reflecting);

    auto const c = gradient(ScalarField::constant(g, 3.0));
    for (auto v : c.values())
        CHECK(v == 0.0);

    auto const lin = gradient(ScalarField::sample(g, [](double x) { return x; }));
    for (std::size_t i = 1; i + 1 < g.n(); ++i)
        CHECK(std::abs(lin[i] - 1.0) < 1e-12);

    SpatialGrid fine(0.0, 1.0, 101, Boundary::reflecting);
    REQUIRE(fine.h() == doctest::Approx(0.01));
    auto const quad = gradient(ScalarField::sample(fine, [](double x) { return x * x; }));
    std::size_t const mid = 50;
    REQUIRE(fine.x(mid) == doctest::Approx(0.5));
    CHECK(std::abs(quad[mid] - 1.0) < 1e-10);
    for (std::size_t i = 1; i + 1 < fine.n(); ++i)
        CHECK(std::abs(quad[i] - 2.0 * fine.x(i)) < 1e-10);
}

TEST_CASE("gradient is linear and second order")
{
    SpatialGrid g(0.0, 1.0, 64);
    double const two_pi = 2 * std::numbers::pi;
    auto const f = ScalarField::sample(g, [&](double x) { return std::sin(two_pi * x); });
    auto const h = ScalarField::sample(g, [&](double x) { return std::cos(3 * two_pi * x); });

    auto const lhs = gradient(2.0 * f + h);
    auto const rhs = 2.0 * gradient(f) + gradient(h);
    CHECK(max_abs_interior(lhs, rhs) < 1e-11);

    auto error_at = [&](std::size_t n) {
        SpatialGrid gn(0.0, 1.0, n);
        auto const d = gradient(ScalarField::sample(gn, [&](double x) { return std::sin(two_pi * x); }));
        auto const exact = ScalarField::sample(gn, [&](double x) { return two_pi * std::cos(two_pi * x); });
        return linf_distance(d, exact);
    };
    double const order = std::log2(error_at(64) / error_at(128));
    CHECK(order >= 1.9);
}

TEST_CASE("gradient telescopes on a periodic grid")
{
    SpatialGrid g(-3.0, 5.0, 97);
    auto const f = ScalarField::sample(g, [](double x) { return std::exp(std::sin(x)) + 0.1 * x * x; });
    CHECK(std::abs(integrate(gradient(f))) < 1e-10);
}

TEST_CASE("integrate examples")
{
    SpatialGrid r(0.0, 1.0, 33, Boundary::reflecting);
    CHECK(integrate(ScalarField::constant(r, 1.0)) == 1.0);
    CHECK(integrate(ScalarField::constant(r, 0.0)) == 0.0);

    SpatialGrid p(0.0, 1.0, 256);
    auto const s2 = ScalarField::sample(p, [](double x) {
        double const s = std::sin(2 * std::numbers::pi * x);
        return s * s;
    });
    CHECK(std::abs(integrate(s2) - 0.5) < 1e-12);
}

TEST_CASE("normalize_density examples")
{
    SpatialGrid r(0.0, 1.0, 17, Boundary::reflecting);
    auto const one = normalize_density(ScalarField::constant(r, 2.0));
    for (auto v : one.values())
        CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one.role() == FieldRole::density);

    SpatialGrid p(0.0, 1.0, 20);
    std::vector<double> spike(20, 0.0);
    spike[7] = 3.5;
    auto const s = normalize_density(ScalarField(p, spike));
    CHECK(s[7] * p.weight(7) == doctest::Approx(1.0));

    SpatialGrid gg(-8.0, 8.0, 512);
    auto const gauss = normalize_density(ScalarField::sample(gg, [](double x) { return std::exp(-x * x); }));
    CHECK(std::abs(integrate(gauss) - 1.0) < 1e-12);

    auto const twice = normalize_density(gauss);
    CHECK(linf_distance(twice, gauss) < 1e-14);
}

TEST_CASE("normalize_density rejects empty or negative input")
{
    SpatialGrid p(0.0, 1.0, 16);
    CHECK_THROWS_AS(normalize_density(ScalarField::constant(p, 0.0)), InvalidDensityError);
    std::vector<double> v(16, 1.0);
    v[3] = -0.5;
    CHECK_THROWS_AS(normalize_density(ScalarField(p, v)), InvalidDensityError);
    CHECK_THROWS_AS(ScalarField(p, v, FieldRole::density), InvalidDensityError);
}

TEST_CASE("field arithmetic requires a shared grid")
{
    SpatialGrid a(0.0, 1.0, 16);
    SpatialGrid b(0.0, 2.0, 16);
    CHECK_THROWS_AS(ScalarField::constant(a, 1.0) + ScalarField::constant(b, 1.0), ConfigurationError);
    CHECK_THROWS_AS(ScalarField(a, std::vector<double>(5, 1.0)), ConfigurationError);
}

TEST_CASE("clamp_to_floor raises sub-floor nodes")
{
    SpatialGrid p(0.0, 1.0, 16);
    std::vector<double> v(16, 1.0);
    v[2] = 0.0;
    v[5] = 1e-20;
    auto const c = clamp_to_floor(ScalarField(p, v, FieldRole::density));
    CHECK(c.clamped_nodes == 2);
    CHECK(c.values[2] == c.floor_value);
    CHECK(c.floor_value == doctest::Approx(density_floor));
}

TEST_CASE("distances")
{
    SpatialGrid p(0.0, 1.0, 10);
    auto const a = ScalarField::constant(p, 1.0);
    auto const b = ScalarField::constant(p, 1.5);
    CHECK(l1_distance(a, b) == doctest::Approx(0.5));
    CHECK(l2_distance(a, b) == doctest::Approx(0.5));
    CHECK(linf_distance(a, b) == doctest::Approx(0.5));
}
