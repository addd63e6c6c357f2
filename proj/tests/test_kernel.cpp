#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "edlab/errors.hpp"
#include "edlab/kernel.hpp"

using namespace edlab;

namespace {

double max_entry_difference(TransitionKernel const& a, TransitionKernel const& b)
{
    auto const da = a.dense();
    auto const db = b.dense();
    double worst = 0;
    for (std::size_t i = 0; i < da.size(); ++i)
        worst = std::max(worst, std::abs(da[i] - db[i]));
    return worst;
}

double max_row_total_variation(TransitionKernel const& a, TransitionKernel const& b)
{
    auto const da = a.dense();
    auto const db = b.dense();
    std::size_t const n = a.n();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double tv = 0;
        for (std::size_t j = 0; j < n; ++j)
            tv += std::abs(da[i * n + j] - db[i * n + j]);
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

void require_row_stochastic(TransitionKernel const& k)
{
    double worst_sum = 0;
    double smallest = 0;
    for (std::size_t i = 0; i < k.n(); ++i)
    {
        worst_sum = std::max(worst_sum, std::abs(k.row_sum(i) - 1.0));
        for (double v : k.row_band(i))
            smallest = std::min(smallest, v);
    }
    CHECK(worst_sum < 1e-12);
    CHECK(smallest >= 0.0);
}

}  // namespace

TEST_CASE("exact kernel with constant S is a centred symmetric Gaussian")
{
    SpatialGrid g(0.0, 10.0, 500);
    auto const k = build_exact_kernel(ScalarField::constant(g, 0.3), 100.0);
    require_row_stochastic(k);
    for (std::size_t i : {0ul, 17ul, 250ul, 499ul})
    {
        auto const m = kernel_moments(k, i);
        CHECK(std::abs(m.mean_step) < 1e-10);
        CHECK(m.covariance == doctest::Approx(0.01).epsilon(0.01));
        CHECK(k(i, (i + 3) % 500) == doctest::Approx(k(i, (i + 497) % 500)).epsilon(1e-13));
    }
}

TEST_CASE("exact kernel with linear S shifts the mean by sigma2 k / alpha")
{
    PhysicalConstants const c(2.0, 1.0, 1.0);
    SpatialGrid g(-5.0, 5.0, 1001, Boundary::reflecting);
    double const k = 1.5;
    double const alpha = 400.0;
    auto const s = ScalarField::sample(g, [&](double x) { return k * x; });
    auto const kern = build_exact_kernel(s, alpha, c);
    require_row_stochastic(kern);
    auto const m = kernel_moments(kern, 500);
    CHECK(std::abs(m.mean_step - c.sigma2() * k / alpha) < 1e-8);
    CHECK(m.covariance == doctest::Approx(c.sigma2() / alpha).epsilon(1e-8));
}

TEST_CASE("rows stay normalized for any S, including huge exponents")
{
    SpatialGrid g(0.0, 1.0, 128);
    auto const wild = ScalarField::sample(g, [](double x) { return 5e4 * std::sin(6 * std::numbers::pi * x); });
    require_row_stochastic(build_exact_kernel(wild, 50.0));
    require_row_stochastic(build_gaussian_kernel(wild, 50.0));
}

TEST_CASE("non-positive alpha is a domain error")
{
    SpatialGrid g(0.0, 1.0, 16);
    auto const s = ScalarField::constant(g, 0.0);
    CHECK_THROWS_AS(build_exact_kernel(s, 0.0), DomainError);
    CHECK_THROWS_AS(build_gaussian_kernel(s, -1.0), DomainError);
}

TEST_CASE("Gaussian kernel matches the exact kernel for constant and linear S")
{
    SpatialGrid g(-4.0, 4.0, 321, Boundary::reflecting);
    auto const flat = ScalarField::constant(g, -2.0);
    CHECK(max_entry_difference(build_exact_kernel(flat, 30.0), build_gaussian_kernel(flat, 30.0)) < 1e-10);

    auto const lin = ScalarField::sample(g, [](double x) { return 0.8 * x; });
    for (double alpha : {5.0, 30.0, 300.0})
        CHECK(max_entry_difference(build_exact_kernel(lin, alpha), build_gaussian_kernel(lin, alpha)) < 1e-10);
}

TEST_CASE("Gaussian approximation improves with alpha for curved S")
{
    SpatialGrid g(-3.0, 3.0, 601, Boundary::reflecting);
    auto const s = ScalarField::sample(g, [](double x) { return -x * x; });
    double const tv10 = max_row_total_variation(build_exact_kernel(s, 10.0), build_gaussian_kernel(s, 10.0));
    double const tv100 = max_row_total_variation(build_exact_kernel(s, 100.0), build_gaussian_kernel(s, 100.0));
    CHECK(tv10 > 0.0);
    CHECK(tv100 < tv10);
}

TEST_CASE("kernel moments")
{
    SpatialGrid g(0.0, 20.0, 2000);
    auto const flat = ScalarField::constant(g, 0.0);
    auto const m1 = kernel_moments(build_exact_kernel(flat, 25.0), 100);
    auto const m4 = kernel_moments(build_exact_kernel(flat, 100.0), 100);
    CHECK(std::abs(m1.mean_step) < 1e-10);
    CHECK(m1.covariance == doctest::Approx(1.0 / 25.0).epsilon(0.01));
    CHECK(m4.covariance / m1.covariance == doctest::Approx(0.25).epsilon(1e-6));

    SpatialGrid r(-5.0, 5.0, 2001, Boundary::reflecting);
    auto const lin = ScalarField::sample(r, [](double x) { return -0.6 * x; });
    auto const ml = kernel_moments(build_gaussian_kernel(lin, 50.0), 1000);
    CHECK(std::abs(ml.mean_step - (-0.6 / 50.0)) < 1e-8);
    CHECK_THROWS_AS(kernel_moments(build_gaussian_kernel(lin, 50.0), 5000), ConfigurationError);
}

TEST_CASE("kernel is translation equivariant on a periodic grid")
{
    SpatialGrid g(0.0, 1.0, 64);
    double const two_pi = 2 * std::numbers::pi;
    auto const s = ScalarField::sample(g, [&](double x) { return std::sin(two_pi * x); });
    std::size_t const shift = 8;
    std::vector<double> shifted(64);
    for (std::size_t i = 0; i < 64; ++i)
        shifted[(i + shift) % 64] = s[i];
    auto const a = build_exact_kernel(s, 200.0);
    auto const b = build_exact_kernel(ScalarField(g, shifted), 200.0);
    double worst = 0;
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j)
            worst = std::max(worst, std::abs(a(i, j) - b((i + shift) % 64, (j + shift) % 64)));
    CHECK(worst < 1e-14);
}

TEST_CASE("solve_alpha for constant S")
{
    SpatialGrid g(0.0, 10.0, 1000);
    auto const flat = ScalarField::constant(g, 1.0);
    auto const a = solve_alpha(flat, 0.01);
    CHECK(a.alpha == doctest::Approx(100.0).epsilon(1e-3));
    CHECK(std::abs(a.mean_sq_step - 0.01) < 1e-8 * 0.01);

    auto const b = solve_alpha(flat, 0.005);
    CHECK(b.alpha / a.alpha == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("solve_alpha for linear S agrees with a brute-force moment")
{
    SpatialGrid g(-5.0, 5.0, 1001, Boundary::reflecting);
    double const k = 2.0;
    auto const lin = ScalarField::sample(g, [&](double x) { return k * x; });
    double const kappa = 0.01;
    auto const sol = solve_alpha(lin, kappa);

    // 1/alpha + k^2/alpha^2 = kappa away from the walls
    double const closed = (1 + std::sqrt(1 + 4 * kappa * k * k)) / (2 * kappa);
    CHECK(std::abs(sol.alpha / closed - 1) < 0.05);

    auto const kern = build_exact_kernel(lin, sol.alpha);
    double acc = 0;
    double wsum = 0;
    for (std::size_t i = 0; i < g.n(); ++i)
    {
        auto const m = kernel_moments(kern, i);
        acc += g.weight(i) * (m.covariance + m.mean_step * m.mean_step);
        wsum += g.weight(i);
    }
    CHECK(std::abs(acc / wsum - kappa) < 1e-8 * kappa);
}

TEST_CASE("solve_alpha errors")
{
    SpatialGrid g(0.0, 1.0, 32);
    auto const flat = ScalarField::constant(g, 0.0);
    CHECK_THROWS_AS(solve_alpha(flat, 1e6), NoSolutionError);
    CHECK_THROWS_AS(solve_alpha(flat, -1.0), DomainError);
}

TEST_CASE("composition is the matrix product")
{
    SpatialGrid g(0.0, 1.0, 40);
    auto const s = ScalarField::sample(g, [](double x) { return std::cos(2 * std::numbers::pi * x); });
    auto const a = build_exact_kernel(s, 300.0);
    auto const b = build_exact_kernel(0.5 * s, 500.0);
    auto const ab = compose_kernels(a, b);
    auto const da = a.dense();
    auto const db = b.dense();
    auto const dab = ab.dense();
    std::size_t const n = g.n();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            double sum = 0;
            for (std::size_t m = 0; m < n; ++m)
                sum += da[i * n + m] * db[m * n + j];
            worst = std::max(worst, std::abs(sum - dab[i * n + j]));
        }
    CHECK(worst < 1e-12);
    require_row_stochastic(ab);

    SpatialGrid other(0.0, 2.0, 40);
    CHECK_THROWS_AS(compose_kernels(a, build_exact_kernel(ScalarField::constant(other, 0.0), 1.0)),
                    ConfigurationError);
}

TEST_CASE("composing two constant-S steps adds their covariances")
{
    SpatialGrid g(0.0, 10.0, 1000);
    auto const flat = ScalarField::constant(g, 0.0);
    auto const k = build_exact_kernel(flat, 200.0);
    auto const kk = compose_kernels(k, k);
    CHECK(kernel_moments(kk, 500).covariance == doctest::Approx(2.0 / 200.0).epsilon(1e-6));
    CHECK(kk.alpha() == doctest::Approx(100.0));
}

TEST_CASE("kernel CSV lists coordinates then one row per source node")
{
    SpatialGrid g(0.0, 1.0, 8);
    auto const k = build_exact_kernel(ScalarField::constant(g, 0.0), 10.0);
    std::ostringstream os;
    write_kernel_csv(k, os);
    std::istringstream is(os.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(is, line))
    {
        std::size_t commas = 0;
        for (char ch : line)
            commas += ch == ',';
        CHECK(commas == 7);
        ++lines;
    }
    CHECK(lines == 9);
    CHECK(os.str().rfind("0,0.125,", 0) == 0);
}
