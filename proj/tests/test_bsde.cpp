#include <cmath>

#include "doctest.h"
#include "fito/bsde.hpp"
#include "fito/error.hpp"
#include "fito/registry.hpp"

using namespace fito;

namespace {

Coefficient constant(double c) {
    return [c](double, const PathView&) { return c; };
}

SdeProblem brownian(double eta0, std::size_t m = 50) {
    return SdeProblem{constant(0.0), constant(1.0), 0.0, SegmentedPath::constant(Grid(1.0, m), eta0)};
}

McConfig mc(std::size_t paths, std::uint64_t seed) {
    McConfig c;
    c.paths = paths;
    c.seed = seed;
    return c;
}

Weight unit_weight() {
    return Weight{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
}

}  // namespace

TEST_CASE("basis size") {
    const auto e = monomial_exponents(2, 2);
    CHECK(e.size() == 6);
    CHECK(e.front() == std::vector<unsigned>{0, 0});
    CHECK(monomial_exponents(1, 3).size() == 4);
    CHECK(RegressionBasis::present_value(3).size() == 4);
}

TEST_CASE("zero driver, linear terminal: martingale") {
    BsdeDriver drv;
    drv.H = [](const PathView& w) { return w.present; };
    const BsdeSolution s = solve_bsde(brownian(0.8), drv, RegressionBasis::present_value(2), mc(20000, 1));
    CHECK(std::abs(s.y0.value - 0.8) <= 3.0 * s.y0.stderr_ + 1e-12);
    CHECK(s.z0 == doctest::Approx(1.0).epsilon(0.05));
    CHECK_FALSE(s.implicit);
    CHECK(s.steps == 50);
}

TEST_CASE("zero driver, quadratic terminal") {
    BsdeDriver drv;
    drv.H = [](const PathView& w) { return w.present * w.present; };
    const BsdeSolution s = solve_bsde(brownian(0.5), drv, RegressionBasis::present_value(2), mc(40000, 2));
    // E[(0.5 + W_1)^2] = 0.25 + 1
    CHECK(std::abs(s.y0.value - 1.25) <= 3.0 * s.y0.stderr_ + 2.0 * s.dt);
    CHECK(s.z_energy > 0.0);
    CHECK(std::isfinite(s.z_bound_ratio));
}

TEST_CASE("linear driver alpha y") {
    const double alpha = 0.5;
    BsdeDriver drv;
    drv.F = [alpha](double, const PathView&, double y, double) { return alpha * y; };
    drv.H = [](const PathView& w) { return w.present; };
    drv.lipschitz = alpha;
    const BsdeSolution s = solve_bsde(brownian(1.0), drv, RegressionBasis::present_value(2), mc(40000, 3));
    CHECK(std::abs(s.y0.value - std::exp(alpha)) <= 3.0 * s.y0.stderr_ + 2.0 * s.dt);
}

TEST_CASE("implicit steps for a large Lipschitz constant") {
    BsdeDriver drv;
    drv.F = [](double, const PathView&, double y, double) { return -10.0 * y; };
    drv.H = [](const PathView& w) { return w.present; };
    drv.lipschitz = 10.0;
    const BsdeSolution s = solve_bsde(brownian(1.0), drv, RegressionBasis::present_value(1), mc(5000, 4));
    CHECK(s.implicit);
    CHECK(std::abs(s.y0.value - std::exp(-10.0)) <= 3.0 * s.y0.stderr_ + 0.01);
}

TEST_CASE("collinear statistics are rejected") {
    BsdeDriver drv;
    drv.H = [](const PathView& w) { return w.present; };
    RegressionBasis basis;
    basis.degree = 1;
    basis.dimension = 2;
    basis.statistics = [](double, const PathView& w, std::span<double> out) {
        out[0] = w.present;
        out[1] = 2.0 * w.present + 1.0;
    };
    CHECK_THROWS_AS(solve_bsde(brownian(0.0, 10), drv, basis, mc(2000, 5)), RankDeficiencyError);
}

TEST_CASE("results do not depend on the worker count") {
    BsdeDriver drv;
    drv.F = [](double, const PathView&, double y, double z) { return 0.1 * y + 0.05 * z; };
    drv.H = [](const PathView& w) { return std::sin(w.present); };
    McConfig c = mc(3000, 6);
    c.workers = 1;
    const BsdeSolution a = solve_bsde(brownian(0.3, 20), drv, RegressionBasis::present_value(3), c);
    c.workers = 4;
    const BsdeSolution b = solve_bsde(brownian(0.3, 20), drv, RegressionBasis::present_value(3), c);
    CHECK(a.y0.value == b.y0.value);
    CHECK(a.y0.stderr_ == b.y0.stderr_);
    CHECK(a.z0 == b.z0);
}

TEST_CASE("cylindrical system") {
    CylindricalPack pack;
    pack.weights = {unit_weight()};
    pack.b = [](double, std::span<const double>) { return 0.0; };
    pack.sigma = [](double, std::span<const double>) { return 1.0; };

    SUBCASE("quadratic terminal from 0") {
        pack.H = [](std::span<const double> x) { return x[0] * x[0]; };
        const double x0[] = {0.0};
        const BsdeSolution s = solve_fbsde_cylindrical(pack, 0.0, x0, 1.0, 1.0 / 50, 2, mc(40000, 7));
        CHECK(std::abs(s.y0.value - 1.0) <= 3.0 * s.y0.stderr_ + 2.0 / 50);
    }
    SUBCASE("linear terminal") {
        pack.H = [](std::span<const double> x) { return 3.0 * x[0] - 1.0; };
        const double x0[] = {0.4};
        const BsdeSolution s = solve_fbsde_cylindrical(pack, 0.0, x0, 1.0, 1.0 / 50, 1, mc(20000, 8));
        CHECK(std::abs(s.y0.value - 0.2) <= 3.0 * s.y0.stderr_ + 1e-12);
    }
    SUBCASE("windows and statistics give the same Y0") {
        const auto cf = make_cylindrical("cyl-movavg", 1.0);
        const Weight w = cf->weights()[0];
        pack.weights = {w};
        pack.H = [](std::span<const double> x) { return x[0] * x[0]; };
        const Grid g(1.0, 50);
        const SegmentedPath eta = SegmentedPath::from_function(g, [](double x) { return 0.5 + x; });
        const double t = 0.0;
        const std::vector<double> x = cylindrical_statistic(*cf, t, eta);

        CylindricalFunctional stats("stats", pack.weights, cf->outer());
        BsdeDriver drv;
        drv.H = [stats](const PathView& win) {
            const double s = stats.statistic(1.0, win)[0];
            return s * s;
        };
        const McConfig c = mc(20000, 9);
        const BsdeSolution on_windows = solve_bsde(SdeProblem{constant(0.0), constant(1.0), t, eta}, drv,
                                                   RegressionBasis::cylindrical(*cf, 2), c);
        const BsdeSolution on_stats = solve_fbsde_cylindrical(pack, t, x, 1.0, g.step(), 2, c);
        const double combined = std::hypot(on_windows.y0.stderr_, on_stats.y0.stderr_);
        CHECK(std::abs(on_windows.y0.value - on_stats.y0.value) <= 2.0 * combined);
    }
}
