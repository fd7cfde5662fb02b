#include <cmath>

#include "doctest.h"
#include "fito/registry.hpp"
#include "fito/verify.hpp"

using namespace fito;

namespace {

Coefficient constant(double c) {
    return [c](double, const PathView&) { return c; };
}

McConfig mc(std::size_t paths, std::uint64_t seed) {
    McConfig c;
    c.paths = paths;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("heat functional against the classical Ito identity") {
    const Grid g(1.0, 1u << 12);
    const double dt = g.step();
    const PathFunctional u = make_functional("cyl-heat", 1.0);
    const SdeProblem prob{constant(0.0), constant(1.0), 0.0, SegmentedPath::constant(g, 0.0)};
    for (std::uint64_t p = 0; p < 10; ++p) {
        const Trajectory X = simulate_path(prob, 21, p);
        const TrajectoryView v = X.view();
        const ItoReport r = ito_residual(u, v);
        // X_t^2 = X_0^2 + 2 sum X dX + sum (dX)^2 written out on the samples.
        double fwd = 0.0, qv = 0.0;
        for (std::size_t k = 0; k < v.steps(); ++k) {
            const double dx = v.at_step(k + 1) - v.at_step(k);
            fwd += 2.0 * v.at_step(k) * dx;
            qv += dx * dx;
        }
        CHECK(r.forward.back() == doctest::Approx(fwd).epsilon(1e-10));
        CHECK(r.quadratic.back() == doctest::Approx(0.5 * 2.0 * qv).epsilon(1e-10));
        CHECK(r.time_horizontal.back() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(r.max_abs_residual <= 10.0 * std::sqrt(dt));
    }
}

TEST_CASE("Markovian functional matches the classical formula") {
    const Grid g(1.0, 1024);
    const MarkovianFunction fn{[](double t, double x) { return std::exp(t) * std::sin(x) + x * x * x; },
                               [](double t, double x) { return std::exp(t) * std::sin(x); },
                               [](double t, double x) { return std::exp(t) * std::cos(x) + 3.0 * x * x; },
                               [](double t, double x) { return -std::exp(t) * std::sin(x) + 6.0 * x; }};
    const PathFunctional u = markovian_functional("m", fn);
    const SdeProblem prob{[](double, const PathView& w) { return -w.present; }, constant(0.8), 0.0,
                          SegmentedPath::constant(g, 0.3)};
    for (std::uint64_t p = 0; p < 5; ++p) {
        const Trajectory X = simulate_path(prob, 2, p);
        const ItoReport r = ito_residual(u, X.view());
        const std::vector<double> classical = classical_ito_residual(fn, X.view());
        REQUIRE(classical.size() == r.residual.size());
        for (std::size_t k = 0; k < classical.size(); ++k) CHECK(std::abs(classical[k] - r.residual[k]) <= 1e-12);
    }
}

TEST_CASE("bounded variation trajectory") {
    const PathFunctional u = make_functional("cyl-movavg", 1.0);
    double previous = 0.0;
    for (std::size_t m : {256u, 512u, 1024u}) {
        const Grid g(1.0, m);
        const SdeProblem prob{[](double s, const PathView&) { return std::cos(3.0 * s); }, constant(0.0), 0.0,
                              SegmentedPath::from_function(g, [](double x) { return std::sin(x); })};
        const ItoReport r = ito_residual(u, simulate_path(prob, 1, 0).view());
        CHECK(std::abs(r.quadratic.back()) <= 10.0 * g.step());
        CHECK(r.max_abs_residual <= 10.0 * g.step());
        if (previous > 0.0) CHECK(r.max_abs_residual < previous);
        previous = r.max_abs_residual;
    }
}

TEST_CASE("subsampling keeps every factor-th node") {
    const Grid g(1.0, 64);
    const SdeProblem prob{constant(0.0), constant(1.0), 0.0, brownian_path(g, 1.0, 3)};
    const Trajectory X = simulate_path(prob, 5, 0);
    const Subsampled s = subsample(X.view(), 4);
    CHECK(s.view.window_segments == 16);
    CHECK(s.view.step == doctest::Approx(4.0 * g.step()));
    CHECK(s.view.steps() == 16);
    for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(s.values[i] == X.values()[4 * i]);
    CHECK(s.noise[0] == doctest::Approx(X.noise()[0] + X.noise()[1] + X.noise()[2] + X.noise()[3]));
}

TEST_CASE("convergence studies") {
    CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 6.0, 12.0}) == doctest::Approx(1.0));
    CHECK(loglog_slope({1.0, 4.0, 16.0}, {1.0, 2.0, 4.0}) == doctest::Approx(0.5));

    SUBCASE("smooth deterministic path: first order") {
        const Grid g(1.0, 2048);
        const SdeProblem prob{[](double s, const PathView&) { return std::cos(3.0 * s); }, constant(0.0), 0.0,
                              SegmentedPath::from_function(g, [](double x) { return std::sin(x); })};
        const ConvergenceStudy s = convergence_study(make_functional("cyl-movavg", 1.0), prob, 4, mc(2, 1));
        REQUIRE(s.rows.size() == 4);
        CHECK(s.rows.front().dt > s.rows.back().dt);
        CHECK(std::abs(s.slope - 1.0) <= 0.3);
    }
    SUBCASE("Brownian heat with the model bracket: order one half") {
        const Grid g(1.0, 4096);
        const SdeProblem prob{constant(0.0), constant(1.0), 0.0, SegmentedPath::constant(g, 0.0)};
        const ConvergenceStudy s =
            convergence_study(make_functional("cyl-heat", 1.0), prob, 4, mc(100, 2), QvMode::model);
        CHECK_FALSE(s.identically_zero);
        CHECK(std::abs(s.slope - 0.5) <= 0.2);
    }
    SUBCASE("constant functional") {
        const Grid g(1.0, 512);
        const PathFunctional u("const", [](double, const PathView&) { return 2.0; },
                               [](double, const PathView&) { return DerivativeSet{}; });
        const SdeProblem prob{constant(0.0), constant(1.0), 0.0, SegmentedPath::constant(g, 0.0)};
        const ConvergenceStudy s = convergence_study(u, prob, 3, mc(5, 3));
        CHECK(s.identically_zero);
        for (const auto& row : s.rows) CHECK(row.rms_max_residual == 0.0);
    }
}
