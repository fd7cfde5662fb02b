#include <cmath>

#include "doctest.h"
#include "fito/frechet.hpp"
#include "fito/registry.hpp"
#include "fito/sde.hpp"

using namespace fito;

TEST_CASE("first-order bridge on integral functionals") {
    const Grid g(1.0, 1u << 12);
    const SegmentedPath eta = SegmentedPath::from_function(g, [](double x) { return x + 1.0; });

    SUBCASE("cos-weighted integral: both sides equal int cos d+eta = sin 1") {
        const BridgeResult r = frechet_bridge_first(make_frechet("linear-integral", 1.0), eta);
        // eta' = 1, so the backward integral is int_{-1}^0 cos x dx.
        const double oracle = std::sin(1.0);
        CHECK(std::abs(r.lhs.limit() - oracle) <= 1e-3);
        CHECK(std::abs(r.rhs.limit() - oracle) <= 1e-3);
        CHECK(r.gap() <= 1e-3);
    }
    SUBCASE("linear functional without density") {
        FrechetTestFunctional tf;
        tf.functional = markovian_functional("present", {[](double, double x) { return 2.0 * x; }, {}, {}, {}});
        tf.density = [](const SegmentedPath& p) {
            return SampledFunction::from(-p.grid().horizon(), 0.0, p.grid().segments(), [](double) { return 0.0; });
        };
        const BridgeResult r = frechet_bridge_first(tf, eta);
        CHECK(std::abs(r.lhs.limit()) <= 1e-12);
        CHECK(r.rhs.limit() == 0.0);
    }
    SUBCASE("square integral: eta(0)^2 - eta(-T)^2 = eta(0)^2 + eta(-T)^2 = 1") {
        const BridgeResult r = frechet_bridge_first(make_frechet("square-integral", 1.0), eta);
        CHECK(std::abs(r.lhs.limit() - 1.0) <= 1e-3);
        CHECK(std::abs(r.rhs.limit() - 1.0) <= 1e-3);
    }
}

TEST_CASE("second-order bridge") {
    SUBCASE("smooth path, square integral") {
        const Grid g(1.0, 1u << 12);
        const SegmentedPath eta =
            SegmentedPath::from_function(g, [](double x) { return (x + 1.0) * std::cos(3.0 * x); });
        const BridgeResult r = frechet_bridge_second(make_frechet("square-integral", 1.0), eta);
        const double a = eta.present();
        CHECK(std::abs(r.lhs.limit() - a * a) <= 1e-3);
        CHECK(std::abs(r.rhs.limit() - a * a) <= 1e-3);
        REQUIRE(r.qv);
        CHECK(std::abs(r.qv->extrapolated.values.front()) <= 1e-3);
    }
    SUBCASE("vanishing diagonal reduces to the first-order bridge") {
        const Grid g(1.0, 1u << 10);
        const SegmentedPath eta = SegmentedPath::from_function(g, [](double x) { return std::sin(x) + x + 1.0; });
        const FrechetTestFunctional tf = make_frechet("squared-linear", 1.0);
        const BridgeResult one = frechet_bridge_first(tf, eta);
        const BridgeResult two = frechet_bridge_second(tf, eta);
        CHECK(two.rhs.limit() == doctest::Approx(one.rhs.limit()).epsilon(1e-9));
        CHECK(two.lhs.limit() == one.lhs.limit());
    }
    SUBCASE("Brownian path pinned at -T") {
        const Grid g(1.0, 1u << 16);
        const SegmentedPath eta = brownian_path(g, 1.0, 1);
        const BridgeResult r = frechet_bridge_second(make_frechet("square-integral", 1.0), eta);
        CHECK(r.relative_gap() <= 0.02);
        // The bracket of the sample is close to T.
        CHECK(std::abs(-r.qv->value.values.front() - 1.0) <= 0.05);
    }
}
