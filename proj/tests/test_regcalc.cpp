#include <cmath>

#include "doctest.h"
#include "fito/error.hpp"
#include "fito/regcalc.hpp"
#include "fito/sde.hpp"

using namespace fito;

namespace {

SampledFunction sample(double a, double b, std::size_t m, double (*fn)(double)) {
    return SampledFunction::from(a, b, m, fn);
}

// sum_j f(x_{j+1}) (g(x_{j+1}) - g(x_j)), the Stieltjes sum of f dg over ]a,b].
double stieltjes_right(const SampledFunction& f, const SampledFunction& g) {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < f.values.size(); ++j) s += f.values[j + 1] * (g.values[j + 1] - g.values[j]);
    return s;
}

}  // namespace

TEST_CASE("eps schedules") {
    CHECK(EpsSchedule::dyadic(4).multiples == std::vector<std::size_t>{8, 4, 2, 1});
    CHECK(EpsSchedule::parse("dyadic:3").multiples == std::vector<std::size_t>{4, 2, 1});
    CHECK(EpsSchedule::parse("6,3,1").multiples == std::vector<std::size_t>{6, 3, 1});
    CHECK_THROWS_AS(EpsSchedule::parse("dyadic:0"), UsageError);
    CHECK_THROWS_AS(EpsSchedule::parse("1,2"), UsageError);
    CHECK_THROWS_AS(EpsSchedule::parse("4"), UsageError);
    CHECK_THROWS_AS(EpsSchedule::parse("abc"), UsageError);
}

TEST_CASE("richardson limit removes a linear error term") {
    const std::vector<double> eps{0.4, 0.2, 0.1};
    std::vector<double> v;
    for (double e : eps) v.push_back(3.0 + 2.0 * e);
    CHECK(richardson_limit(eps, v) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(richardson_limit({0.2, 0.1}, {1.4, 1.2}) == doctest::Approx(1.0));
    CHECK(converges({1.0, 0.5, 0.25, 0.125}));
    CHECK_FALSE(converges({1.0, 1.001, 0.99, 1.05}));
}

TEST_CASE("forward integral: constant integrand telescopes to f(b)") {
    const auto g = sample(-1.0, 0.0, 256, [](double) { return 1.0; });
    const auto f = sample(-1.0, 0.0, 256, [](double x) { return x + 1.0; });
    const RegIntegralResult r = forward_integral(g, f, -1.0, 0.0);
    for (double v : r.per_eps) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.extrapolated == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward integral of s^2 against s is -2/3") {
    const std::size_t m = 1024;
    const auto g = sample(-1.0, 0.0, m, [](double x) { return x * x; });
    const auto f = sample(-1.0, 0.0, m, [](double x) { return x; });
    const RegIntegralResult r = forward_integral(g, f, -1.0, 0.0);
    // g(a) f(a) + int_{]-1,0]} s^2 ds
    const double oracle = -1.0 + 1.0 / 3.0;
    const double step = 1.0 / m;
    CHECK(std::abs(r.extrapolated - oracle) <= 5.0 * step * (1.0 + 1.0 * 1.0));
    CHECK(std::abs(r.value - oracle) <= 5.0 * step * 2.0);
    CHECK(r.converged);
    CHECK(r.per_eps.size() == 4);
    CHECK(r.eps.back() == doctest::Approx(step));
}

TEST_CASE("forward integral at eps = step is the left-point Stieltjes sum") {
    const auto g = sample(0.0, 1.0, 128, [](double x) { return std::exp(x); });
    const auto f = brownian_sample(0.0, 1.0, 128, 1.0, 5);
    EpsSchedule one{{2, 1}, false};
    const RegIntegralResult r = forward_integral(g, f, 0.0, 1.0, one);
    double s = g.values[0] * f.values[0];
    for (std::size_t j = 0; j < 128; ++j) s += g.values[j] * (f.values[j + 1] - f.values[j]);
    CHECK(r.value == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("integration by parts with a Brownian integrator") {
    const std::size_t m = 4096;
    const double step = 1.0 / m;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = sample(0.0, 1.0, m, [](double x) { return std::cos(3.0 * x) + x; });
        const auto f = brownian_sample(0.0, 1.0, m, 1.0, seed);
        const double tv = g.total_variation();
        const double scale = 10.0 * std::sqrt(step) * (1.0 + g.sup_norm() + tv);

        const RegIntegralResult fwd = forward_integral(g, f, 0.0, 1.0);
        const double rhs_minus = g.values.back() * f.values.back() - stieltjes_right(f, g);
        CHECK(std::abs(fwd.value - rhs_minus) <= scale);

        const RegIntegralResult bwd = backward_integral(g, f, 0.0, 1.0);
        // f is continuous, so f(b-) = f(b) and f(s-) = f(s).
        CHECK(std::abs(bwd.value - rhs_minus) <= scale);
    }
}

TEST_CASE("integration by parts on polynomials") {
    const std::size_t m = 1024;
    const double step = 1.0 / m;
    const auto g = sample(-1.0, 0.0, m, [](double x) { return 1.0 + x - 2.0 * x * x; });
    const auto f = sample(-1.0, 0.0, m, [](double x) { return x * x * x + 0.5 * x; });
    // int_{]-1,0]} f dg with f = x^3 + x/2, g' = 1 - 4x:
    // int (x^3 + x/2)(1 - 4x) dx = [x^4/4 + x^2/4 - 4x^5/5 - 2x^3/3] from -1 to 0.
    const double fdg = -(0.25 + 0.25 + 0.8 + 2.0 / 3.0);
    const double expected = 1.0 * 0.0 - fdg;
    CHECK(std::abs(forward_integral(g, f, -1.0, 0.0).extrapolated - expected) <= 10.0 * step);
    CHECK(std::abs(backward_integral(g, f, -1.0, 0.0).extrapolated - expected) <= 10.0 * step);
}

TEST_CASE("backward integral") {
    const std::size_t m = 1024;
    const double step = 1.0 / m;
    SUBCASE("coincides with the forward integral on smooth data") {
        const auto g = sample(-1.0, 0.0, m, [](double x) { return std::sin(2.0 * x); });
        const auto f = sample(-1.0, 0.0, m, [](double x) { return std::exp(x); });
        const double fwd = forward_integral(g, f, -1.0, 0.0).extrapolated;
        const double bwd = backward_integral(g, f, -1.0, 0.0).extrapolated;
        CHECK(std::abs(fwd - bwd) <= 10.0 * step);
    }
    SUBCASE("g = 2 eta, f = eta = x + 1 gives 1") {
        const auto f = sample(-1.0, 0.0, m, [](double x) { return x + 1.0; });
        const auto g = sample(-1.0, 0.0, m, [](double x) { return 2.0 * (x + 1.0); });
        CHECK(std::abs(backward_integral(g, f, -1.0, 0.0).extrapolated - 1.0) <= 10.0 * step * step);
    }
    SUBCASE("zero integrand") {
        const auto g = sample(-1.0, 0.0, m, [](double) { return 0.0; });
        const auto f = brownian_sample(-1.0, 0.0, m, 1.0, 9);
        const RegIntegralResult r = backward_integral(g, f, -1.0, 0.0);
        CHECK(r.value == 0.0);
        CHECK(r.extrapolated == 0.0);
    }
    SUBCASE("grid mismatch") {
        const auto g = sample(-1.0, 0.0, 64, [](double x) { return x; });
        const auto f = sample(-1.0, 0.0, 128, [](double x) { return x; });
        CHECK_THROWS_AS(backward_integral(g, f, -1.0, 0.0), AlignmentError);
    }
}

TEST_CASE("backward integral against a measure") {
    const std::size_t m = 1024;
    const auto f = sample(-1.0, 0.0, m, [](double x) { return x * x; });
    SUBCASE("Dirac mass returns the left derivative") {
        MeasureOnInterval mu;
        mu.atoms = {{-0.5, 1.0}};
        const RegIntegralResult r = backward_integral_measure(mu, f);
        // One-sided difference (f(x) - f(x - h)) / h = 2x - h for f = x^2.
        const double h = 1e-6;
        const double oracle = (0.25 - (-0.5 - h) * (-0.5 - h)) / h;
        CHECK(r.extrapolated == doctest::Approx(oracle).epsilon(1e-5));
        CHECK(r.extrapolated == doctest::Approx(-1.0).epsilon(1e-9));
    }
    SUBCASE("Dirac mass at 0 on a smooth path") {
        const auto s = sample(-1.0, 0.0, m, [](double x) { return std::sin(x); });
        MeasureOnInterval mu;
        mu.atoms = {{0.0, 1.0}};
        CHECK(backward_integral_measure(mu, s).extrapolated == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("pure density matches the backward integral") {
        MeasureOnInterval mu;
        mu.density = sample(-1.0, 0.0, m, [](double x) { return std::cos(x); });
        const RegIntegralResult a = backward_integral_measure(mu, f);
        const RegIntegralResult b = backward_integral(mu.density, f, -1.0, 0.0);
        for (std::size_t e = 0; e < a.per_eps.size(); ++e) {
            CHECK(a.per_eps[e] == doctest::Approx(b.per_eps[e]).epsilon(1e-12));
        }
    }
    SUBCASE("atom outside the interval") {
        MeasureOnInterval mu;
        mu.atoms = {{0.5, 1.0}};
        CHECK_THROWS_AS(backward_integral_measure(mu, f), DomainError);
    }
}

TEST_CASE("covariation") {
    SUBCASE("Lipschitz paths have zero quadratic variation") {
        const auto f = sample(-1.0, 1.0, 4096, [](double x) { return x; });
        const CovariationResult q = quadratic_variation(f, -1.0, 1.0);
        for (double v : q.extrapolated.values) CHECK(std::abs(v) <= 1e-3);
    }
    SUBCASE("Brownian quadratic variation is s") {
        const auto w = brownian_sample(0.0, 1.0, 1u << 16, 1.0, 2024);
        const CovariationResult q = quadratic_variation(w, 0.0, 1.0);
        for (double s : {0.25, 0.5, 1.0}) {
            const std::size_t j = static_cast<std::size_t>(std::llround(s * (1u << 16)));
            CHECK(std::abs(q.value.values[j] - s) <= 0.05 * s);
        }
    }
    SUBCASE("bounded variation against continuous vanishes") {
        const auto v = sample(0.0, 1.0, 1u << 14, [](double x) { return std::abs(x - 0.5) + std::sin(4.0 * x); });
        const auto y = brownian_sample(0.0, 1.0, 1u << 14, 1.0, 3);
        const CovariationResult c = covariation(v, y, 0.0, 1.0);
        for (double x : c.value.values) CHECK(std::abs(x) <= 1e-3);
    }
    SUBCASE("symmetric bit for bit") {
        const auto f = brownian_sample(-1.0, 1.0, 2048, 1.0, 4);
        const auto g = brownian_sample(-1.0, 1.0, 2048, 0.5, 5);
        const CovariationResult a = covariation(f, g, -1.0, 1.0);
        const CovariationResult b = covariation(g, f, -1.0, 1.0);
        CHECK(a.value.values == b.value.values);
        CHECK(a.extrapolated.values == b.extrapolated.values);
    }
    SUBCASE("signed curve starts at 0 and is decreasing to the left") {
        const auto w = brownian_sample(-1.0, 1.0, 8192, 1.0, 6);
        const CovariationResult q = quadratic_variation(w, -1.0, 1.0);
        CHECK(q.value.values[4096] == 0.0);
        CHECK(q.value.values.front() < 0.0);
        CHECK(q.value.values.back() > 0.0);
    }
    SUBCASE("interval must contain 0") {
        const auto f = sample(1.0, 2.0, 64, [](double x) { return x; });
        CHECK_THROWS_AS(quadratic_variation(f, 1.0, 2.0), DomainError);
    }
}

TEST_CASE("Stieltjes integral") {
    const std::size_t m = 1000;
    SUBCASE("constant integrand gives f(b)") {
        const auto g = sample(-1.0, 0.0, m, [](double) { return 1.0; });
        const auto f = sample(-1.0, 0.0, m, [](double x) { return std::exp(x); });
        CHECK(stieltjes_integral(g, f, -1.0, 0.0, StieltjesConvention::left_point) == doctest::Approx(1.0));
        CHECK(stieltjes_integral(g, f, -1.0, 0.0, StieltjesConvention::point) == doctest::Approx(1.0));
    }
    SUBCASE("s^2 against s") {
        const auto g = sample(-1.0, 0.0, m, [](double x) { return x * x; });
        const auto f = sample(-1.0, 0.0, m, [](double x) { return x; });
        const double v = stieltjes_integral(g, f, -1.0, 0.0, StieltjesConvention::left_point);
        CHECK(std::abs(v - (-2.0 / 3.0)) <= 2.0 / m);
    }
    SUBCASE("single jump") {
        const double x0 = -0.3;
        const double jump = 2.5;
        const auto g = sample(-1.0, 0.0, m, [](double x) { return std::cos(x); });
        const SampledFunction f = SampledFunction::from(-1.0, 0.0, m, [&](double x) {
            return x >= x0 - 1e-12 ? 1.0 + jump : 1.0;
        });
        const double expected = std::cos(-1.0) * 1.0 + std::cos(x0) * jump;
        CHECK(stieltjes_integral(g, f, -1.0, 0.0, StieltjesConvention::point) ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(stieltjes_integral(g, f, -1.0, 0.0, StieltjesConvention::left_point) - expected) <=
              jump * 1.0 / m);
    }
}
