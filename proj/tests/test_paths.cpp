#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fito/error.hpp"
#include "fito/paths.hpp"
#include "fito/sde.hpp"

using namespace fito;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("fito_test_" + name);
}

}  // namespace

TEST_CASE("grid nodes and alignment") {
    const Grid g(1.0, 8);
    CHECK(g.step() == 0.125);
    CHECK(g.node(0) == -1.0);
    CHECK(g.node(8) == 0.0);
    CHECK(g.index_of(-0.5) == 4);
    CHECK(g.steps_in(0.375) == 3);
    CHECK_THROWS_AS(g.index_of(-0.3), AlignmentError);
    CHECK_THROWS_AS(g.index_of(0.25), DomainError);
    CHECK_THROWS_AS(g.steps_in(0.1), AlignmentError);
}

TEST_CASE("window_at on X_s = s") {
    // T = 1, M = 4, trajectory on [-1, 1] started at t = 0.
    std::vector<double> values;
    for (int k = 0; k <= 8; ++k) values.push_back(-1.0 + 0.25 * k);
    const Trajectory X(0.0, 0.25, 4, values);
    const SegmentedPath w = window_at(X, 0.5);
    CHECK(w.present() == 0.5);
    for (std::size_t j = 0; j <= 4; ++j) CHECK(w.past()[j] == doctest::Approx(0.5 + w.grid().node(j)));
    CHECK_THROWS_AS(window_at(X, 0.3), AlignmentError);
    CHECK_THROWS_AS(window_at(X, 1.25), DomainError);
    CHECK_THROWS_AS(window_at(X, -0.25), DomainError);
}

TEST_CASE("window_at on a constant trajectory") {
    const Trajectory X(0.0, 0.25, 4, std::vector<double>(9, 3.5));
    for (double s : {0.0, 0.25, 0.5, 1.0}) {
        const SegmentedPath w = window_at(X, s);
        CHECK(w.present() == 3.5);
        for (double v : w.past()) CHECK(v == 3.5);
    }
}

TEST_CASE("window at the initial time reproduces the initial path") {
    const Grid g(1.0, 64);
    const SegmentedPath eta = SegmentedPath::from_function(g, [](double x) { return std::sin(3.0 * x) + 0.2; });
    const SdeProblem prob{[](double, const PathView&) { return 0.1; }, [](double, const PathView&) { return 1.0; },
                          0.25, eta};
    const Trajectory X = simulate_path(prob, 11, 0);
    const SegmentedPath w = window_at(X, 0.25);
    CHECK(w.present() == eta.present());
    for (std::size_t j = 0; j <= 64; ++j) CHECK(w.past()[j] == eta.past()[j]);
}

TEST_CASE("shift_past") {
    const Grid g(1.0, 8);
    const SegmentedPath eta = SegmentedPath::from_function(g, [](double x) { return x + 1.0; });

    SUBCASE("linear path, constant-left") {
        const SegmentedPath s = shift_past(eta, 0.25);
        CHECK(s.present() == eta.present());
        for (std::size_t j = 0; j <= 8; ++j) {
            const double x = g.node(j);
            const double expected = x >= -0.75 ? x + 0.75 : 0.0;
            CHECK(s.past()[j] == doctest::Approx(expected));
        }
    }
    SUBCASE("zero extension agrees because eta(-T) = 0") {
        const SegmentedPath a = shift_past(eta, 0.25, ExtensionMode::zero);
        const SegmentedPath b = shift_past(eta, 0.25, ExtensionMode::constant_left);
        for (std::size_t j = 0; j <= 8; ++j) CHECK(a.past()[j] == b.past()[j]);
    }
    SUBCASE("modes differ when eta(-T) != 0") {
        const SegmentedPath one = SegmentedPath::constant(g, 1.0);
        CHECK(shift_past(one, 0.25, ExtensionMode::zero).past()[0] == 0.0);
        CHECK(shift_past(one, 0.25, ExtensionMode::constant_left).past()[0] == 1.0);
    }
    SUBCASE("eps = 0 is the identity") {
        const SegmentedPath s = shift_past(eta, 0.0);
        for (std::size_t j = 0; j <= 8; ++j) CHECK(s.past()[j] == eta.past()[j]);
    }
    SUBCASE("constants are shift invariant under constant-left") {
        const SegmentedPath c = SegmentedPath::constant(g, -2.0);
        const SegmentedPath s = shift_past(c, 0.5);
        for (double v : s.past()) CHECK(v == -2.0);
    }
    SUBCASE("zero path is invariant under either mode") {
        const SegmentedPath z = SegmentedPath::constant(g, 0.0, ExtensionMode::zero);
        const SegmentedPath s = shift_past(z, 0.5);
        for (double v : s.past()) CHECK(v == 0.0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(shift_past(eta, 0.1), AlignmentError);
        CHECK_THROWS_AS(shift_past(eta, -0.25), DomainError);
    }
}

TEST_CASE("bump_present") {
    const Grid g(1.0, 4);
    const SegmentedPath eta = SegmentedPath::constant(g, 2.0);
    const SegmentedPath b = bump_present(eta, 0.5);
    CHECK(b.present() == 2.5);
    CHECK(b.left_limit() == 2.0);
    CHECK_FALSE(b.is_continuous());
    for (std::size_t j = 0; j <= 4; ++j) CHECK(b.past()[j] == eta.past()[j]);
    CHECK(bump_present(eta, 0.0).present() == 2.0);
    const SegmentedPath back = bump_present(bump_present(eta, 0.5), -0.5);
    CHECK(back.present() == eta.present());
    CHECK(back.is_continuous());
}

TEST_CASE("real-line extensions") {
    const SampledFunction f = SampledFunction::from(0.0, 1.0, 10, [](double x) { return x; });
    const RealLineExtension jbar = extend(f, Extension::Jbar);
    CHECK(jbar(2.0) == 1.0);
    CHECK(jbar(-1.0) == 0.0);
    const RealLineExtension j = extend(f, Extension::J);
    CHECK(j(-1.0) == 0.0);
    CHECK(j(2.0) == 0.0);
    CHECK(j(0.5) == doctest::Approx(0.5));

    const SampledFunction c = SampledFunction::from(0.0, 1.0, 10, [](double) { return 4.0; });
    const RealLineExtension cbar = extend(c, Extension::Jbar);
    for (double x : {0.0, 0.3, 1.0, 7.0}) CHECK(cbar(x) == 4.0);
    CHECK(extend(c, Extension::J)(-3.0) == 4.0);
}

TEST_CASE("path CSV round trip keeps a jump at 0") {
    const Grid g(2.0, 16);
    std::vector<double> past;
    for (std::size_t j = 0; j <= 16; ++j) past.push_back(std::cos(g.node(j)));
    const SegmentedPath eta = SegmentedPath::from_parts(g, past, 5.0);
    const auto file = temp_file("path.csv");
    write_path_csv(file, eta);
    const SegmentedPath back = read_path_csv(file);
    CHECK(back.grid() == g);
    CHECK(back.present() == 5.0);
    for (std::size_t j = 0; j <= 16; ++j) CHECK(back.past()[j] == eta.past()[j]);
    std::filesystem::remove(file);
}

TEST_CASE("curve CSV round trip") {
    const std::vector<double> xs{0.0, 0.5, 1.0, 1.5};
    const std::vector<double> vs{1.0, -2.0, 0.25, 1e-17};
    const auto file = temp_file("curve.csv");
    write_curve_csv(file, "s", xs, vs);
    const SampledFunction f = read_curve_csv(file);
    CHECK(f.a == 0.0);
    CHECK(f.step == 0.5);
    REQUIRE(f.values.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(f.values[i] == vs[i]);
    std::filesystem::remove(file);
}

TEST_CASE("missing CSV is an I/O error") {
    CHECK_THROWS_AS(read_path_csv("/nonexistent/fito/path.csv"), IoError);
}
