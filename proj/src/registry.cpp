#include "fito/registry.hpp"

#include <cmath>

#include "fito/error.hpp"

namespace fito {

double trapezoid(std::span<const double> values, double step) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t j = 1; j + 1 < values.size(); ++j) s += values[j];
    return s * step;
}

namespace {

Weight constant_weight() {
    return Weight{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                  0.0};
}

Weight exp_weight() {
    return Weight{[](double u) { return std::exp(-u); }, [](double u) { return -std::exp(-u); },
                  [](double u) { return std::exp(-u); }, -1.0};
}

Weight cos_weight() {
    return Weight{[](double u) { return std::cos(u); }, [](double u) { return -std::sin(u); },
                  [](double u) { return -std::cos(u); }, 0.0};
}

CylindricalFunctional cyl_heat(double horizon) {
    OuterFunction psi;
    psi.value = [horizon](double t, std::span<const double> x) { return x[0] * x[0] + horizon - t; };
    psi.dt = [](double, std::span<const double>) { return -1.0; };
    psi.grad = [](double, std::span<const double> x, std::span<double> g) { g[0] = 2.0 * x[0]; };
    psi.hess = [](double, std::span<const double>, std::span<double> h) { h[0] = 2.0; };
    return CylindricalFunctional("cyl-heat", {constant_weight()}, psi);
}

CylindricalFunctional cyl_movavg(double horizon) {
    // int_t^T exp(-2u) du
    auto tail = [horizon](double t) { return 0.5 * (std::exp(-2.0 * t) - std::exp(-2.0 * horizon)); };
    OuterFunction psi;
    psi.value = [tail](double t, std::span<const double> x) { return x[0] * x[0] + tail(t); };
    psi.dt = [](double t, std::span<const double>) { return -std::exp(-2.0 * t); };
    psi.grad = [](double, std::span<const double> x, std::span<double> g) { g[0] = 2.0 * x[0]; };
    psi.hess = [](double, std::span<const double>, std::span<double> h) { h[0] = 2.0; };
    return CylindricalFunctional("cyl-movavg", {exp_weight()}, psi);
}

CylindricalFunctional cyl_pair() {
    OuterFunction psi;
    psi.value = [](double t, std::span<const double> x) { return x[0] * x[1] + std::sin(x[1]) + t; };
    psi.dt = [](double, std::span<const double>) { return 1.0; };
    psi.grad = [](double, std::span<const double> x, std::span<double> g) {
        g[0] = x[1];
        g[1] = x[0] + std::cos(x[1]);
    };
    psi.hess = [](double, std::span<const double> x, std::span<double> h) {
        h[0] = 0.0;
        h[1] = 1.0;
        h[2] = 1.0;
        h[3] = -std::sin(x[1]);
    };
    return CylindricalFunctional("cyl-pair", {constant_weight(), cos_weight()}, psi);
}

// int_{-T}^0 cos(x) gamma(x) dx by the trapezoid rule.
double cos_moment(const PathView& eta) {
    double s = 0.0;
    const std::size_t m = eta.segments();
    for (std::size_t j = 0; j <= m; ++j) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        s += w * std::cos(eta.node(j)) * eta.past[j];
    }
    return s * eta.step;
}

// int_{-T}^0 sin(x) gamma(x) dx
double sin_moment(const PathView& eta) {
    double s = 0.0;
    const std::size_t m = eta.segments();
    for (std::size_t j = 0; j <= m; ++j) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        s += w * std::sin(eta.node(j)) * eta.past[j];
    }
    return s * eta.step;
}

SampledFunction scaled_path(const SegmentedPath& eta, double factor) {
    SampledFunction f = eta.as_sampled();
    for (double& v : f.values) v *= factor;
    return f;
}

SampledFunction sampled_cos(const SegmentedPath& eta, double factor) {
    SampledFunction f = eta.as_sampled();
    for (std::size_t j = 0; j < f.values.size(); ++j) f.values[j] = factor * std::cos(f.node(j));
    return f;
}

SampledFunction sampled_constant(const SegmentedPath& eta, double c) {
    SampledFunction f = eta.as_sampled();
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
}

FrechetTestFunctional square_integral(double horizon) {
    FrechetTestFunctional tf;
    tf.functional = PathFunctional(
        "square-integral",
        [](double, const PathView& eta) {
            std::vector<double> sq(eta.past.begin(), eta.past.end());
            for (double& v : sq) v *= v;
            return trapezoid(sq, eta.step);
        },
        [](double, const PathView& eta) {
            const double head = eta.past.front();
            const double tail = eta.left_limit();
            return DerivativeSet{0.0, tail * tail - head * head, 0.0, 0.0};
        });
    (void)horizon;
    tf.density = [](const SegmentedPath& eta) { return scaled_path(eta, 2.0); };
    tf.perp_density = tf.density;
    tf.diagonal = [](const SegmentedPath& eta) { return sampled_constant(eta, 2.0); };
    return tf;
}

FrechetTestFunctional linear_integral() {
    FrechetTestFunctional tf;
    tf.functional = PathFunctional(
        "linear-integral", [](double, const PathView& eta) { return cos_moment(eta); },
        [](double, const PathView& eta) {
            const double tail = std::cos(eta.horizon()) * eta.past.front();
            return DerivativeSet{0.0, eta.left_limit() - tail + sin_moment(eta), 0.0, 0.0};
        });
    tf.density = [](const SegmentedPath& eta) { return sampled_cos(eta, 1.0); };
    tf.perp_density = tf.density;
    tf.diagonal = [](const SegmentedPath& eta) { return sampled_constant(eta, 0.0); };
    return tf;
}

FrechetTestFunctional squared_linear() {
    FrechetTestFunctional tf;
    tf.functional = PathFunctional("squared-linear", [](double, const PathView& eta) {
        const double m = cos_moment(eta);
        return m * m;
    });
    tf.density = [](const SegmentedPath& eta) { return sampled_cos(eta, 2.0 * cos_moment(eta.view())); };
    tf.perp_density = tf.density;
    tf.diagonal = [](const SegmentedPath& eta) { return sampled_constant(eta, 0.0); };
    tf.l2_kernel = [](const SegmentedPath&, double x, double y) { return 2.0 * std::cos(x) * std::cos(y); };
    return tf;
}

}  // namespace

std::vector<std::string> functional_names() {
    return {"markovian",       "integral-mean",   "cyl-heat",      "cyl-movavg",
            "cyl-pair",        "square-integral", "linear-integral", "squared-linear"};
}

std::vector<std::string> cylindrical_names() { return {"cyl-heat", "cyl-movavg", "cyl-pair"}; }

std::vector<std::string> frechet_names() {
    return {"square-integral", "linear-integral", "squared-linear"};
}

std::optional<CylindricalFunctional> make_cylindrical(const std::string& name, double horizon) {
    if (name == "cyl-heat") return cyl_heat(horizon);
    if (name == "cyl-movavg") return cyl_movavg(horizon);
    if (name == "cyl-pair") return cyl_pair();
    return std::nullopt;
}

FrechetTestFunctional make_frechet(const std::string& name, double horizon) {
    if (name == "square-integral") return square_integral(horizon);
    if (name == "linear-integral") return linear_integral();
    if (name == "squared-linear") return squared_linear();
    throw UsageError("unknown Frechet test functional '" + name + "'");
}

PathFunctional make_functional(const std::string& name, double horizon) {
    if (!(horizon > 0.0)) throw UsageError("horizon must be positive");
    if (auto cf = make_cylindrical(name, horizon)) return cf->as_path_functional();
    if (name == "markovian") {
        MarkovianFunction fn;
        fn.f = [horizon](double t, double x) { return std::exp(0.5 * (t - horizon)) * std::sin(x); };
        fn.dt = [horizon](double t, double x) { return 0.5 * std::exp(0.5 * (t - horizon)) * std::sin(x); };
        fn.dx = [horizon](double t, double x) { return std::exp(0.5 * (t - horizon)) * std::cos(x); };
        fn.dxx = [horizon](double t, double x) { return -std::exp(0.5 * (t - horizon)) * std::sin(x); };
        return markovian_functional(name, fn);
    }
    if (name == "integral-mean") {
        return PathFunctional(
            name,
            [horizon](double, const PathView& eta) { return trapezoid(eta.past, eta.step) / horizon; },
            [horizon](double, const PathView& eta) {
                return DerivativeSet{0.0, (eta.left_limit() - eta.past.front()) / horizon, 0.0, 0.0};
            });
    }
    for (const auto& f : frechet_names()) {
        if (name == f) return make_frechet(name, horizon).functional;
    }
    throw UsageError("unknown functional '" + name + "'");
}

}  // namespace fito
