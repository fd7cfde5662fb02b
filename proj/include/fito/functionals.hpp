#pragma once

// Path functionals u(t, eta) = u~(t, gamma, a), their regularized numeric
// derivatives, and the cylindrical family
//
//   U(t, eta) = Psi(t, x_1, ..., x_N),
//   x_i = a * phi_i(t) - int_{-t}^0 gamma(x) phi_i'(x + t) dx,
//
// whose four derivatives are available in closed form.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fito/paths.hpp"
#include "fito/regcalc.hpp"

namespace fito {

struct DerivativeSet {
    double dt = 0.0;   // time derivative
    double dh = 0.0;   // horizontal
    double dv = 0.0;   // first vertical
    double dvv = 0.0;  // second vertical
};

class PathFunctional {
public:
    using EvalFn = std::function<double(double t, const PathView& eta)>;
    using DerivFn = std::function<DerivativeSet(double t, const PathView& eta)>;

    PathFunctional() = default;
    PathFunctional(std::string name, EvalFn eval, DerivFn analytic = {});

    const std::string& name() const { return name_; }
    double operator()(double t, const PathView& eta) const { return eval_(t, eta); }
    double operator()(double t, const SegmentedPath& eta) const { return eval_(t, eta.view()); }

    bool has_analytic() const { return static_cast<bool>(analytic_); }
    // Throws UnsupportedError when no hooks were supplied.
    DerivativeSet analytic(double t, const PathView& eta) const;

    // Weights only piecewise C2: the closed-form hooks have no theoretical cover.
    bool piecewise_weights = false;

private:
    std::string name_;
    EvalFn eval_;
    DerivFn analytic_;
};

// Markovian functional U(t, eta) = F(t, eta(0)).
struct MarkovianFunction {
    std::function<double(double, double)> f, dt, dx, dxx;
};
PathFunctional markovian_functional(std::string name, MarkovianFunction fn);

// A weight phi on [0,T] with its derivatives; dphi0_plus is the one-sided
// derivative at 0.
struct Weight {
    std::function<double(double)> phi, dphi, ddphi;
    double dphi0_plus = 0.0;
    bool piecewise = false;
};

// Psi(t, x) with its time derivative, gradient and Hessian (row-major N x N).
struct OuterFunction {
    std::function<double(double t, std::span<const double> x)> value;
    std::function<double(double t, std::span<const double> x)> dt;
    std::function<void(double t, std::span<const double> x, std::span<double> grad)> grad;
    std::function<void(double t, std::span<const double> x, std::span<double> hess)> hess;
};

class CylindricalFunctional {
public:
    CylindricalFunctional(std::string name, std::vector<Weight> weights, OuterFunction outer);

    const std::string& name() const { return name_; }
    std::size_t dimension() const { return weights_.size(); }
    const std::vector<Weight>& weights() const { return weights_; }
    const OuterFunction& outer() const { return outer_; }

    // Statistics x_i at (t, eta); inner integral by the trapezoid rule on the grid.
    std::vector<double> statistic(double t, const PathView& eta) const;
    double operator()(double t, const PathView& eta) const;
    DerivativeSet analytic(double t, const PathView& eta) const;

    PathFunctional as_path_functional() const;

private:
    struct Tables;
    std::shared_ptr<const Tables> tables(double step, std::size_t nodes) const;
    // Trapezoid integrals int_{-t}^0 gamma(x) w(x+t) dx for the cached weight samples.
    void inner_integrals(double t, const PathView& eta, bool second, std::vector<double>& out) const;

    std::string name_;
    std::vector<Weight> weights_;
    OuterFunction outer_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

std::vector<double> cylindrical_statistic(const CylindricalFunctional& cf, double t,
                                          const SegmentedPath& eta);
DerivativeSet d_cylindrical_analytic(const CylindricalFunctional& cf, double t,
                                     const SegmentedPath& eta);

// (u(t, eta) - u(t, shift_past(eta, eps))) / eps over the schedule, using the
// extension mode of eta.
RegIntegralResult d_horizontal_numeric(const PathFunctional& u, double t, const SegmentedPath& eta,
                                       const EpsSchedule& sched = {});

struct HorizontalModes {
    RegIntegralResult constant_left;
    RegIntegralResult zero;
    // The two limits differ by more than their extrapolation errors.
    bool convention_sensitive = false;
};
HorizontalModes d_horizontal_both_modes(const PathFunctional& u, double t, const SegmentedPath& eta,
                                        const EpsSchedule& sched = {});

struct VerticalDerivatives {
    double first = 0.0;
    double second = 0.0;
    double h = 0.0;
};
// Central differences in the present value; h <= 0 selects 1e-4 * (1 + |a|).
VerticalDerivatives d_vertical_numeric(const PathFunctional& u, double t, const SegmentedPath& eta,
                                       double h = 0.0);

// All four derivatives numerically: time by a central difference of width
// time_step (one-sided at the ends of [0, T]).
DerivativeSet numeric_derivatives(const PathFunctional& u, double t, const SegmentedPath& eta,
                                  double time_step, double horizon, const EpsSchedule& sched = {});

}  // namespace fito
