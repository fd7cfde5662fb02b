#include "fito/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fito/error.hpp"
#include "fito/kernels.hpp"

namespace fito {

PathFunctional::PathFunctional(std::string name, EvalFn eval, DerivFn analytic)
    : name_(std::move(name)), eval_(std::move(eval)), analytic_(std::move(analytic)) {}

DerivativeSet PathFunctional::analytic(double t, const PathView& eta) const {
    if (!analytic_) throw UnsupportedError("functional '" + name_ + "' has no analytic derivatives");
    return analytic_(t, eta);
}

PathFunctional markovian_functional(std::string name, MarkovianFunction fn) {
    auto eval = [f = fn.f](double t, const PathView& eta) { return f(t, eta.present); };
    auto hooks = [fn](double t, const PathView& eta) {
        const double x = eta.present;
        return DerivativeSet{fn.dt(t, x), 0.0, fn.dx(t, x), fn.dxx(t, x)};
    };
    return PathFunctional(std::move(name), eval, hooks);
}

// ---------------------------------------------------------------------------
// Cylindrical functionals

struct CylindricalFunctional::Tables {
    double step = 0.0;
    std::size_t nodes = 0;
    std::vector<std::vector<double>> d1;  // phi_i'(l * step), l = 0..nodes-1
    std::vector<std::vector<double>> d2;  // phi_i''(l * step)
};

struct CylindricalFunctional::Cache {
    std::mutex mutex;
    std::vector<std::shared_ptr<const Tables>> entries;
};

CylindricalFunctional::CylindricalFunctional(std::string name, std::vector<Weight> weights,
                                             OuterFunction outer)
    : name_(std::move(name)), weights_(std::move(weights)), outer_(std::move(outer)),
      cache_(std::make_shared<Cache>()) {
    if (weights_.empty()) throw DomainError("cylindrical functional needs at least one weight");
}

std::shared_ptr<const CylindricalFunctional::Tables> CylindricalFunctional::tables(
    double step, std::size_t nodes) const {
    std::lock_guard lock(cache_->mutex);
    for (const auto& e : cache_->entries) {
        if (e->step == step && e->nodes >= nodes) return e;
    }
    auto t = std::make_shared<Tables>();
    t->step = step;
    t->nodes = nodes;
    for (const Weight& w : weights_) {
        std::vector<double> d1(nodes), d2(nodes);
        for (std::size_t l = 0; l < nodes; ++l) {
            const double u = step * static_cast<double>(l);
            d1[l] = l == 0 ? w.dphi0_plus : w.dphi(u);
            d2[l] = w.ddphi(u);
        }
        t->d1.push_back(std::move(d1));
        t->d2.push_back(std::move(d2));
    }
    std::erase_if(cache_->entries, [&](const auto& e) { return e->step == step; });
    cache_->entries.push_back(t);
    return t;
}

namespace {

std::size_t time_index(double t, const PathView& eta) {
    const double ratio = t / eta.step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw AlignmentError("time is not a multiple of the path grid step");
    }
    if (rounded < 0.0 || rounded > static_cast<double>(eta.segments())) {
        throw DomainError("time outside [0, T]");
    }
    return static_cast<std::size_t>(rounded);
}

double weight_slope(const Weight& w, double t) { return t == 0.0 ? w.dphi0_plus : w.dphi(t); }

}  // namespace

void CylindricalFunctional::inner_integrals(double t, const PathView& eta, bool second,
                                            std::vector<double>& out) const {
    const std::size_t n = time_index(t, eta);
    const std::size_t m = eta.segments();
    out.assign(weights_.size(), 0.0);
    if (n == 0) return;
    const auto tab = tables(eta.step, n + 1);
    const double* gamma = eta.past.data() + (m - n);
    const auto& kern = kernels::active();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double* w = second ? tab->d2[i].data() : tab->d1[i].data();
        const double s = kern.dot(gamma, w, n + 1) - 0.5 * (gamma[0] * w[0] + gamma[n] * w[n]);
        out[i] = eta.step * s;
    }
}

std::vector<double> CylindricalFunctional::statistic(double t, const PathView& eta) const {
    std::vector<double> x;
    inner_integrals(t, eta, false, x);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        x[i] = eta.present * weights_[i].phi(t) - x[i];
    }
    return x;
}

double CylindricalFunctional::operator()(double t, const PathView& eta) const {
    const auto x = statistic(t, eta);
    return outer_.value(t, x);
}

DerivativeSet CylindricalFunctional::analytic(double t, const PathView& eta) const {
    const std::size_t n_w = weights_.size();
    const auto x = statistic(t, eta);
    std::vector<double> curv;
    inner_integrals(t, eta, true, curv);

    std::vector<double> grad(n_w), hess(n_w * n_w);
    outer_.grad(t, x, grad);
    outer_.hess(t, x, hess);

    const std::size_t n = time_index(t, eta);
    const double tail = eta.past[eta.segments() - n];  // gamma(-t)
    const double a = eta.present;
    const double left = eta.left_limit();

    DerivativeSet d;
    double bt = 0.0, bh = 0.0;
    std::vector<double> phi(n_w);
    for (std::size_t i = 0; i < n_w; ++i) {
        const Weight& w = weights_[i];
        const double slope = weight_slope(w, t);
        const double common = tail * w.dphi0_plus + curv[i];
        bt += grad[i] * (a * slope - common);
        bh += grad[i] * (left * slope - common);
        phi[i] = w.phi(t);
        d.dv += grad[i] * phi[i];
    }
    for (std::size_t i = 0; i < n_w; ++i) {
        for (std::size_t j = 0; j < n_w; ++j) d.dvv += hess[i * n_w + j] * phi[i] * phi[j];
    }
    d.dt = outer_.dt(t, x) + bt;
    d.dh = -bh;
    return d;
}

PathFunctional CylindricalFunctional::as_path_functional() const {
    auto self = std::make_shared<CylindricalFunctional>(*this);
    PathFunctional u(
        name_, [self](double t, const PathView& eta) { return (*self)(t, eta); },
        [self](double t, const PathView& eta) { return self->analytic(t, eta); });
    u.piecewise_weights =
        std::any_of(weights_.begin(), weights_.end(), [](const Weight& w) { return w.piecewise; });
    return u;
}

std::vector<double> cylindrical_statistic(const CylindricalFunctional& cf, double t,
                                          const SegmentedPath& eta) {
    return cf.statistic(t, eta.view());
}

DerivativeSet d_cylindrical_analytic(const CylindricalFunctional& cf, double t,
                                     const SegmentedPath& eta) {
    return cf.analytic(t, eta.view());
}

// ---------------------------------------------------------------------------
// Numeric derivatives

namespace {

RegIntegralResult horizontal(const PathFunctional& u, double t, const SegmentedPath& eta,
                             const EpsSchedule& sched, ExtensionMode mode) {
    sched.validate();
    const std::size_t m = eta.grid().segments();
    if (sched.largest() > m) throw DomainError("largest eps exceeds the path horizon");
    const double base = u(t, eta);
    std::vector<double> shifted(m + 1);
    std::vector<double> per_eps;
    for (std::size_t k : sched.multiples) {
        shift_past_samples(eta.past(), k, mode, shifted);
        const PathView v{shifted, eta.present(), eta.grid().step()};
        const double eps = eta.grid().step() * static_cast<double>(k);
        per_eps.push_back((base - u(t, v)) / eps);
    }
    return make_result(sched, eta.grid().step(), std::move(per_eps));
}

}  // namespace

RegIntegralResult d_horizontal_numeric(const PathFunctional& u, double t, const SegmentedPath& eta,
                                       const EpsSchedule& sched) {
    return horizontal(u, t, eta, sched, eta.extension_mode());
}

HorizontalModes d_horizontal_both_modes(const PathFunctional& u, double t, const SegmentedPath& eta,
                                        const EpsSchedule& sched) {
    HorizontalModes r;
    r.constant_left = horizontal(u, t, eta, sched, ExtensionMode::constant_left);
    r.zero = horizontal(u, t, eta, sched, ExtensionMode::zero);
    const double err =
        std::max(r.constant_left.extrapolation_error(), r.zero.extrapolation_error());
    r.convention_sensitive = std::abs(r.constant_left.limit() - r.zero.limit()) > err;
    return r;
}

VerticalDerivatives d_vertical_numeric(const PathFunctional& u, double t, const SegmentedPath& eta,
                                       double h) {
    if (h <= 0.0) h = 1e-4 * (1.0 + std::abs(eta.present()));
    const PathView base = eta.view();
    const PathView up{base.past, base.present + h, base.step};
    const PathView down{base.past, base.present - h, base.step};
    const double fp = u(t, up);
    const double f0 = u(t, base);
    const double fm = u(t, down);
    return VerticalDerivatives{(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h), h};
}

DerivativeSet numeric_derivatives(const PathFunctional& u, double t, const SegmentedPath& eta,
                                  double time_step, double horizon, const EpsSchedule& sched) {
    DerivativeSet d;
    const double tol = 1e-12 * std::max(1.0, horizon);
    const double lo = std::max(0.0, t - time_step);
    const double hi = std::min(horizon, t + time_step);
    if (hi - lo <= tol) throw DomainError("time step too large for the time domain");
    d.dt = (u(hi, eta) - u(lo, eta)) / (hi - lo);
    d.dh = d_horizontal_numeric(u, t, eta, sched).limit();
    const auto v = d_vertical_numeric(u, t, eta);
    d.dv = v.first;
    d.dvv = v.second;
    return d;
}

}  // namespace fito
