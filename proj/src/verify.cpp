#include "fito/verify.hpp"

#include <algorithm>
#include <cmath>

#include "fito/error.hpp"
#include "fito/parallel.hpp"

namespace fito {

ItoReport ito_residual(const PathFunctional& u, const TrajectoryView& X, QvMode mode,
                       const Coefficient& sigma) {
    if (!u.has_analytic()) throw UnsupportedError("ito_residual needs derivative hooks");
    if (mode == QvMode::model && !sigma) throw UsageError("model bracket needs sigma");
    const std::size_t n = X.steps();
    const double dt = X.step;

    ItoReport r;
    r.times.resize(n + 1);
    r.lhs.resize(n + 1);
    r.time_horizontal.assign(n + 1, 0.0);
    r.forward.assign(n + 1, 0.0);
    r.quadratic.assign(n + 1, 0.0);
    r.residual.assign(n + 1, 0.0);

    for (std::size_t k = 0; k <= n; ++k) {
        const double t = X.time_at_step(k);
        const PathView w = X.window(k);
        r.times[k] = t;
        r.lhs[k] = u(t, w);
        if (k == 0) {
            r.initial = r.lhs[0];
        } else {
            r.residual[k] = r.lhs[k] - (r.initial + r.time_horizontal[k] + r.forward[k] + r.quadratic[k]);
            r.max_abs_residual = std::max(r.max_abs_residual, std::abs(r.residual[k]));
        }
        if (k == n) break;
        const DerivativeSet d = u.analytic(t, w);
        const double dx = X.at_step(k + 1) - X.at_step(k);
        double bracket = dx * dx;
        if (mode == QvMode::model) {
            const double s = sigma(t, w);
            bracket = s * s * dt;
        }
        r.time_horizontal[k + 1] = r.time_horizontal[k] + (d.dt + d.dh) * dt;
        r.forward[k + 1] = r.forward[k] + d.dv * dx;
        r.quadratic[k + 1] = r.quadratic[k] + 0.5 * d.dvv * bracket;
    }
    return r;
}

std::vector<double> classical_ito_residual(const MarkovianFunction& fn, const TrajectoryView& X) {
    const std::size_t n = X.steps();
    std::vector<double> res(n + 1, 0.0);
    const double x0 = X.at_step(0);
    const double f0 = fn.f(X.time_at_step(0), x0);
    double drift = 0.0, mart = 0.0, qv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = X.time_at_step(k);
        const double x = X.at_step(k);
        const double dx = X.at_step(k + 1) - x;
        drift += fn.dt(s, x) * X.step;
        mart += fn.dx(s, x) * dx;
        qv += 0.5 * fn.dxx(s, x) * dx * dx;
        res[k + 1] = fn.f(X.time_at_step(k + 1), X.at_step(k + 1)) - (f0 + drift + mart + qv);
    }
    return res;
}

Subsampled subsample(const TrajectoryView& X, std::size_t factor) {
    if (factor == 0 || X.window_segments % factor != 0 || X.steps() % factor != 0) {
        throw AlignmentError("subsampling factor must divide both the window and the step count");
    }
    Subsampled s;
    for (std::size_t j = 0; j < X.values.size(); j += factor) s.values.push_back(X.values[j]);
    if (!X.noise.empty()) {
        for (std::size_t k = 0; k < X.steps(); k += factor) {
            double w = 0.0;
            for (std::size_t i = 0; i < factor; ++i) w += X.noise[k + i];
            s.noise.push_back(w);
        }
    }
    s.view = TrajectoryView{X.start, X.step * static_cast<double>(factor), X.window_segments / factor,
                            s.values, s.noise};
    return s;
}

std::vector<double> ito_max_residuals(const PathFunctional& u, const SdeProblem& prob,
                                      const McConfig& cfg, QvMode mode) {
    std::vector<double> out(cfg.paths);
    for_each_path(prob, cfg, [&](std::size_t p, const TrajectoryView& X) {
        out[p] = ito_residual(u, X, mode, prob.sigma).max_abs_residual;
    });
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

ConvergenceStudy convergence_study(const PathFunctional& u, const SdeProblem& prob,
                                   std::size_t doublings, const McConfig& cfg, QvMode mode) {
    if (doublings < 3) throw UsageError("a convergence study needs at least three grids");
    const std::size_t levels = doublings;
    // residuals[level][path], level 0 = finest
    std::vector<std::vector<double>> residuals(levels, std::vector<double>(cfg.paths));
    for_each_path(prob, cfg, [&](std::size_t p, const TrajectoryView& X) {
        for (std::size_t j = 0; j < levels; ++j) {
            const std::size_t factor = std::size_t{1} << j;
            const Subsampled s = subsample(X, factor);
            residuals[j][p] = ito_residual(u, s.view, mode, prob.sigma).max_abs_residual;
        }
    });

    ConvergenceStudy study;
    std::vector<double> xs, ys;
    study.identically_zero = true;
    for (std::size_t j = levels; j-- > 0;) {
        double ss = 0.0;
        for (double v : residuals[j]) ss += v * v;
        ConvergenceRow row;
        row.dt = prob.initial.grid().step() * static_cast<double>(std::size_t{1} << j);
        row.rms_max_residual = std::sqrt(ss / static_cast<double>(cfg.paths));
        if (row.rms_max_residual != 0.0) study.identically_zero = false;
        study.rows.push_back(row);
        xs.push_back(row.dt);
        ys.push_back(row.rms_max_residual);
    }
    if (!study.identically_zero) study.slope = loglog_slope(xs, ys);
    return study;
}

}  // namespace fito
