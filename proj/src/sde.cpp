#include "fito/sde.hpp"

#include <algorithm>
#include <cmath>

#include "fito/error.hpp"
#include "fito/parallel.hpp"
#include "fito/rng.hpp"

namespace fito {

std::size_t SdeProblem::steps() const {
    const Grid& g = initial.grid();
    if (start < 0.0 || start > g.horizon() * (1.0 + 1e-12)) throw DomainError("start time outside [0, T]");
    return g.steps_in(g.horizon() - start);
}

McEstimate estimate(std::span<const double> samples, std::uint64_t seed) {
    McEstimate e;
    e.paths = samples.size();
    e.seed = seed;
    if (samples.empty()) return e;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    e.value = mean;
    if (samples.size() > 1) {
        e.stderr_ = std::sqrt(ss / static_cast<double>(samples.size() - 1) /
                              static_cast<double>(samples.size()));
    }
    return e;
}

TrajectoryView PathBatch::path(std::size_t p) const {
    const std::span<const double> v(values.data() + p * stride(), stride());
    std::span<const double> w;
    if (!noise.empty()) w = std::span<const double>(noise.data() + p * steps, steps);
    return TrajectoryView{start, step, window_segments, v, w};
}

void simulate_into(const SdeProblem& prob, std::uint64_t seed, std::uint64_t stream,
                   std::span<double> values, std::span<double> noise, std::size_t path_index) {
    const Grid& g = prob.initial.grid();
    const std::size_t m = g.segments();
    const std::size_t n = prob.steps();
    const double dt = g.step();
    const double sqdt = std::sqrt(dt);
    const auto past = prob.initial.past();
    std::copy(past.begin(), past.end(), values.begin());
    values[m] = prob.initial.present();

    rng::NormalStream normal(seed, stream);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = prob.start + dt * static_cast<double>(k);
        const std::span<const double> window(values.data() + k, m + 1);
        const PathView w{window, window.back(), dt};
        const double drift = prob.b(s, w);
        const double diffusion = prob.sigma(s, w);
        const double dw = sqdt * normal();
        if (!noise.empty()) noise[k] = dw;
        const double next = values[m + k] + drift * dt + diffusion * dw;
        if (!std::isfinite(drift) || !std::isfinite(diffusion) || !std::isfinite(next)) {
            throw SimulationError("non-finite value at step " + std::to_string(k), path_index);
        }
        values[m + k + 1] = next;
    }
}

Trajectory simulate_path(const SdeProblem& prob, std::uint64_t seed, std::uint64_t stream) {
    const std::size_t m = prob.initial.grid().segments();
    const std::size_t n = prob.steps();
    std::vector<double> values(m + 1 + n), noise(n);
    simulate_into(prob, seed, stream, values, noise, stream);
    return Trajectory(prob.start, prob.initial.grid().step(), m, std::move(values),
                      std::move(noise));
}

PathBatch simulate(const SdeProblem& prob, const McConfig& cfg) {
    if (cfg.paths == 0) throw UsageError("need at least one path");
    PathBatch batch;
    batch.start = prob.start;
    batch.step = prob.initial.grid().step();
    batch.window_segments = prob.initial.grid().segments();
    batch.steps = prob.steps();
    batch.paths = cfg.paths;
    batch.values.resize(batch.stride() * cfg.paths);
    batch.noise.resize(batch.steps * cfg.paths);
    parallel_for(cfg.paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            simulate_into(prob, cfg.seed, cfg.stream_offset + p,
                          std::span<double>(batch.values.data() + p * batch.stride(), batch.stride()),
                          std::span<double>(batch.noise.data() + p * batch.steps, batch.steps), p);
        }
    });
    return batch;
}

void for_each_path(const SdeProblem& prob, const McConfig& cfg,
                   const std::function<void(std::size_t, const TrajectoryView&)>& visit) {
    if (cfg.paths == 0) throw UsageError("need at least one path");
    const std::size_t m = prob.initial.grid().segments();
    const std::size_t n = prob.steps();
    const double step = prob.initial.grid().step();
    parallel_for(cfg.paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> values(m + 1 + n), noise(n);
        for (std::size_t p = begin; p < end; ++p) {
            simulate_into(prob, cfg.seed, cfg.stream_offset + p, values, noise, p);
            visit(p, TrajectoryView{prob.start, step, m, values, noise});
        }
    });
}

double ito_integral(const std::function<double(double)>& phi, const TrajectoryView& X, double t,
                    double r) {
    const std::size_t i0 = X.step_index(t);
    const std::size_t i1 = X.step_index(r);
    if (i1 < i0) throw DomainError("integration range is reversed");
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += phi(X.time_at_step(i)) * (X.at_step(i + 1) - X.at_step(i));
    return s;
}

double StatisticEvolution::max_gap() const {
    double g = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) g = std::max(g, std::abs(lhs[i] - rhs[i]));
    return g;
}

StatisticEvolution check_statistic_evolution(const CylindricalFunctional& cf,
                                             const TrajectoryView& X, double t,
                                             const SegmentedPath& eta, double r) {
    if (X.step_index(t) != 0) throw DomainError("t must be the start of the trajectory");
    StatisticEvolution out;
    out.lhs = cf.statistic(r, X.window(X.step_index(r)));
    out.rhs = cf.statistic(t, eta.view());
    for (std::size_t i = 0; i < cf.dimension(); ++i) out.rhs[i] += ito_integral(cf.weights()[i].phi, X, t, r);
    return out;
}

double max_statistic_gap(const CylindricalFunctional& cf, const TrajectoryView& X) {
    const std::size_t n = X.steps();
    const std::size_t dim = cf.dimension();
    const std::vector<double> x0 = cf.statistic(X.time_at_step(0), X.window(0));
    std::vector<double> ito(dim, 0.0);
    double gap = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double dx = X.at_step(i) - X.at_step(i - 1);
        for (std::size_t d = 0; d < dim; ++d) ito[d] += cf.weights()[d].phi(X.time_at_step(i - 1)) * dx;
        const auto xr = cf.statistic(X.time_at_step(i), X.window(i));
        for (std::size_t d = 0; d < dim; ++d) gap = std::max(gap, std::abs(xr[d] - (x0[d] + ito[d])));
    }
    return gap;
}

SupMoments sup_moments(const SdeProblem& prob, const McConfig& cfg, const std::vector<double>& orders) {
    std::vector<double> sups(cfg.paths);
    for_each_path(prob, cfg, [&](std::size_t p, const TrajectoryView& X) {
        double s = 0.0;
        for (std::size_t i = 0; i <= X.steps(); ++i) s = std::max(s, std::abs(X.at_step(i)));
        sups[p] = s;
    });
    SupMoments out;
    out.orders = orders;
    std::vector<double> powered(sups.size());
    for (double p : orders) {
        for (std::size_t i = 0; i < sups.size(); ++i) powered[i] = std::pow(sups[i], p);
        out.moments.push_back(estimate(powered, cfg.seed));
    }
    return out;
}

SampledFunction brownian_sample(double a, double b, std::size_t segments, double sigma,
                                std::uint64_t seed, std::uint64_t stream) {
    SampledFunction f;
    f.a = a;
    f.step = (b - a) / static_cast<double>(segments);
    f.values.resize(segments + 1);
    rng::NormalStream normal(seed, stream);
    const double scale = sigma * std::sqrt(f.step);
    f.values[0] = 0.0;
    for (std::size_t j = 1; j <= segments; ++j) f.values[j] = f.values[j - 1] + scale * normal();
    return f;
}

SegmentedPath brownian_path(const Grid& grid, double sigma, std::uint64_t seed, std::uint64_t stream) {
    const SampledFunction f = brownian_sample(-grid.horizon(), 0.0, grid.segments(), sigma, seed, stream);
    return SegmentedPath::from_samples(grid, f.values);
}

}  // namespace fito
