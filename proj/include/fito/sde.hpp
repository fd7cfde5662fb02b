#pragma once

// Euler-Maruyama for dX = b(s, X_window) ds + sigma(s, X_window) dW with the
// time step tied to the path grid, so every window is node-exact.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fito/functionals.hpp"
#include "fito/paths.hpp"

namespace fito {

using Coefficient = std::function<double(double t, const PathView& window)>;

struct SdeProblem {
    Coefficient b;
    Coefficient sigma;
    double start = 0.0;  // initial time t, a grid time in [0, T]
    SegmentedPath initial;
    // Declared growth and Lipschitz constants; only reported.
    double growth = 1.0;
    double lipschitz = 1.0;

    double horizon() const { return initial.grid().horizon(); }
    std::size_t steps() const;  // (T - t) / step
};

struct McConfig {
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    // Path p reads stream stream_offset + p.
    std::uint64_t stream_offset = 0;
    // 0 = one worker per hardware thread; results do not depend on it.
    std::size_t workers = 0;
};

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

// Sample mean and its standard error (sample standard deviation / sqrt(P)).
McEstimate estimate(std::span<const double> samples, std::uint64_t seed);

// Simulated paths stored back to back; path p occupies values[p*stride, (p+1)*stride).
struct PathBatch {
    double start = 0.0;
    double step = 1.0;
    std::size_t window_segments = 0;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::vector<double> values;
    std::vector<double> noise;

    std::size_t stride() const { return window_segments + 1 + steps; }
    TrajectoryView path(std::size_t p) const;
};

// One path; noise is drawn from stream (cfg.stream_offset + index).
Trajectory simulate_path(const SdeProblem& prob, std::uint64_t seed, std::uint64_t stream);
// Euler scheme writing into caller storage (values: M+1+n, noise: n).
void simulate_into(const SdeProblem& prob, std::uint64_t seed, std::uint64_t stream,
                   std::span<double> values, std::span<double> noise, std::size_t path_index);

PathBatch simulate(const SdeProblem& prob, const McConfig& cfg);

// Streams paths to visit(index, view) without keeping the batch; visit is
// called concurrently from worker threads and must only write per-index state.
void for_each_path(const SdeProblem& prob, const McConfig& cfg,
                   const std::function<void(std::size_t, const TrajectoryView&)>& visit);

// sum_k phi(s_k) (X_{s_{k+1}} - X_{s_k}) over [t, r].
double ito_integral(const std::function<double(double)>& phi, const TrajectoryView& X, double t,
                    double r);

struct StatisticEvolution {
    std::vector<double> lhs;  // statistics of the window at r
    std::vector<double> rhs;  // statistics at (t, eta) plus the Ito integrals
    double max_gap() const;
};
StatisticEvolution check_statistic_evolution(const CylindricalFunctional& cf,
                                             const TrajectoryView& X, double t,
                                             const SegmentedPath& eta, double r);
// Largest |lhs - rhs| over all grid times r in [t, T].
double max_statistic_gap(const CylindricalFunctional& cf, const TrajectoryView& X);

struct SupMoments {
    std::vector<double> orders;
    std::vector<McEstimate> moments;  // E[sup_{s in [t,T]} |X_s|^p]
};
SupMoments sup_moments(const SdeProblem& prob, const McConfig& cfg, const std::vector<double>& orders);

// Brownian sample sigma * W on the nodes of [a, b], W(a) = 0.
SampledFunction brownian_sample(double a, double b, std::size_t segments, double sigma,
                                std::uint64_t seed, std::uint64_t stream = 0);
// Brownian path on [-T, 0] started at 0 at -T (continuous, so eta(-T) = 0).
SegmentedPath brownian_path(const Grid& grid, double sigma, std::uint64_t seed,
                            std::uint64_t stream = 0);

}  // namespace fito
