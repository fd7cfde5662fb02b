#pragma once

// Pathwise check of the functional Ito formula
//
//   U(t, X_t) = U(0, X_0) + int (dt U + D^H U) ds + int D^V U d^-X + 1/2 int D^VV U d[X]
//
// along sampled trajectories, plus convergence studies over grid refinements.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "fito/functionals.hpp"
#include "fito/sde.hpp"

namespace fito {

// How d[X] enters: realized squared increments, or the model bracket sigma^2 ds.
enum class QvMode { realized, model };

struct ItoReport {
    std::vector<double> times;
    std::vector<double> lhs;
    double initial = 0.0;
    std::vector<double> time_horizontal;  // int (dt U + D^H U) ds
    std::vector<double> forward;          // int D^V U d^-X
    std::vector<double> quadratic;        // 1/2 int D^VV U d[X]
    std::vector<double> residual;
    double max_abs_residual = 0.0;
};

// Uses the analytic hooks of u; `sigma` is required for QvMode::model.
ItoReport ito_residual(const PathFunctional& u, const TrajectoryView& X,
                       QvMode mode = QvMode::realized, const Coefficient& sigma = {});

// Classical Ito formula for F(t, X_t) written directly on the samples; returns
// the residual curve.
std::vector<double> classical_ito_residual(const MarkovianFunction& fn, const TrajectoryView& X);

// Every `factor`-th node of X (window and history included).
struct Subsampled {
    std::vector<double> values;
    std::vector<double> noise;
    TrajectoryView view;
};
Subsampled subsample(const TrajectoryView& X, std::size_t factor);

// Per-path max |residual| for a batch of simulated paths.
std::vector<double> ito_max_residuals(const PathFunctional& u, const SdeProblem& prob,
                                      const McConfig& cfg, QvMode mode = QvMode::realized);

struct ConvergenceRow {
    double dt = 0.0;
    double rms_max_residual = 0.0;  // RMS over paths of the per-path max residual
};
struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;  // coarsest first
    double slope = 0.0;                // log-log fit of residual against dt
    bool identically_zero = false;
};

// Paths are simulated on the grid of `prob` (the finest) and subsampled by
// 2^j, j = 0..doublings-1.
ConvergenceStudy convergence_study(const PathFunctional& u, const SdeProblem& prob,
                                   std::size_t doublings, const McConfig& cfg,
                                   QvMode mode = QvMode::realized);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fito
