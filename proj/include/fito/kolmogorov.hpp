#pragma once

// Path-dependent Kolmogorov equation
//
//   dt U + D^H U + b D^V U + 1/2 sigma^2 D^VV U + F(t, eta, U, sigma D^V U) = 0,
//   U(T, .) = H,
//
// with candidate solutions from closed forms, Feynman-Kac and the BSDE.

#include <optional>
#include <string>
#include <vector>

#include "fito/bsde.hpp"
#include "fito/functionals.hpp"
#include "fito/sde.hpp"

namespace fito {

struct KolmogorovProblem {
    std::string name;
    double horizon = 1.0;
    Coefficient b;
    Coefficient sigma;
    // Empty means F = 0.
    std::function<double(double t, const PathView& eta, double y, double z)> F;
    bool driver_depends_on_solution = false;
    std::function<double(const PathView& eta)> H;
    double lipschitz = 0.0;
    double growth = 0.0;
    std::optional<CylindricalPack> pack;
    // Closed-form solution, when one is known.
    std::optional<CylindricalFunctional> closed_form;

    double driver(double t, const PathView& eta, double y, double z) const {
        return F ? F(t, eta, y, z) : 0.0;
    }
    SdeProblem sde(double t, const SegmentedPath& eta) const;
    BsdeDriver bsde_driver() const;
    RegressionBasis basis(std::size_t degree = 2) const;
};

// heat, movavg, delay-drift, semilinear-exp, linear-terminal
std::vector<std::string> problem_names();
KolmogorovProblem make_problem(const std::string& name, double horizon);

struct StrictSolutionCandidate {
    PathFunctional u;
    // Empty means no derivative information.
    std::function<DerivativeSet(double t, const SegmentedPath& eta)> derivatives;
    bool analytic = false;
    bool piecewise_weights = false;
};

StrictSolutionCandidate closed_form_candidate(const KolmogorovProblem& prob);
// Same functional, derivatives by regularized differences on the path grid.
StrictSolutionCandidate numeric_candidate(const PathFunctional& u, double horizon,
                                          const EpsSchedule& sched = {});

// E[int_t^T F(s, X_s) ds + H(X_T)]; the time integral uses the trapezoid rule.
McEstimate feynman_kac_value(const KolmogorovProblem& prob, double t, const SegmentedPath& eta,
                             const McConfig& cfg);

// Feynman-Kac candidate; every evaluation reuses cfg.seed so bumped and
// shifted evaluations share their random numbers.
StrictSolutionCandidate feynman_kac_candidate(const KolmogorovProblem& prob, const McConfig& cfg,
                                              const EpsSchedule& sched = {});

// Psi^s(t, x) = E[F(s, X_s^{t,x})] over paths of the statistics system.
McEstimate duhamel_psi(const CylindricalPack& pack, double s, double t, std::span<const double> x,
                       double dt, const McConfig& cfg);
// int_t^T Psi^s(t, x) ds + E[H(X_T^{t,x})], trapezoid in s on the dt grid.
McEstimate duhamel_assemble(const CylindricalPack& pack, double t, std::span<const double> x,
                            double horizon, double dt, const McConfig& cfg);

// Throws UnsupportedError when the candidate has no derivatives.
double pde_residual(const StrictSolutionCandidate& cand, const KolmogorovProblem& prob, double t,
                    const SegmentedPath& eta);

struct UniquenessReport {
    double candidate = 0.0;
    McEstimate y0;
    double gap = 0.0;
    double tolerance = 0.0;  // 3 stderr + scheme tolerance
    bool pass = false;
};
UniquenessReport uniqueness_check(const StrictSolutionCandidate& cand, const KolmogorovProblem& prob,
                                  double t, const SegmentedPath& eta, const McConfig& cfg,
                                  std::size_t degree = 2);

}  // namespace fito
