#pragma once

// Test functionals carrying explicit Frechet derivative data, and the two
// identities linking the horizontal derivative to backward integrals.

#include <functional>
#include <optional>

#include "fito/functionals.hpp"
#include "fito/regcalc.hpp"

namespace fito {

struct FrechetTestFunctional {
    PathFunctional functional;
    // Density of the absolutely continuous part of the first derivative.
    std::function<SampledFunction(const SegmentedPath&)> density;
    // Density of the non-atomic part of the first derivative measure.
    std::function<SampledFunction(const SegmentedPath&)> perp_density;
    // Diagonal element of the second derivative, as a function of x.
    std::function<SampledFunction(const SegmentedPath&)> diagonal;
    // L2 kernel of the second derivative; empty when the kernel vanishes.
    std::function<double(const SegmentedPath&, double, double)> l2_kernel;
};

struct BridgeResult {
    RegIntegralResult lhs;  // numeric horizontal derivative
    RegIntegralResult rhs;  // bridge formula
    std::optional<CovariationResult> qv;

    double gap() const;
    // gap / max(|lhs|, |rhs|)
    double relative_gap() const;
    bool converged() const;
};

// lhs = D^H U(eta); rhs = backward integral of the density against eta on [-T,0].
BridgeResult frechet_bridge_first(const FrechetTestFunctional& tf, const SegmentedPath& eta,
                                  const EpsSchedule& sched = {});

// rhs = backward integral of the non-atomic density minus half the diagonal
// element integrated against d[eta]; both sides per eps.
BridgeResult frechet_bridge_second(const FrechetTestFunctional& tf, const SegmentedPath& eta,
                                   const EpsSchedule& sched = {});

}  // namespace fito
