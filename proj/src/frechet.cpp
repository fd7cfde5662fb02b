#include "fito/frechet.hpp"

#include <algorithm>
#include <cmath>

#include "fito/error.hpp"

namespace fito {

double BridgeResult::gap() const { return std::abs(lhs.limit() - rhs.limit()); }

double BridgeResult::relative_gap() const {
    const double scale = std::max(std::abs(lhs.limit()), std::abs(rhs.limit()));
    return scale == 0.0 ? 0.0 : gap() / scale;
}

bool BridgeResult::converged() const {
    return lhs.converged && rhs.converged && (!qv || qv->converged);
}

BridgeResult frechet_bridge_first(const FrechetTestFunctional& tf, const SegmentedPath& eta,
                                  const EpsSchedule& sched) {
    BridgeResult r;
    r.lhs = d_horizontal_numeric(tf.functional, 0.0, eta, sched);
    const SampledFunction path = eta.as_sampled();
    r.rhs = backward_integral(tf.density(eta), path, path.a, path.b(), sched);
    return r;
}

BridgeResult frechet_bridge_second(const FrechetTestFunctional& tf, const SegmentedPath& eta,
                                   const EpsSchedule& sched) {
    if (!tf.diagonal || !tf.perp_density) {
        throw UnsupportedError("test functional lacks second-order Frechet data");
    }
    BridgeResult r;
    r.lhs = d_horizontal_numeric(tf.functional, 0.0, eta, sched);
    const SampledFunction path = eta.as_sampled();
    const RegIntegralResult first = backward_integral(tf.perp_density(eta), path, path.a, path.b(), sched);
    r.qv = quadratic_variation(path, path.a, path.b(), sched);
    const SampledFunction diag = tf.diagonal(eta);
    if (!diag.same_grid(path)) throw AlignmentError("diagonal element sampled on a different grid");

    std::vector<double> per_eps(first.per_eps);
    for (std::size_t e = 0; e < per_eps.size(); ++e) {
        const auto& curve = r.qv->per_eps[e].values;
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < curve.size(); ++j) s += diag.values[j] * (curve[j + 1] - curve[j]);
        per_eps[e] -= 0.5 * s;
    }
    r.rhs = make_result(sched, path.step, std::move(per_eps));
    return r;
}

}  // namespace fito
