#include "fito/kolmogorov.hpp"

#include <cmath>

#include "fito/error.hpp"
#include "fito/parallel.hpp"
#include "fito/registry.hpp"

namespace fito {

SdeProblem KolmogorovProblem::sde(double t, const SegmentedPath& eta) const {
    if (std::abs(eta.grid().horizon() - horizon) > 1e-12 * horizon) {
        throw DomainError("path horizon differs from the problem horizon");
    }
    return SdeProblem{b, sigma, t, eta, growth, lipschitz};
}

BsdeDriver KolmogorovProblem::bsde_driver() const {
    BsdeDriver d;
    d.F = F;
    d.H = H;
    d.lipschitz = lipschitz;
    d.growth = growth;
    return d;
}

RegressionBasis KolmogorovProblem::basis(std::size_t degree) const {
    if (pack) {
        return RegressionBasis::cylindrical(CylindricalFunctional(name, pack->weights, OuterFunction{}),
                                            degree);
    }
    return RegressionBasis::present_value(degree);
}

// ---------------------------------------------------------------------------
// Registry

namespace {

Weight unit_weight() {
    return Weight{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
}

Coefficient constant(double c) {
    return [c](double, const PathView&) { return c; };
}

// Terminal functional H(eta) = Hbar(x(T, eta)) for a pack.
std::function<double(const PathView&)> terminal_from_pack(const CylindricalPack& pack, double horizon) {
    CylindricalFunctional stats("terminal", pack.weights, OuterFunction{});
    return [stats, H = pack.H, horizon](const PathView& eta) {
        return H(stats.statistic(horizon, eta));
    };
}

KolmogorovProblem brownian_base(std::string name, double horizon, Weight w) {
    KolmogorovProblem p;
    p.name = std::move(name);
    p.horizon = horizon;
    p.b = constant(0.0);
    p.sigma = constant(1.0);
    CylindricalPack pack;
    pack.weights = {std::move(w)};
    pack.b = [](double, std::span<const double>) { return 0.0; };
    pack.sigma = [](double, std::span<const double>) { return 1.0; };
    p.pack = pack;
    return p;
}

KolmogorovProblem heat(double horizon) {
    KolmogorovProblem p = brownian_base("heat", horizon, unit_weight());
    p.pack->H = [](std::span<const double> x) { return x[0] * x[0]; };
    p.H = [](const PathView& eta) { return eta.present * eta.present; };
    p.closed_form = *make_cylindrical("cyl-heat", horizon);
    return p;
}

KolmogorovProblem linear_terminal(double horizon) {
    KolmogorovProblem p = brownian_base("linear-terminal", horizon, unit_weight());
    p.pack->H = [](std::span<const double> x) { return x[0]; };
    p.H = [](const PathView& eta) { return eta.present; };
    OuterFunction psi;
    psi.value = [](double, std::span<const double> x) { return x[0]; };
    psi.dt = [](double, std::span<const double>) { return 0.0; };
    psi.grad = [](double, std::span<const double>, std::span<double> g) { g[0] = 1.0; };
    psi.hess = [](double, std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    p.closed_form = CylindricalFunctional("linear-terminal", p.pack->weights, psi);
    return p;
}

KolmogorovProblem movavg(double horizon) {
    Weight w{[](double u) { return std::exp(-u); }, [](double u) { return -std::exp(-u); },
             [](double u) { return std::exp(-u); }, -1.0};
    KolmogorovProblem p = brownian_base("movavg", horizon, w);
    p.pack->H = [](std::span<const double> x) { return x[0] * x[0]; };
    p.H = terminal_from_pack(*p.pack, horizon);
    p.closed_form = *make_cylindrical("cyl-movavg", horizon);
    return p;
}

KolmogorovProblem semilinear_exp(double horizon) {
    constexpr double alpha = 0.5;
    KolmogorovProblem p = brownian_base("semilinear-exp", horizon, unit_weight());
    p.pack->H = [](std::span<const double> x) { return x[0]; };
    p.pack->F = [](double, std::span<const double>, double y, double) { return alpha * y; };
    p.pack->lipschitz = alpha;
    p.H = [](const PathView& eta) { return eta.present; };
    p.F = [](double, const PathView&, double y, double) { return alpha * y; };
    p.driver_depends_on_solution = true;
    p.lipschitz = alpha;
    OuterFunction psi;
    psi.value = [horizon](double t, std::span<const double> x) { return std::exp(alpha * (horizon - t)) * x[0]; };
    psi.dt = [horizon](double t, std::span<const double> x) {
        return -alpha * std::exp(alpha * (horizon - t)) * x[0];
    };
    psi.grad = [horizon](double t, std::span<const double>, std::span<double> g) {
        g[0] = std::exp(alpha * (horizon - t));
    };
    psi.hess = [](double, std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    p.closed_form = CylindricalFunctional("semilinear-exp", p.pack->weights, psi);
    return p;
}

KolmogorovProblem delay_drift(double horizon) {
    constexpr double tau = 0.25;
    constexpr double vol = 0.5;
    KolmogorovProblem p;
    p.name = "delay-drift";
    p.horizon = horizon;
    p.b = [](double, const PathView& w) { return -w(-tau); };
    p.sigma = constant(vol);
    p.H = [](const PathView& eta) { return eta.present; };
    p.lipschitz = 1.0;
    return p;
}

}  // namespace

std::vector<std::string> problem_names() {
    return {"heat", "movavg", "delay-drift", "semilinear-exp", "linear-terminal"};
}

KolmogorovProblem make_problem(const std::string& name, double horizon) {
    if (!(horizon > 0.0)) throw UsageError("horizon must be positive");
    if (name == "heat") return heat(horizon);
    if (name == "movavg") return movavg(horizon);
    if (name == "delay-drift") {
        if (horizon < 0.25) throw UsageError("delay-drift needs T >= 0.25");
        return delay_drift(horizon);
    }
    if (name == "semilinear-exp") return semilinear_exp(horizon);
    if (name == "linear-terminal") return linear_terminal(horizon);
    throw UsageError("unknown problem '" + name + "'");
}

// ---------------------------------------------------------------------------
// Candidates

StrictSolutionCandidate closed_form_candidate(const KolmogorovProblem& prob) {
    if (!prob.closed_form) throw UnsupportedError("problem '" + prob.name + "' has no closed form");
    StrictSolutionCandidate c;
    c.u = prob.closed_form->as_path_functional();
    c.analytic = true;
    c.piecewise_weights = c.u.piecewise_weights;
    c.derivatives = [u = c.u](double t, const SegmentedPath& eta) { return u.analytic(t, eta.view()); };
    return c;
}

StrictSolutionCandidate numeric_candidate(const PathFunctional& u, double horizon,
                                          const EpsSchedule& sched) {
    StrictSolutionCandidate c;
    c.u = u;
    c.derivatives = [u, horizon, sched](double t, const SegmentedPath& eta) {
        return numeric_derivatives(u, t, eta, eta.grid().step(), horizon, sched);
    };
    return c;
}

McEstimate feynman_kac_value(const KolmogorovProblem& prob, double t, const SegmentedPath& eta,
                             const McConfig& cfg) {
    if (prob.driver_depends_on_solution) {
        throw UnsupportedError("Feynman-Kac needs a driver independent of (y, z)");
    }
    const SdeProblem sde = prob.sde(t, eta);
    std::vector<double> samples(cfg.paths);
    for_each_path(sde, cfg, [&](std::size_t p, const TrajectoryView& X) {
        const std::size_t n = X.steps();
        double integral = 0.0;
        if (prob.F) {
            for (std::size_t k = 0; k <= n; ++k) {
                const double w = (k == 0 || k == n) ? 0.5 : 1.0;
                integral += w * prob.F(X.time_at_step(k), X.window(k), 0.0, 0.0);
            }
            integral *= X.step;
        }
        samples[p] = integral + prob.H(X.window(n));
    });
    return estimate(samples, cfg.seed);
}

StrictSolutionCandidate feynman_kac_candidate(const KolmogorovProblem& prob, const McConfig& cfg,
                                              const EpsSchedule& sched) {
    const double horizon = prob.horizon;
    PathFunctional u(prob.name + "-feynman-kac", [prob, cfg](double t, const PathView& eta) {
        const Grid g(eta.step * static_cast<double>(eta.segments()), eta.segments());
        const SegmentedPath path = SegmentedPath::from_parts(
            g, std::vector<double>(eta.past.begin(), eta.past.end()), eta.present);
        if (std::abs(t - prob.horizon) <= 1e-12 * prob.horizon) return prob.H(eta);
        return feynman_kac_value(prob, t, path, cfg).value;
    });
    return numeric_candidate(u, horizon, sched);
}

McEstimate duhamel_psi(const CylindricalPack& pack, double s, double t, std::span<const double> x,
                       double dt, const McConfig& cfg) {
    if (s < t) throw DomainError("duhamel_psi needs t <= s");
    const double ratio = (s - t) / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        throw AlignmentError("s - t is not a multiple of the time step");
    }
    const std::size_t N = pack.weights.size();
    std::vector<double> samples(cfg.paths);
    parallel_for(cfg.paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> states((n + 1) * N);
        for (std::size_t p = begin; p < end; ++p) {
            simulate_statistics(pack, t, x, dt, n, cfg.seed, cfg.stream_offset + p, states, {});
            const std::span<const double> last(states.data() + n * N, N);
            samples[p] = pack.F ? pack.F(s, last, 0.0, 0.0) : 0.0;
        }
    });
    return estimate(samples, cfg.seed);
}

McEstimate duhamel_assemble(const CylindricalPack& pack, double t, std::span<const double> x,
                            double horizon, double dt, const McConfig& cfg) {
    const double ratio = (horizon - t) / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        throw AlignmentError("T - t is not a multiple of the time step");
    }
    const std::size_t N = pack.weights.size();
    std::vector<double> samples(cfg.paths);
    parallel_for(cfg.paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> states((n + 1) * N);
        for (std::size_t p = begin; p < end; ++p) {
            simulate_statistics(pack, t, x, dt, n, cfg.seed, cfg.stream_offset + p, states, {});
            double integral = 0.0;
            if (pack.F) {
                for (std::size_t k = 0; k <= n; ++k) {
                    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
                    const std::span<const double> cur(states.data() + k * N, N);
                    integral += w * pack.F(t + dt * static_cast<double>(k), cur, 0.0, 0.0);
                }
                integral *= dt;
            }
            samples[p] = integral + pack.H(std::span<const double>(states.data() + n * N, N));
        }
    });
    return estimate(samples, cfg.seed);
}

double pde_residual(const StrictSolutionCandidate& cand, const KolmogorovProblem& prob, double t,
                    const SegmentedPath& eta) {
    if (!cand.derivatives) throw UnsupportedError("candidate has no derivative hooks");
    const DerivativeSet d = cand.derivatives(t, eta);
    const PathView w = eta.view();
    const double bv = prob.b(t, w);
    const double sv = prob.sigma(t, w);
    const double u = cand.u(t, w);
    return d.dt + d.dh + bv * d.dv + 0.5 * sv * sv * d.dvv + prob.driver(t, w, u, sv * d.dv);
}

UniquenessReport uniqueness_check(const StrictSolutionCandidate& cand, const KolmogorovProblem& prob,
                                  double t, const SegmentedPath& eta, const McConfig& cfg,
                                  std::size_t degree) {
    UniquenessReport r;
    r.candidate = cand.u(t, eta);
    const BsdeSolution sol = solve_bsde(prob.sde(t, eta), prob.bsde_driver(), prob.basis(degree), cfg);
    r.y0 = sol.y0;
    r.gap = std::abs(r.candidate - r.y0.value);
    r.tolerance = 3.0 * r.y0.stderr_ + 2.0 * eta.grid().step();
    r.pass = r.gap <= r.tolerance;
    return r;
}

}  // namespace fito
