#include "fito/bsde.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fito/error.hpp"
#include "fito/parallel.hpp"
#include "fito/rng.hpp"

namespace fito {

namespace {

constexpr double kRegularization = 1e-10;
constexpr double kMaxCondition = 1e12;
constexpr std::size_t kImplicitIterations = 5;
constexpr double kImplicitTolerance = 1e-10;

}  // namespace

std::vector<std::vector<unsigned>> monomial_exponents(std::size_t dimension, std::size_t degree) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> e(dimension, 0);
    for (std::size_t total = 0; total <= degree; ++total) {
        // all tuples with sum == total, lexicographically descending in the first entry
        std::function<void(std::size_t, unsigned)> fill = [&](std::size_t i, unsigned left) {
            if (i + 1 == dimension) {
                e[i] = left;
                out.push_back(e);
                return;
            }
            for (unsigned v = left + 1; v-- > 0;) {
                e[i] = v;
                fill(i + 1, left - v);
            }
        };
        fill(0, static_cast<unsigned>(total));
    }
    return out;
}

RegressionBasis RegressionBasis::present_value(std::size_t degree) {
    RegressionBasis b;
    b.degree = degree;
    b.dimension = 1;
    b.statistics = [](double, const PathView& w, std::span<double> out) { out[0] = w.present; };
    return b;
}

RegressionBasis RegressionBasis::cylindrical(const CylindricalFunctional& cf, std::size_t degree) {
    RegressionBasis b;
    b.degree = degree;
    b.dimension = cf.dimension();
    b.statistics = [cf](double t, const PathView& w, std::span<double> out) {
        const auto x = cf.statistic(t, w);
        std::copy(x.begin(), x.end(), out.begin());
    };
    return b;
}

std::size_t RegressionBasis::size() const { return monomial_exponents(dimension, degree).size(); }

// ---------------------------------------------------------------------------
// Backward sweep

namespace {

struct StepFit {
    std::vector<double> yhat;
    std::vector<double> z;
    std::vector<double> beta_y;
    std::vector<double> beta_z;
    double condition = 1.0;
};

StepFit fit_step(const BackwardData& d, std::size_t k, const std::vector<double>& y,
                 const std::vector<std::vector<unsigned>>& exps, std::vector<double>& stats) {
    const std::size_t P = d.paths;
    const std::size_t N = d.dimension;
    StepFit fit;
    fit.yhat.assign(P, 0.0);
    fit.z.assign(P, 0.0);

    std::vector<double> target_z(P);
    for (std::size_t p = 0; p < P; ++p) target_z[p] = y[p] * d.noise(k, p);

    // Which statistics vary across paths at this step.
    std::vector<std::size_t> active;
    std::vector<double> mean(N, 0.0), scale(N, 1.0);
    if (k > 0) {
        parallel_for(P, d.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                d.statistics(k, p, std::span<double>(stats.data() + p * N, N));
            }
        });
        for (std::size_t i = 0; i < N; ++i) {
            double m = 0.0;
            for (std::size_t p = 0; p < P; ++p) m += stats[p * N + i];
            m /= static_cast<double>(P);
            double v = 0.0;
            for (std::size_t p = 0; p < P; ++p) v += (stats[p * N + i] - m) * (stats[p * N + i] - m);
            const double sd = std::sqrt(v / static_cast<double>(P));
            mean[i] = m;
            scale[i] = sd;
            if (sd > 1e-12 * (1.0 + std::abs(m))) active.push_back(i);
        }
    }

    if (active.empty()) {
        // Degenerate statistics: the conditional expectation is the plain mean.
        double my = 0.0, mz = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            my += y[p];
            mz += target_z[p];
        }
        my /= static_cast<double>(P);
        mz /= static_cast<double>(P) * d.dt;
        std::fill(fit.yhat.begin(), fit.yhat.end(), my);
        std::fill(fit.z.begin(), fit.z.end(), mz);
        fit.beta_y = {my};
        fit.beta_z = {mz * d.dt};
        return fit;
    }

    // Restrict the monomials to the active statistics.
    std::vector<std::vector<unsigned>> used;
    for (const auto& e : exps) {
        bool ok = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (e[i] != 0 && std::find(active.begin(), active.end(), i) == active.end()) ok = false;
        }
        if (ok) used.push_back(e);
    }
    const std::size_t B = used.size();
    std::vector<double> phi(P * B);
    parallel_for(P, d.workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> s(N);
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t i = 0; i < N; ++i) s[i] = (stats[p * N + i] - mean[i]) / scale[i];
            for (std::size_t b = 0; b < B; ++b) {
                double v = 1.0;
                for (std::size_t i = 0; i < N; ++i) {
                    for (unsigned r = 0; r < used[b][i]; ++r) v *= s[i];
                }
                phi[p * B + b] = v;
            }
        }
    });

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B));
    Eigen::VectorXd ry = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B));
    Eigen::VectorXd rz = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(B));
    for (std::size_t p = 0; p < P; ++p) {
        const double* row = phi.data() + p * B;
        for (std::size_t a = 0; a < B; ++a) {
            const auto ia = static_cast<Eigen::Index>(a);
            ry[ia] += row[a] * y[p];
            rz[ia] += row[a] * target_z[p];
            for (std::size_t b = a; b < B; ++b) A(ia, static_cast<Eigen::Index>(b)) += row[a] * row[b];
        }
    }
    A /= static_cast<double>(P);
    ry /= static_cast<double>(P);
    rz /= static_cast<double>(P);
    A = A.selfadjointView<Eigen::Upper>();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = std::max(eig.eigenvalues().minCoeff(), 0.0);
    fit.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(fit.condition < kMaxCondition)) {
        throw RankDeficiencyError("normal equations are singular at step " + std::to_string(k) +
                                      " (basis size " + std::to_string(B) + ")",
                                  k, fit.condition);
    }
    A.diagonal().array() += kRegularization;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd by = ldlt.solve(ry);
    const Eigen::VectorXd bz = ldlt.solve(rz);
    fit.beta_y.assign(by.data(), by.data() + B);
    fit.beta_z.assign(bz.data(), bz.data() + B);

    for (std::size_t p = 0; p < P; ++p) {
        const double* row = phi.data() + p * B;
        double vy = 0.0, vz = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            vy += row[b] * fit.beta_y[b];
            vz += row[b] * fit.beta_z[b];
        }
        fit.yhat[p] = vy;
        fit.z[p] = vz / d.dt;
    }
    return fit;
}

}  // namespace

BsdeSolution backward_induction(const BackwardData& d) {
    if (d.paths < 2) throw UsageError("the BSDE solver needs at least two paths");
    if (d.steps == 0) throw DomainError("the BSDE solver needs at least one time step");
    const std::size_t P = d.paths;
    const auto exps = monomial_exponents(d.dimension, d.degree);
    const bool implicit = d.driver && d.lipschitz * d.dt > 0.1;

    std::vector<double> y(P), pathwise(P), sup_y2(P), z_int(P, 0.0), f0_int(P, 0.0);
    parallel_for(P, d.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) y[p] = d.terminal(p);
    });
    for (std::size_t p = 0; p < P; ++p) {
        pathwise[p] = y[p];
        sup_y2[p] = y[p] * y[p];
    }

    BsdeSolution sol;
    sol.steps = d.steps;
    sol.dt = d.dt;
    sol.implicit = implicit;
    sol.y_coefficients.resize(d.steps);
    sol.z_coefficients.resize(d.steps);
    sol.condition_numbers.resize(d.steps);
    std::vector<double> stats(P * d.dimension);

    for (std::size_t k = d.steps; k-- > 0;) {
        StepFit fit = fit_step(d, k, y, exps, stats);
        sol.y_coefficients[k] = fit.beta_y;
        sol.z_coefficients[k] = fit.beta_z;
        sol.condition_numbers[k] = fit.condition;
        for (std::size_t p = 0; p < P; ++p) z_int[p] += fit.z[p] * fit.z[p] * d.dt;
        if (!d.driver) {
            y.swap(fit.yhat);
        } else {
            std::vector<double> f_used(P), f_zero(P);
            parallel_for(P, d.workers, [&](std::size_t begin, std::size_t end) {
                for (std::size_t p = begin; p < end; ++p) {
                    const double yh = fit.yhat[p];
                    double f = d.driver(k, p, yh, fit.z[p]);
                    double yk = yh + f * d.dt;
                    if (implicit) {
                        for (std::size_t it = 0; it < kImplicitIterations; ++it) {
                            f = d.driver(k, p, yk, fit.z[p]);
                            const double next = yh + f * d.dt;
                            const bool done = std::abs(next - yk) <= kImplicitTolerance * (1.0 + std::abs(yk));
                            yk = next;
                            if (done) break;
                        }
                    }
                    f_used[p] = f;
                    f_zero[p] = d.driver(k, p, 0.0, 0.0);
                    y[p] = yk;
                }
            });
            for (std::size_t p = 0; p < P; ++p) {
                pathwise[p] += f_used[p] * d.dt;
                f0_int[p] += f_zero[p] * f_zero[p] * d.dt;
            }
        }
        for (std::size_t p = 0; p < P; ++p) sup_y2[p] = std::max(sup_y2[p], y[p] * y[p]);
        if (k == 0) sol.z0 = fit.z[0];
    }

    sol.y0 = estimate(pathwise, d.seed);
    double my = 0.0;
    for (double v : y) my += v;
    sol.y0.value = my / static_cast<double>(P);

    double ez = 0.0, es = 0.0, ef = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        ez += z_int[p];
        es += sup_y2[p];
        ef += f0_int[p];
    }
    sol.z_energy = ez / static_cast<double>(P);
    const double denom = (es + ef) / static_cast<double>(P);
    sol.z_bound_ratio = denom > 0.0 ? sol.z_energy / denom : 0.0;
    return sol;
}

// ---------------------------------------------------------------------------
// Window-based and cylindrical front ends

BsdeSolution solve_bsde(const SdeProblem& prob, const BsdeDriver& drv, const RegressionBasis& basis,
                        const McConfig& cfg) {
    if (!drv.H) throw UsageError("BSDE driver needs a terminal functional");
    const PathBatch batch = simulate(prob, cfg);
    BackwardData d;
    d.paths = batch.paths;
    d.steps = batch.steps;
    d.t0 = prob.start;
    d.dt = batch.step;
    d.dimension = basis.dimension;
    d.degree = basis.degree;
    d.lipschitz = drv.lipschitz;
    d.seed = cfg.seed;
    d.workers = cfg.workers;
    d.statistics = [&](std::size_t k, std::size_t p, std::span<double> out) {
        const TrajectoryView X = batch.path(p);
        basis.statistics(X.time_at_step(k), X.window(k), out);
    };
    d.noise = [&](std::size_t k, std::size_t p) { return batch.noise[p * batch.steps + k]; };
    d.terminal = [&](std::size_t p) { return drv.H(batch.path(p).window(batch.steps)); };
    if (drv.F) {
        d.driver = [&](std::size_t k, std::size_t p, double yv, double zv) {
            const TrajectoryView X = batch.path(p);
            return drv.F(X.time_at_step(k), X.window(k), yv, zv);
        };
    }
    return backward_induction(d);
}

void simulate_statistics(const CylindricalPack& pack, double t, std::span<const double> x,
                         double dt, std::size_t n, std::uint64_t seed, std::uint64_t stream,
                         std::span<double> out, std::span<double> noise) {
    const std::size_t N = pack.weights.size();
    rng::NormalStream normal(seed, stream);
    const double sqdt = std::sqrt(dt);
    std::copy(x.begin(), x.end(), out.begin());
    for (std::size_t k = 0; k < n; ++k) {
        const double s = t + dt * static_cast<double>(k);
        const std::span<const double> cur(out.data() + k * N, N);
        const double drift = pack.b(s, cur);
        const double diffusion = pack.sigma(s, cur);
        const double dw = sqdt * normal();
        if (!noise.empty()) noise[k] = dw;
        for (std::size_t i = 0; i < N; ++i) {
            const double phi = pack.weights[i].phi(s);
            out[(k + 1) * N + i] = cur[i] + phi * (drift * dt + diffusion * dw);
        }
        if (!std::isfinite(out[(k + 1) * N])) {
            throw SimulationError("non-finite statistic at step " + std::to_string(k), stream);
        }
    }
}

BsdeSolution solve_fbsde_cylindrical(const CylindricalPack& pack, double t,
                                     std::span<const double> x, double horizon, double dt,
                                     std::size_t degree, const McConfig& cfg) {
    const std::size_t N = pack.weights.size();
    if (x.size() != N) throw DomainError("statistic vector has the wrong dimension");
    const double ratio = (horizon - t) / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        throw AlignmentError("T - t is not a positive multiple of the time step");
    }
    const std::size_t P = cfg.paths;
    const std::size_t stride = (n + 1) * N;
    std::vector<double> states(P * stride), noise(P * n);
    parallel_for(P, cfg.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            simulate_statistics(pack, t, x, dt, n, cfg.seed, cfg.stream_offset + p,
                                std::span<double>(states.data() + p * stride, stride),
                                std::span<double>(noise.data() + p * n, n));
        }
    });

    BackwardData d;
    d.paths = P;
    d.steps = n;
    d.t0 = t;
    d.dt = dt;
    d.dimension = N;
    d.degree = degree;
    d.lipschitz = pack.lipschitz;
    d.seed = cfg.seed;
    d.workers = cfg.workers;
    auto state = [&](std::size_t k, std::size_t p) {
        return std::span<const double>(states.data() + p * stride + k * N, N);
    };
    d.statistics = [&](std::size_t k, std::size_t p, std::span<double> out) {
        const auto s = state(k, p);
        std::copy(s.begin(), s.end(), out.begin());
    };
    d.noise = [&](std::size_t k, std::size_t p) { return noise[p * n + k]; };
    d.terminal = [&](std::size_t p) { return pack.H(state(n, p)); };
    if (pack.F) {
        d.driver = [&](std::size_t k, std::size_t p, double yv, double zv) {
            return pack.F(t + dt * static_cast<double>(k), state(k, p), yv, zv);
        };
    }
    return backward_induction(d);
}

}  // namespace fito
