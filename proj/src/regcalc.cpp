#include "fito/regcalc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fito/error.hpp"
#include "fito/kernels.hpp"

namespace fito {

// ---------------------------------------------------------------------------
// Schedules and extrapolation

EpsSchedule EpsSchedule::dyadic(std::size_t levels) {
    if (levels < 2 || levels > 30) throw UsageError("dyadic schedule needs 2..30 levels");
    EpsSchedule s;
    s.multiples.clear();
    for (std::size_t i = levels; i-- > 0;) s.multiples.push_back(std::size_t{1} << i);
    return s;
}

EpsSchedule EpsSchedule::parse(const std::string& spec) {
    const std::string prefix = "dyadic:";
    if (spec.rfind(prefix, 0) == 0) {
        try {
            return dyadic(std::stoul(spec.substr(prefix.size())));
        } catch (const std::invalid_argument&) {
            throw UsageError("bad eps schedule '" + spec + "'");
        }
    }
    EpsSchedule s;
    s.multiples.clear();
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            s.multiples.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw UsageError("bad eps schedule '" + spec + "'");
        }
    }
    s.validate();
    return s;
}

void EpsSchedule::validate() const {
    if (multiples.size() < 2) throw UsageError("eps schedule needs at least two values");
    for (std::size_t i = 0; i < multiples.size(); ++i) {
        if (multiples[i] == 0) throw UsageError("eps multiples must be positive");
        if (i > 0 && multiples[i] >= multiples[i - 1]) {
            throw UsageError("eps schedule must be strictly decreasing");
        }
    }
}

double RegIntegralResult::extrapolation_error() const { return std::abs(extrapolated - value); }

double richardson_limit(const std::vector<double>& eps, const std::vector<double>& values) {
    const std::size_t n = eps.size();
    double me = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        me += eps[i];
        mv += values[i];
    }
    me /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (eps[i] - me) * (eps[i] - me);
        sxy += (eps[i] - me) * (values[i] - mv);
    }
    if (sxx == 0.0) return mv;
    return mv - (sxy / sxx) * me;
}

bool converges(const std::vector<double>& values) {
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double floor = 1e-12 * (1.0 + scale);
    for (std::size_t i = 2; i < values.size(); ++i) {
        const double prev = values[i - 1] - values[i - 2];
        const double cur = values[i] - values[i - 1];
        if (std::abs(cur) <= floor) continue;
        if (prev * cur < 0.0 && std::abs(cur) > 3.0 * std::abs(prev) + floor) return false;
    }
    return true;
}

RegIntegralResult make_result(const EpsSchedule& sched, double step, std::vector<double> per_eps) {
    RegIntegralResult r;
    for (std::size_t m : sched.multiples) r.eps.push_back(step * static_cast<double>(m));
    r.per_eps = std::move(per_eps);
    r.value = r.per_eps.back();
    r.extrapolated = sched.extrapolate ? richardson_limit(r.eps, r.per_eps) : r.value;
    r.converged = converges(r.per_eps);
    return r;
}

// ---------------------------------------------------------------------------
// Forward and backward integrals

namespace {

struct Restricted {
    SampledFunction g;
    SampledFunction f;
};

Restricted restrict_pair(const SampledFunction& g, const SampledFunction& f, double a, double b) {
    if (!g.same_grid(f)) throw AlignmentError("integrand and integrator are sampled on different grids");
    return Restricted{g.restrict_to(a, b), f.restrict_to(a, b)};
}

void check_schedule(const EpsSchedule& sched, std::size_t segments) {
    sched.validate();
    if (sched.largest() > segments) {
        throw DomainError("largest eps exceeds the integration interval");
    }
}

}  // namespace

RegIntegralResult forward_integral(const SampledFunction& g, const SampledFunction& f, double a,
                                   double b, const EpsSchedule& sched) {
    const auto [gr, fr] = restrict_pair(g, f, a, b);
    const std::size_t m = fr.segments();
    check_schedule(sched, m);
    const auto& kern = kernels::active();

    // f_Jbar on the nodes a + j*step, j = 0..m+k: frozen at f(b) to the right.
    std::vector<double> ext(fr.values);
    ext.resize(m + 1 + sched.largest(), fr.values.back());

    std::vector<double> per_eps;
    for (std::size_t k : sched.multiples) {
        // Nodes left of a: g_J = g(a) and f_Jbar(s) = 0, so only f_Jbar(s+eps) survives.
        double head = 0.0;
        for (std::size_t i = 0; i < k; ++i) head += fr.values[i];
        const double body = kern.shifted_diff_dot(gr.values.data(), ext.data(), m, k);
        per_eps.push_back((gr.values.front() * head + body) / static_cast<double>(k));
    }
    return make_result(sched, fr.step, std::move(per_eps));
}

RegIntegralResult backward_integral(const SampledFunction& g, const SampledFunction& f, double a,
                                    double b, const EpsSchedule& sched) {
    const auto [gr, fr] = restrict_pair(g, f, a, b);
    const std::size_t m = fr.segments();
    check_schedule(sched, m);
    const auto& kern = kernels::active();

    std::vector<double> per_eps;
    std::vector<double> ext;
    for (std::size_t k : sched.multiples) {
        // f_Jbar is 0 left of a: k zeros followed by the samples.
        ext.assign(k, 0.0);
        ext.insert(ext.end(), fr.values.begin(), fr.values.end());
        double body = kern.shifted_diff_dot(gr.values.data(), ext.data(), m, k);
        // g_J vanishes right of b, so the node at b carries half a cell.
        body += 0.5 * gr.values[m] * (fr.values[m] - ext[m]);
        per_eps.push_back(body / static_cast<double>(k));
    }
    return make_result(sched, fr.step, std::move(per_eps));
}

double MeasureOnInterval::total_variation() const {
    double tv = 0.0;
    for (const auto& [loc, mass] : atoms) tv += std::abs(mass);
    if (density.values.size() > 1) {
        for (std::size_t j = 0; j + 1 < density.values.size(); ++j) {
            tv += 0.5 * (std::abs(density.values[j]) + std::abs(density.values[j + 1])) * density.step;
        }
    }
    return tv;
}

RegIntegralResult backward_integral_measure(const MeasureOnInterval& mu, const SampledFunction& f,
                                            const EpsSchedule& sched) {
    check_schedule(sched, f.segments());
    const double tol = 1e-9 * std::max(1.0, std::abs(f.b() - f.a));
    for (const auto& [loc, mass] : mu.atoms) {
        if (loc < f.a - tol || loc > f.b() + tol) throw DomainError("atom outside the interval");
    }
    const RealLineExtension fj = extend(f, Extension::Jbar);

    RegIntegralResult density_part;
    const bool has_density = mu.density.values.size() > 1;
    if (has_density) density_part = backward_integral(mu.density, f, f.a, f.b(), sched);

    std::vector<double> per_eps;
    for (std::size_t i = 0; i < sched.multiples.size(); ++i) {
        const double eps = f.step * static_cast<double>(sched.multiples[i]);
        double v = 0.0;
        for (const auto& [loc, mass] : mu.atoms) v += mass * (fj(loc) - fj(loc - eps)) / eps;
        if (has_density) v += density_part.per_eps[i];
        per_eps.push_back(v);
    }
    return make_result(sched, f.step, std::move(per_eps));
}

// ---------------------------------------------------------------------------
// Covariation

CovariationResult covariation(const SampledFunction& f, const SampledFunction& g, double a, double b,
                              const EpsSchedule& sched) {
    if (!f.same_grid(g)) throw AlignmentError("covariation arguments are sampled on different grids");
    if (a > 0.0 || b < 0.0) throw DomainError("covariation interval must contain 0");
    const SampledFunction fr = f.restrict_to(a, b);
    const SampledFunction gr = g.restrict_to(a, b);
    const std::size_t m = fr.segments();
    check_schedule(sched, m);

    const double ratio = -fr.a / fr.step;
    const auto i0 = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(i0)) > 1e-9 * std::max(1.0, ratio)) {
        throw AlignmentError("0 is not a node of the covariation interval");
    }

    const std::size_t kmax = sched.largest();
    std::vector<double> fe(fr.values), ge(gr.values);
    fe.resize(m + 1 + kmax, fr.values.back());
    ge.resize(m + 1 + kmax, gr.values.back());
    const auto& kern = kernels::active();

    CovariationResult r;
    std::vector<double> prod(m);
    for (std::size_t k : sched.multiples) {
        kern.increment_products(fe.data(), ge.data(), m, k, prod.data());
        SampledFunction curve;
        curve.a = fr.a;
        curve.step = fr.step;
        curve.values.assign(m + 1, 0.0);
        const double inv_k = 1.0 / static_cast<double>(k);
        double acc = 0.0;
        for (std::size_t i = i0; i < m; ++i) {
            acc += prod[i];
            curve.values[i + 1] = acc * inv_k;
        }
        acc = 0.0;
        for (std::size_t i = i0; i-- > 0;) {
            acc += prod[i];
            curve.values[i] = -acc * inv_k;
        }
        r.eps.push_back(fr.step * static_cast<double>(k));
        r.per_eps.push_back(std::move(curve));
    }

    r.value = r.per_eps.back();
    r.extrapolated = r.value;
    std::vector<double> column(r.per_eps.size());
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t e = 0; e < column.size(); ++e) column[e] = r.per_eps[e].values[i];
        if (sched.extrapolate) r.extrapolated.values[i] = richardson_limit(r.eps, column);
        if ((i == 0 || i == m) && !converges(column)) r.converged = false;
    }
    return r;
}

CovariationResult quadratic_variation(const SampledFunction& f, double a, double b,
                                      const EpsSchedule& sched) {
    return covariation(f, f, a, b, sched);
}

// ---------------------------------------------------------------------------
// Stieltjes oracle

double stieltjes_integral(const SampledFunction& g, const SampledFunction& f, double a, double b,
                          StieltjesConvention convention) {
    const auto [gr, fr] = restrict_pair(g, f, a, b);
    const auto& gv = gr.values;
    const auto& fv = fr.values;
    double s = gv.front() * fv.front();
    for (std::size_t j = 0; j + 1 < fv.size(); ++j) {
        const double weight = convention == StieltjesConvention::left_point ? gv[j] : gv[j + 1];
        s += weight * (fv[j + 1] - fv[j]);
    }
    return s;
}

}  // namespace fito
