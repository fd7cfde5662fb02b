#pragma once

// Deterministic calculus via regularization on a sampled interval [a,b].
//
// The forward integral integrates g_J over the whole real line, so a constant
// integrand produces f(b) and, in general, the result carries the boundary
// term g(a)f(a). It is not the integral over ]a,b] alone.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fito/paths.hpp"

namespace fito {

// Regularization parameters as multiples of the grid step, strictly decreasing.
struct EpsSchedule {
    std::vector<std::size_t> multiples{8, 4, 2, 1};
    bool extrapolate = true;

    // {2^(levels-1), ..., 2, 1}
    static EpsSchedule dyadic(std::size_t levels);
    // "dyadic:K" or an explicit list "8,4,2,1".
    static EpsSchedule parse(const std::string& spec);

    void validate() const;
    std::size_t largest() const { return multiples.front(); }
};

struct RegIntegralResult {
    double value = 0.0;         // at the smallest eps
    double extrapolated = 0.0;  // eps -> 0 limit (equals value when extrapolation is off)
    std::vector<double> eps;
    std::vector<double> per_eps;
    bool converged = true;

    // |extrapolated - value|, used as the error scale of the limit.
    double extrapolation_error() const;
    double limit() const { return extrapolated; }
};

// Least-squares intercept of v = L + c*eps. With two points this is the
// classical 2 v(eps/2) - v(eps).
double richardson_limit(const std::vector<double>& eps, const std::vector<double>& values);

// False when successive differences change sign while growing more than
// threefold (above a rounding floor).
bool converges(const std::vector<double>& values);

// Assemble a result from per-eps values.
RegIntegralResult make_result(const EpsSchedule& sched, double step, std::vector<double> per_eps);

// Definite forward integral of g with respect to f on [a,b].
RegIntegralResult forward_integral(const SampledFunction& g, const SampledFunction& f, double a,
                                   double b, const EpsSchedule& sched = {});
// Definite backward integral of g with respect to f on [a,b].
RegIntegralResult backward_integral(const SampledFunction& g, const SampledFunction& f, double a,
                                    double b, const EpsSchedule& sched = {});

// Finite signed measure on an interval: atoms plus an optional density on the grid.
struct MeasureOnInterval {
    std::vector<std::pair<double, double>> atoms;  // (location, mass)
    SampledFunction density;                       // empty values = no density

    double total_variation() const;
};

// Backward integral of a measure against f over the range of f.
RegIntegralResult backward_integral_measure(const MeasureOnInterval& mu, const SampledFunction& f,
                                            const EpsSchedule& sched = {});

struct CovariationResult {
    SampledFunction value;         // curve at the smallest eps
    SampledFunction extrapolated;  // pointwise eps -> 0 limit
    std::vector<double> eps;
    std::vector<SampledFunction> per_eps;
    bool converged = true;
};

// x -> (1/eps) * int_0^x (f(s+eps)-f(s))(g(s+eps)-g(s)) ds on the nodes of [a,b];
// 0 must be a node. Beyond b both functions are held at their value at b.
CovariationResult covariation(const SampledFunction& f, const SampledFunction& g, double a, double b,
                              const EpsSchedule& sched = {});
CovariationResult quadratic_variation(const SampledFunction& f, double a, double b,
                                      const EpsSchedule& sched = {});

enum class StieltjesConvention { left_point, point };

// g(a)f(a) + sum over cells of g * delta f, with g taken at the left node
// (left_point, the s- convention) or at the right node (point).
double stieltjes_integral(const SampledFunction& g, const SampledFunction& f, double a, double b,
                          StieltjesConvention convention);

}  // namespace fito
