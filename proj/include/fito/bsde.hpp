#pragma once

// Regression Monte Carlo for Y_s = H + int_s^T F(r, X_r, Y_r, Z_r) dr - int_s^T Z_r dW_r
// along simulated forward paths, and the finite-dimensional system obtained
// for cylindrical data.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fito/functionals.hpp"
#include "fito/sde.hpp"

namespace fito {

struct BsdeDriver {
    // Empty F means F = 0.
    std::function<double(double t, const PathView& window, double y, double z)> F;
    std::function<double(const PathView& window)> H;
    double lipschitz = 0.0;  // C
    double growth = 0.0;     // m
};

// Monomials of total degree <= degree in the statistics produced by `statistics`
// (centered and scaled per time step). The default statistic is the present value.
struct RegressionBasis {
    std::size_t degree = 2;
    std::size_t dimension = 1;
    std::function<void(double t, const PathView& window, std::span<double> out)> statistics;

    static RegressionBasis present_value(std::size_t degree = 2);
    static RegressionBasis cylindrical(const CylindricalFunctional& cf, std::size_t degree = 2);
    // Number of monomials.
    std::size_t size() const;
};

// Exponent tuples of total degree <= degree, graded (constant first).
std::vector<std::vector<unsigned>> monomial_exponents(std::size_t dimension, std::size_t degree);

struct BsdeSolution {
    McEstimate y0;
    double z0 = 0.0;
    // Regression coefficients for E[Y_{k+1} | F_k] and Z_k, one vector per step
    // (in the standardized features of that step).
    std::vector<std::vector<double>> y_coefficients;
    std::vector<std::vector<double>> z_coefficients;
    std::vector<double> condition_numbers;
    // E int |Z|^2 ds and the ratio to E sup|Y|^2 + E int |F(s,X,0,0)|^2 ds.
    double z_energy = 0.0;
    double z_bound_ratio = 0.0;
    bool implicit = false;
    std::size_t steps = 0;
    double dt = 0.0;
};

// Generic backward sweep over stored forward data.
struct BackwardData {
    std::size_t paths = 0;
    std::size_t steps = 0;
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t dimension = 1;
    std::size_t degree = 2;
    double lipschitz = 0.0;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::function<void(std::size_t k, std::size_t p, std::span<double> out)> statistics;
    std::function<double(std::size_t k, std::size_t p)> noise;
    std::function<double(std::size_t p)> terminal;
    // Empty driver means F = 0.
    std::function<double(std::size_t k, std::size_t p, double y, double z)> driver;
};
BsdeSolution backward_induction(const BackwardData& data);

BsdeSolution solve_bsde(const SdeProblem& prob, const BsdeDriver& drv, const RegressionBasis& basis,
                        const McConfig& cfg);

// Coefficients of a cylindrical problem expressed on the statistics x in R^N.
struct CylindricalPack {
    std::vector<Weight> weights;
    std::function<double(double t, std::span<const double> x)> b;      // b bar
    std::function<double(double t, std::span<const double> x)> sigma;  // sigma bar
    // Empty means F bar = 0.
    std::function<double(double t, std::span<const double> x, double y, double z)> F;
    std::function<double(std::span<const double> x)> H;
    double lipschitz = 0.0;
};

// Euler path of dX = phi(u) b(u, X) du + phi(u) sigma(u, X) dW from x at time t,
// n steps of size dt; writes (n+1) * N values. Uses the same noise stream as the
// window simulation of path `stream`.
void simulate_statistics(const CylindricalPack& pack, double t, std::span<const double> x,
                         double dt, std::size_t n, std::uint64_t seed, std::uint64_t stream,
                         std::span<double> out, std::span<double> noise);

BsdeSolution solve_fbsde_cylindrical(const CylindricalPack& pack, double t,
                                     std::span<const double> x, double horizon, double dt,
                                     std::size_t degree, const McConfig& cfg);

}  // namespace fito
