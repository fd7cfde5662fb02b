#pragma once

// Named test functionals shared by the CLI, the tests and the Kolmogorov problems.
//
//   markovian        exp((t-T)/2) sin(eta(0))
//   integral-mean    (1/T) int_{-T}^0 eta(x) dx
//   cyl-heat         Psi = x^2 + T - t, phi = 1
//   cyl-movavg       Psi = x^2 + int_t^T phi^2, phi(u) = exp(-u)
//   cyl-pair         Psi = x1 x2 + sin(x2) + t, phi1 = 1, phi2 = cos
//   square-integral  int_{-T}^0 eta(x)^2 dx
//   linear-integral  int_{-T}^0 cos(x) eta(x) dx
//   squared-linear   (int_{-T}^0 cos(x) eta(x) dx)^2

#include <optional>
#include <string>
#include <vector>

#include "fito/frechet.hpp"
#include "fito/functionals.hpp"

namespace fito {

std::vector<std::string> functional_names();
std::vector<std::string> cylindrical_names();
std::vector<std::string> frechet_names();

// UsageError for unknown names.
PathFunctional make_functional(const std::string& name, double horizon);
std::optional<CylindricalFunctional> make_cylindrical(const std::string& name, double horizon);
FrechetTestFunctional make_frechet(const std::string& name, double horizon);

// Trapezoid rule over the past samples (the present does not enter).
double trapezoid(std::span<const double> values, double step);

}  // namespace fito
