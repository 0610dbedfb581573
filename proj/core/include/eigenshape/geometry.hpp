#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace eigenshape {

// Star-shaped boundary in polar form:
//   rho(theta) = a0 + sum_{j=1}^{N} a[j-1] cos(j theta) + b[j-1] sin(j theta)
// Valid only while rho > 0 everywhere; operations that sample the curve check this.
struct FourierBoundary {
  double a0 = 1.0;
  std::vector<double> a;
  std::vector<double> b;  // same length as a

  int order() const { return static_cast<int>(a.size()); }
  int coeff_count() const { return 1 + 2 * order(); }
};

// Perturbation direction, either in the coefficient layout of FourierBoundary
// (packed [a0, a_1..a_N, b_1..b_N]) or as samples of delta-rho on the uniform
// angle grid used by BoundaryFields.
struct Direction {
  std::vector<double> coeffs;
  std::vector<double> grid;

  bool is_grid() const { return !grid.empty(); }

  static Direction fourier(std::vector<double> packed);
  static Direction grid_samples(std::vector<double> values);
};

struct RadiusSamples {
  std::vector<double> rho;
  std::vector<double> drho;
  std::vector<double> ddrho;
};

// Curve data tabulated at M uniform angles theta_i = 2 pi i / M.
// dsigma holds the arclength quadrature weights sqrt(rho^2 + rho'^2) * dtheta,
// so sum(dsigma) is the perimeter up to quadrature error.
struct BoundaryFields {
  std::vector<double> thetas;
  std::vector<std::array<double, 2>> points;
  std::vector<std::array<double, 2>> normals;  // outward unit normals
  std::vector<double> curvature;
  std::vector<double> dsigma;

  int size() const { return static_cast<int>(thetas.size()); }
};

std::vector<double> uniform_angles(int M);

RadiusSamples radius_eval(const FourierBoundary& boundary, const std::vector<double>& thetas);

// Throws NonStarShaped if rho <= 0 anywhere on a dense check grid.
void require_star_shaped(const FourierBoundary& boundary);

// M must be even and >= 64.
BoundaryFields boundary_fields(const FourierBoundary& boundary, int M);

double perimeter(const FourierBoundary& boundary, int quad_points = 1024);

// d(perimeter)/d(coefficient) in the packed layout, by quadrature of the first
// variation of the arclength integrand.
std::vector<double> perimeter_gradient(const FourierBoundary& boundary, int quad_points = 1024);

FourierBoundary scale(const FourierBoundary& boundary, double t);

// rho(theta - alpha) as a coefficient phase shift.
FourierBoundary rotate(const FourierBoundary& boundary, double alpha);

// Values of a direction's delta-rho at the given angles. Grid directions
// require thetas to be the matching uniform grid.
std::vector<double> direction_values(const Direction& direction, const std::vector<double>& thetas);

// Exact trigonometric interpolation of M uniform grid samples (M even):
// returns a packed coefficient vector of order M/2 whose series reproduces the
// samples at the grid angles to roundoff.
std::vector<double> fourier_from_grid(const std::vector<double>& grid_values);

// boundary + step * direction, padding Fourier orders as needed. Grid
// directions are first converted through fourier_from_grid, which reproduces
// the grid samples exactly, so meshes sampled on the same grid see the
// intended perturbation.
FourierBoundary perturb(const FourierBoundary& boundary, const Direction& direction, double step);

// Packed coefficient layout helpers.
std::vector<double> pack_coeffs(const FourierBoundary& boundary);
FourierBoundary unpack_coeffs(const std::vector<double>& packed);

}  // namespace eigenshape
