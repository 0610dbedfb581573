#include "eigenshape/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eigenshape/errors.hpp"

namespace eigenshape {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kStarCheckGrid = 2048;
}  // namespace

Direction Direction::fourier(std::vector<double> packed) {
  if (packed.empty() || packed.size() % 2 == 0)
    throw std::invalid_argument("Direction::fourier: packed size must be odd (a0 + N cos + N sin)");
  Direction d;
  d.coeffs = std::move(packed);
  return d;
}

Direction Direction::grid_samples(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("Direction::grid_samples: empty grid");
  Direction d;
  d.grid = std::move(values);
  return d;
}

std::vector<double> uniform_angles(int M) {
  std::vector<double> thetas(M);
  for (int i = 0; i < M; ++i) thetas[i] = kTwoPi * i / M;
  return thetas;
}

RadiusSamples radius_eval(const FourierBoundary& boundary, const std::vector<double>& thetas) {
  const int N = boundary.order();
  RadiusSamples out;
  out.rho.resize(thetas.size());
  out.drho.resize(thetas.size());
  out.ddrho.resize(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    double r = boundary.a0, dr = 0.0, ddr = 0.0;
    for (int j = 1; j <= N; ++j) {
      const double c = std::cos(j * thetas[i]);
      const double s = std::sin(j * thetas[i]);
      const double aj = boundary.a[j - 1];
      const double bj = boundary.b[j - 1];
      r += aj * c + bj * s;
      dr += j * (bj * c - aj * s);
      ddr -= j * j * (aj * c + bj * s);
    }
    out.rho[i] = r;
    out.drho[i] = dr;
    out.ddrho[i] = ddr;
  }
  return out;
}

void require_star_shaped(const FourierBoundary& boundary) {
  if (boundary.a.size() != boundary.b.size())
    throw std::invalid_argument("FourierBoundary: a and b must have equal length");
  const auto rs = radius_eval(boundary, uniform_angles(kStarCheckGrid));
  for (double r : rs.rho)
    if (!(r > 0.0)) throw NonStarShaped("radius function is not strictly positive");
}

BoundaryFields boundary_fields(const FourierBoundary& boundary, int M) {
  if (M < 64 || M % 2 != 0)
    throw std::invalid_argument("boundary_fields: M must be even and >= 64");
  require_star_shaped(boundary);

  BoundaryFields f;
  f.thetas = uniform_angles(M);
  const auto rs = radius_eval(boundary, f.thetas);
  f.points.resize(M);
  f.normals.resize(M);
  f.curvature.resize(M);
  f.dsigma.resize(M);
  const double dtheta = kTwoPi / M;
  for (int i = 0; i < M; ++i) {
    const double r = rs.rho[i], dr = rs.drho[i], ddr = rs.ddrho[i];
    const double c = std::cos(f.thetas[i]), s = std::sin(f.thetas[i]);
    const double g = std::sqrt(r * r + dr * dr);  // |x'(theta)|
    f.points[i] = {r * c, r * s};
    // outward normal of (r e_r): (r e_r - r' e_theta)/|x'|
    f.normals[i] = {(r * c + dr * s) / g, (r * s - dr * c) / g};
    f.curvature[i] = (r * r + 2.0 * dr * dr - r * ddr) / (g * g * g);
    f.dsigma[i] = g * dtheta;
  }
  return f;
}

double perimeter(const FourierBoundary& boundary, int quad_points) {
  require_star_shaped(boundary);
  const auto rs = radius_eval(boundary, uniform_angles(quad_points));
  double sum = 0.0;
  for (int i = 0; i < quad_points; ++i)
    sum += std::sqrt(rs.rho[i] * rs.rho[i] + rs.drho[i] * rs.drho[i]);
  return sum * kTwoPi / quad_points;
}

std::vector<double> perimeter_gradient(const FourierBoundary& boundary, int quad_points) {
  require_star_shaped(boundary);
  const int N = boundary.order();
  const auto thetas = uniform_angles(quad_points);
  const auto rs = radius_eval(boundary, thetas);
  std::vector<double> grad(boundary.coeff_count(), 0.0);
  const double dtheta = kTwoPi / quad_points;
  for (int i = 0; i < quad_points; ++i) {
    const double r = rs.rho[i], dr = rs.drho[i];
    const double inv_g = 1.0 / std::sqrt(r * r + dr * dr);
    grad[0] += r * inv_g * dtheta;  // d rho/d a0 = 1, derivative part zero
    for (int j = 1; j <= N; ++j) {
      const double c = std::cos(j * thetas[i]);
      const double s = std::sin(j * thetas[i]);
      grad[j] += (r * c - dr * j * s) * inv_g * dtheta;
      grad[N + j] += (r * s + dr * j * c) * inv_g * dtheta;
    }
  }
  return grad;
}

FourierBoundary scale(const FourierBoundary& boundary, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("scale: factor must be positive");
  FourierBoundary out = boundary;
  out.a0 *= t;
  for (auto& x : out.a) x *= t;
  for (auto& x : out.b) x *= t;
  return out;
}

FourierBoundary rotate(const FourierBoundary& boundary, double alpha) {
  FourierBoundary out = boundary;
  for (int j = 1; j <= boundary.order(); ++j) {
    const double c = std::cos(j * alpha), s = std::sin(j * alpha);
    out.a[j - 1] = boundary.a[j - 1] * c - boundary.b[j - 1] * s;
    out.b[j - 1] = boundary.a[j - 1] * s + boundary.b[j - 1] * c;
  }
  return out;
}

std::vector<double> direction_values(const Direction& direction, const std::vector<double>& thetas) {
  if (direction.is_grid()) {
    if (direction.grid.size() != thetas.size())
      throw std::invalid_argument("direction_values: grid direction size does not match angle grid");
    return direction.grid;
  }
  const FourierBoundary as_boundary = unpack_coeffs(direction.coeffs);
  return radius_eval(as_boundary, thetas).rho;
}

std::vector<double> fourier_from_grid(const std::vector<double>& grid_values) {
  const int M = static_cast<int>(grid_values.size());
  if (M < 4 || M % 2 != 0)
    throw std::invalid_argument("fourier_from_grid: need an even number of samples");
  const int N = M / 2;
  std::vector<double> packed(1 + 2 * N, 0.0);
  const auto thetas = uniform_angles(M);
  double mean = 0.0;
  for (double v : grid_values) mean += v;
  packed[0] = mean / M;
  for (int j = 1; j < N; ++j) {
    double ca = 0.0, sb = 0.0;
    for (int i = 0; i < M; ++i) {
      ca += grid_values[i] * std::cos(j * thetas[i]);
      sb += grid_values[i] * std::sin(j * thetas[i]);
    }
    packed[j] = 2.0 * ca / M;
    packed[N + j] = 2.0 * sb / M;
  }
  // Nyquist mode: cos(N theta_i) = (-1)^i on the grid, weight 1/M, sine absent.
  double cn = 0.0;
  for (int i = 0; i < M; ++i) cn += grid_values[i] * (i % 2 == 0 ? 1.0 : -1.0);
  packed[N] = cn / M;
  return packed;
}

FourierBoundary perturb(const FourierBoundary& boundary, const Direction& direction, double step) {
  const std::vector<double> packed =
      direction.is_grid() ? fourier_from_grid(direction.grid) : direction.coeffs;
  const FourierBoundary d = unpack_coeffs(packed);
  FourierBoundary out = boundary;
  const int N = std::max(out.order(), d.order());
  out.a.resize(N, 0.0);
  out.b.resize(N, 0.0);
  out.a0 += step * d.a0;
  for (int j = 0; j < d.order(); ++j) {
    out.a[j] += step * d.a[j];
    out.b[j] += step * d.b[j];
  }
  return out;
}

std::vector<double> pack_coeffs(const FourierBoundary& boundary) {
  std::vector<double> packed;
  packed.reserve(boundary.coeff_count());
  packed.push_back(boundary.a0);
  packed.insert(packed.end(), boundary.a.begin(), boundary.a.end());
  packed.insert(packed.end(), boundary.b.begin(), boundary.b.end());
  return packed;
}

FourierBoundary unpack_coeffs(const std::vector<double>& packed) {
  if (packed.empty() || packed.size() % 2 == 0)
    throw std::invalid_argument("unpack_coeffs: packed size must be odd");
  const int N = static_cast<int>((packed.size() - 1) / 2);
  FourierBoundary b;
  b.a0 = packed[0];
  b.a.assign(packed.begin() + 1, packed.begin() + 1 + N);
  b.b.assign(packed.begin() + 1 + N, packed.end());
  return b;
}

}  // namespace eigenshape
