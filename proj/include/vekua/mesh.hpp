#pragma once

// Graded polar quadrature on a disk and uniform trapezoid rule on its boundary
// circle. Every integral operator in the library consumes these two rules.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace vekua {

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Polar cell-midpoint rule on the disk |z - center| < radius.
///
/// Nodes are ordered ring-major: node (i, k) sits at index i * n_t + k, with
/// ring i spanning [breakpoints(i), breakpoints(i + 1)] and angle
/// (k + 1/2) * 2 pi / n_t. Weights are exact polar cell areas.
template <typename Real>
struct DiskMesh {
  using Scalar = std::complex<Real>;

  Scalar center{0, 0};
  Scalar singular_point{0, 0};
  Real radius = 1;
  int n_r = 0;
  int n_t = 0;
  Real grading = 1;

  RealVector<Real> breakpoints;  // n_r + 1 radii measured from center
  RealVector<Real> ring_radius;  // n_r radial midpoints
  RealVector<Real> angles;       // n_t angular midpoints in (0, 2 pi)
  ComplexVector<Real> nodes;
  RealVector<Real> weights;
  RealVector<Real> cell_radius;  // radius of the disk with the cell's area

  std::vector<std::string> warnings;

  Eigen::Index size() const { return nodes.size(); }
  Eigen::Index index(int ring, int k) const {
    return static_cast<Eigen::Index>(ring) * n_t + k;
  }
  Real angular_step() const { return 2 * std::numbers::pi_v<Real> / n_t; }
  bool centered_at_singular_point() const { return singular_point == center; }
};

/// Uniform nodes t_l = center + R e^{i theta_l}, theta_l = 2 pi l / n_b.
template <typename Real>
struct BoundaryGrid {
  using Scalar = std::complex<Real>;

  Scalar center{0, 0};
  Real radius = 1;
  int n_b = 0;
  RealVector<Real> angles;
  ComplexVector<Real> nodes;
  RealVector<Real> weights;  // all equal to d theta

  Eigen::Index size() const { return nodes.size(); }
  Real step() const { return 2 * std::numbers::pi_v<Real> / n_b; }
};

namespace detail {

template <typename Real>
bool finite(std::complex<Real> z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace detail

/// Builds the graded polar rule. Radial breakpoints are R (i / n_r)^grading
/// measured from the disk center. When the singular point is off-center the
/// grading still clusters toward the center and a warning is recorded.
template <typename Real>
DiskMesh<Real> build_disk_mesh(Real R, std::complex<Real> a, int n_r, int n_t,
                               Real grading, std::complex<Real> center = {0, 0}) {
  if (!std::isfinite(R) || !std::isfinite(grading) || !detail::finite(a) ||
      !detail::finite(center))
    throw MeshError("build_disk_mesh: non-finite input");
  if (R <= 0) throw MeshError("build_disk_mesh: radius must be positive");
  if (n_r < 2) throw MeshError("build_disk_mesh: n_r must be >= 2");
  if (n_t < 4) throw MeshError("build_disk_mesh: n_t must be >= 4");
  if (grading < 1) throw MeshError("build_disk_mesh: grading must be >= 1");
  if (std::abs(a - center) >= R)
    throw MeshError("build_disk_mesh: singular point must lie strictly inside the disk");

  DiskMesh<Real> mesh;
  mesh.center = center;
  mesh.singular_point = a;
  mesh.radius = R;
  mesh.n_r = n_r;
  mesh.n_t = n_t;
  mesh.grading = grading;

  mesh.breakpoints.resize(n_r + 1);
  for (int i = 0; i <= n_r; ++i)
    mesh.breakpoints(i) = R * std::pow(Real(i) / Real(n_r), grading);
  mesh.breakpoints(n_r) = R;

  const Real dtheta = mesh.angular_step();
  mesh.angles.resize(n_t);
  for (int k = 0; k < n_t; ++k) mesh.angles(k) = (Real(k) + Real(0.5)) * dtheta;

  mesh.ring_radius.resize(n_r);
  const Eigen::Index n = Eigen::Index(n_r) * n_t;
  mesh.nodes.resize(n);
  mesh.weights.resize(n);
  mesh.cell_radius.resize(n);
  for (int i = 0; i < n_r; ++i) {
    const Real r0 = mesh.breakpoints(i), r1 = mesh.breakpoints(i + 1);
    const Real rm = (r0 + r1) / 2;
    const Real area = (r1 * r1 - r0 * r0) / 2 * dtheta;
    mesh.ring_radius(i) = rm;
    for (int k = 0; k < n_t; ++k) {
      const Eigen::Index j = mesh.index(i, k);
      mesh.nodes(j) = center + std::polar(rm, mesh.angles(k));
      mesh.weights(j) = area;
      mesh.cell_radius(j) = std::sqrt(area / std::numbers::pi_v<Real>);
    }
  }

  if (!mesh.centered_at_singular_point()) {
    mesh.warnings.emplace_back(
        "singular point is off-center: radial grading clusters toward the disk "
        "center, not toward the singular point");
    for (Eigen::Index j = 0; j < n; ++j)
      if (mesh.nodes(j) == a)
        throw MeshError("build_disk_mesh: singular point coincides with a quadrature node");
  }
  return mesh;
}

template <typename Real>
BoundaryGrid<Real> build_boundary_grid(std::complex<Real> center, Real R, int n_b) {
  if (!std::isfinite(R) || !detail::finite(center))
    throw MeshError("build_boundary_grid: non-finite input");
  if (R <= 0) throw MeshError("build_boundary_grid: radius must be positive");
  if (n_b < 8 || n_b % 2 != 0)
    throw MeshError("build_boundary_grid: n_b must be even and >= 8");

  BoundaryGrid<Real> grid;
  grid.center = center;
  grid.radius = R;
  grid.n_b = n_b;
  grid.angles.resize(n_b);
  grid.nodes.resize(n_b);
  grid.weights = RealVector<Real>::Constant(n_b, grid.step());
  for (int l = 0; l < n_b; ++l) {
    grid.angles(l) = grid.step() * l;
    // Exact quarter-turn values keep t_{n_b/4} = iR free of rounding.
    std::complex<Real> unit;
    if (4 * l == n_b)
      unit = {0, 1};
    else if (2 * l == n_b)
      unit = {-1, 0};
    else if (4 * l == 3 * n_b)
      unit = {0, -1};
    else
      unit = std::polar(Real(1), grid.angles(l));
    grid.nodes(l) = center + R * unit;
  }
  return grid;
}

using Mesh = DiskMesh<double>;
using Grid = BoundaryGrid<double>;
using Complex = std::complex<double>;
using CVector = ComplexVector<double>;
using RVector = RealVector<double>;
using CMatrix = ComplexMatrix<double>;

}  // namespace vekua
