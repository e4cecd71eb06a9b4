#pragma once

// Nystrom discretizations of the area and boundary integral operators on a
// disk. Functions come in three flavours: dense node-to-node matrices,
// matrix-free node application, and evaluation at arbitrary targets.

#include "vekua/mesh.hpp"
#include "vekua/polar_interp.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vekua {

class OperatorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A = A0 / |z - a| and B = B0 / |z - a| sampled on mesh nodes.
template <typename Real>
struct CoefficientPair {
  ComplexVector<Real> A0;
  ComplexVector<Real> B0;
  ComplexVector<Real> A;
  ComplexVector<Real> B;
  std::complex<Real> a{};
  Real mu = 0;
  bool mu_overridden = false;

  bool is_zero() const {
    return (A0.size() == 0 || A0.isZero(0)) && (B0.size() == 0 || B0.isZero(0));
  }
};

template <typename Real>
CoefficientPair<Real> make_coefficients(const DiskMesh<Real>& mesh, ComplexVector<Real> A0,
                                        ComplexVector<Real> B0,
                                        std::optional<Real> mu_override = {}) {
  if (A0.size() != mesh.size() || B0.size() != mesh.size())
    throw OperatorError("make_coefficients: sample count differs from node count");
  if (!A0.allFinite() || !B0.allFinite())
    throw OperatorError("make_coefficients: non-finite coefficient sample");
  CoefficientPair<Real> c;
  c.a = mesh.singular_point;
  RealVector<Real> inv = (mesh.nodes.array() - c.a).abs().inverse();
  c.A = A0.array() * inv.array().template cast<std::complex<Real>>();
  c.B = B0.array() * inv.array().template cast<std::complex<Real>>();
  c.mu = A0.cwiseAbs().maxCoeff() + B0.cwiseAbs().maxCoeff();
  if (mu_override) {
    if (!(*mu_override >= 0)) throw OperatorError("make_coefficients: mu override must be >= 0");
    c.mu = *mu_override;
    c.mu_overridden = true;
  }
  c.A0 = std::move(A0);
  c.B0 = std::move(B0);
  return c;
}

template <typename Real>
CoefficientPair<Real> zero_coefficients(const DiskMesh<Real>& mesh) {
  return make_coefficients<Real>(mesh, ComplexVector<Real>::Zero(mesh.size()),
                                 ComplexVector<Real>::Zero(mesh.size()));
}

/// Complex samples on the nodes of a mesh.
template <typename Real>
struct FieldOnMesh {
  std::shared_ptr<const DiskMesh<Real>> mesh;
  ComplexVector<Real> values;
  std::optional<Real> beta;
  std::optional<Real> nu;

  FieldOnMesh() = default;
  FieldOnMesh(std::shared_ptr<const DiskMesh<Real>> m, ComplexVector<Real> v)
      : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh || values.size() != mesh->size())
      throw OperatorError("FieldOnMesh: value count differs from node count");
    if (!values.allFinite()) throw OperatorError("FieldOnMesh: non-finite value");
  }
};

/// Self-cell treatment for targets that are nodes of the same mesh.
enum class NodeSelfRule {
  constant_exact,  // diagonal chosen so that T_G 1 = conj(z - c) is reproduced
  drop,            // self term dropped (zero disk average of the kernel)
};

/// Treatment of targets that are arbitrary points of the closed disk.
enum class OffGridRule {
  taylor,     // first-order Taylor subtraction with closed-form disk moments
  drop_self,  // plain sum, cells with |zeta_j - t| < cell_radius_j / 2 dropped
  none,       // plain sum; a target on a node is an error
};

// ------------------------------------------------------------------ star

/// f* = A f + B conj(f) on the nodes.
template <typename Real>
ComplexVector<Real> apply_star(const CoefficientPair<Real>& c, const ComplexVector<Real>& V) {
  if (V.size() != c.A.size()) throw OperatorError("apply_star: size mismatch");
  return c.A.cwiseProduct(V) + c.B.cwiseProduct(V.conjugate());
}

// --------------------------------------------------------- area operator

namespace detail {

template <typename Real>
void check_targets(const DiskMesh<Real>& mesh, const ComplexVector<Real>& targets,
                   const char* who) {
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const auto t = targets(i);
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
      throw OperatorError(std::string(who) + ": non-finite target");
    if (std::abs(t - mesh.center) > mesh.radius * (1 + Real(1e-12)))
      throw OperatorError(std::string(who) + ": target outside the closed disk");
  }
}

/// Matrix-free node application of T_G with the constant-exact diagonal. The
/// sign argument exists for fault-injection checks only.
template <typename Real>
ComplexVector<Real> t_area_nodes_signed(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                                        NodeSelfRule rule, Real sign) {
  using C = std::complex<Real>;
  const Eigen::Index n = mesh.size();
  const Real k = -sign / std::numbers::pi_v<Real>;
  ComplexVector<Real> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const C zi = mesh.nodes(i);
    const C fi = f(i);
    C s{};
    if (rule == NodeSelfRule::constant_exact) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) s += mesh.weights(j) * (f(j) - fi) / (mesh.nodes(j) - zi);
      out(i) = k * s + sign * std::conj(zi - mesh.center) * fi;
    } else {
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) s += mesh.weights(j) * f(j) / (mesh.nodes(j) - zi);
      out(i) = k * s;
    }
  }
  return out;
}

}  // namespace detail

/// Dense matrix K with (K f)_i = (T_G f)(zeta_i).
template <typename Real>
ComplexMatrix<Real> t_area_matrix(const DiskMesh<Real>& mesh,
                                  NodeSelfRule rule = NodeSelfRule::constant_exact) {
  using C = std::complex<Real>;
  const Eigen::Index n = mesh.size();
  const Real k = -1 / std::numbers::pi_v<Real>;
  ComplexMatrix<Real> K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const C zj = mesh.nodes(j);
    const Real wj = mesh.weights(j) * k;
    for (Eigen::Index i = 0; i < n; ++i) K(i, j) = i == j ? C{} : wj / (zj - mesh.nodes(i));
  }
  if (rule == NodeSelfRule::constant_exact) {
    for (Eigen::Index i = 0; i < n; ++i)
      K(i, i) = std::conj(mesh.nodes(i) - mesh.center) - K.row(i).sum();
  }
  return K;
}

/// Row vector p with p f = (T_G f)(a), a the singular point (never a node).
template <typename Real>
ComplexVector<Real> t_area_pin_row(const DiskMesh<Real>& mesh) {
  const Real k = -1 / std::numbers::pi_v<Real>;
  ComplexVector<Real> p(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j)
    p(j) = k * mesh.weights(j) / (mesh.nodes(j) - mesh.singular_point);
  return p;
}

/// Dense matrix of the pinned operator T_{G,a} on nodes.
template <typename Real>
ComplexMatrix<Real> t_area_pinned_matrix(const DiskMesh<Real>& mesh,
                                         NodeSelfRule rule = NodeSelfRule::constant_exact) {
  ComplexMatrix<Real> K = t_area_matrix(mesh, rule);
  K.rowwise() -= t_area_pin_row(mesh).transpose();
  return K;
}

template <typename Real>
ComplexVector<Real> t_area_nodes(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                                 NodeSelfRule rule = NodeSelfRule::constant_exact) {
  if (f.size() != mesh.size()) throw OperatorError("t_area_nodes: size mismatch");
  return detail::t_area_nodes_signed(mesh, f, rule, Real(1));
}

template <typename Real>
std::complex<Real> t_area_at_singular_point(const DiskMesh<Real>& mesh,
                                            const ComplexVector<Real>& f) {
  return t_area_pin_row(mesh).transpose() * f;
}

template <typename Real>
ComplexVector<Real> t_area_pinned_nodes(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                                        NodeSelfRule rule = NodeSelfRule::constant_exact) {
  ComplexVector<Real> out = t_area_nodes(mesh, f, rule);
  out.array() -= t_area_at_singular_point(mesh, f);
  return out;
}

/// (T_G f)(t) at arbitrary targets of the closed disk.
template <typename Real>
ComplexVector<Real> t_area(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                           const ComplexVector<Real>& targets,
                           OffGridRule rule = OffGridRule::taylor) {
  using C = std::complex<Real>;
  if (f.size() != mesh.size()) throw OperatorError("t_area: size mismatch");
  detail::check_targets(mesh, targets, "t_area");
  const Real k = -1 / std::numbers::pi_v<Real>;
  const Real R2 = mesh.radius * mesh.radius;
  const Eigen::Index n = mesh.size();
  ComplexVector<Real> out(targets.size());
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const C t = targets(i);
    C s{};
    if (rule == OffGridRule::taylor && t != mesh.center) {
      const Jet<Real> jt = polar_jet(mesh, f, t);
      for (Eigen::Index j = 0; j < n; ++j) {
        const C d = mesh.nodes(j) - t;
        if (d == C{}) continue;
        s += mesh.weights(j) * (f(j) - jt.value - jt.dz * d - jt.dzbar * std::conj(d)) / d;
      }
      const C tb = std::conj(t - mesh.center);
      out(i) = k * s + jt.value * tb - jt.dz * R2 - jt.dzbar * tb * tb / Real(2);
    } else {
      for (Eigen::Index j = 0; j < n; ++j) {
        const C d = mesh.nodes(j) - t;
        if (rule == OffGridRule::drop_self && std::abs(d) < mesh.cell_radius(j) / 2) continue;
        if (d == C{}) throw OperatorError("t_area: target coincides with a quadrature node");
        s += mesh.weights(j) * f(j) / d;
      }
      out(i) = k * s;
    }
  }
  return out;
}

/// (T_{G,a} f)(t) = (T_G f)(t) - (T_G f)(a); exactly zero at t = a.
template <typename Real>
ComplexVector<Real> t_area_pinned(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                                  const ComplexVector<Real>& targets,
                                  OffGridRule rule = OffGridRule::taylor) {
  ComplexVector<Real> out = t_area(mesh, f, targets, rule);
  const std::complex<Real> pin = t_area_at_singular_point(mesh, f);
  for (Eigen::Index i = 0; i < targets.size(); ++i)
    out(i) = targets(i) == mesh.singular_point ? std::complex<Real>{} : out(i) - pin;
  return out;
}

/// P_{G,a} V = T_{G,a}(V*).
template <typename Real>
ComplexVector<Real> p_pinned(const DiskMesh<Real>& mesh, const CoefficientPair<Real>& c,
                             const ComplexVector<Real>& V, const ComplexVector<Real>& targets,
                             OffGridRule rule = OffGridRule::taylor) {
  return t_area_pinned(mesh, apply_star(c, V), targets, rule);
}

// -------------------------------------------------------- boundary operators

/// Result of a boundary integral evaluated at interior targets.
template <typename Real>
struct BoundaryEval {
  ComplexVector<Real> values;
  std::vector<bool> low_accuracy;  // target closer to the circle than one node spacing
  bool any_low_accuracy() const {
    for (bool b : low_accuracy)
      if (b) return true;
    return false;
  }
};

namespace detail {

template <typename Real>
void check_boundary_targets(const BoundaryGrid<Real>& grid, const ComplexVector<Real>& targets,
                            std::vector<bool>& low, const char* who) {
  low.assign(targets.size(), false);
  const Real spacing = grid.radius * grid.step();
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const auto t = targets(i);
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
      throw OperatorError(std::string(who) + ": non-finite target");
    const Real dist = grid.radius - std::abs(t - grid.center);
    if (dist <= 0) throw OperatorError(std::string(who) + ": target on or outside the circle");
    low[i] = dist < spacing;
  }
}

}  // namespace detail

/// (K_Gamma h)(z) = (1/2 pi i) int h(t) / (t - z) dt, trapezoid rule.
template <typename Real>
BoundaryEval<Real> cauchy_boundary(const BoundaryGrid<Real>& grid, const ComplexVector<Real>& h,
                                   const ComplexVector<Real>& targets) {
  using C = std::complex<Real>;
  if (h.size() != grid.size()) throw OperatorError("cauchy_boundary: size mismatch");
  BoundaryEval<Real> r;
  detail::check_boundary_targets(grid, targets, r.low_accuracy, "cauchy_boundary");
  const Real k = grid.step() / (2 * std::numbers::pi_v<Real>);
  r.values.resize(targets.size());
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    C s{};
    for (Eigen::Index l = 0; l < grid.size(); ++l) {
      const C u = grid.nodes(l) - grid.center;
      s += h(l) * u / (grid.nodes(l) - targets(i));
    }
    r.values(i) = k * s;
  }
  return r;
}

/// K_{Gamma,a} h = K_Gamma h - (K_Gamma h)(a).
template <typename Real>
BoundaryEval<Real> cauchy_boundary_pinned(const BoundaryGrid<Real>& grid,
                                          const ComplexVector<Real>& h,
                                          const ComplexVector<Real>& targets,
                                          std::complex<Real> a) {
  BoundaryEval<Real> r = cauchy_boundary(grid, h, targets);
  ComplexVector<Real> at(1);
  at(0) = a;
  const std::complex<Real> pin = cauchy_boundary(grid, h, at).values(0);
  for (Eigen::Index i = 0; i < targets.size(); ++i)
    r.values(i) = targets(i) == a ? std::complex<Real>{} : r.values(i) - pin;
  return r;
}

/// (D_m g)(z) = z^m / (2 pi i) int g(t) (t + z) / (t - z) dt / t on a circle
/// centred at 0.
template <typename Real>
BoundaryEval<Real> schwarz_dm(const BoundaryGrid<Real>& grid, const RealVector<Real>& g, int m,
                              const ComplexVector<Real>& targets) {
  using C = std::complex<Real>;
  if (m < 0) throw OperatorError("schwarz_dm: m must be >= 0");
  if (grid.center != C{}) throw OperatorError("schwarz_dm: circle must be centred at 0");
  if (g.size() != grid.size()) throw OperatorError("schwarz_dm: size mismatch");
  BoundaryEval<Real> r;
  detail::check_boundary_targets(grid, targets, r.low_accuracy, "schwarz_dm");
  const Real k = grid.step() / (2 * std::numbers::pi_v<Real>);
  r.values.resize(targets.size());
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const C z = targets(i);
    C s{};
    for (Eigen::Index l = 0; l < grid.size(); ++l) {
      const C t = grid.nodes(l);
      s += g(l) * (t + z) / (t - z);
    }
    r.values(i) = std::pow(z, m) * k * s;
  }
  return r;
}

// ------------------------------------------------------ reflection operator

namespace detail {

template <typename Real>
void check_centered(const DiskMesh<Real>& mesh, const char* who) {
  if (mesh.center != std::complex<Real>{} || mesh.singular_point != std::complex<Real>{})
    throw OperatorError(std::string(who) + ": mesh must be centred at the singular point 0");
}

/// Integer power with exact results for small exponents.
template <typename Real>
std::complex<Real> ipow(std::complex<Real> x, int n) {
  std::complex<Real> r{1, 0};
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

/// I2 = sum_j w_j conj(f_j) / conj(zeta_j).
template <typename Real>
std::complex<Real> reflection_moment(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f) {
  std::complex<Real> s{};
  for (Eigen::Index j = 0; j < mesh.size(); ++j)
    s += mesh.weights(j) * std::conj(f(j) / mesh.nodes(j));
  return s;
}

/// I1(t) = int conj(f(zeta)) / (R^2 - conj(zeta) t) dG at arbitrary targets.
template <typename Real>
std::complex<Real> reflection_integral(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                                       std::complex<Real> t, OffGridRule rule) {
  using C = std::complex<Real>;
  const Real R2 = mesh.radius * mesh.radius;
  const Real pi = std::numbers::pi_v<Real>;
  C s{};
  if (rule == OffGridRule::taylor && t != C{}) {
    const Jet<Real> jt = polar_jet(mesh, f, t);
    const C v = std::conj(jt.value), a1 = std::conj(jt.dzbar), a2 = std::conj(jt.dz);
    for (Eigen::Index j = 0; j < mesh.size(); ++j) {
      const C d = mesh.nodes(j) - t;
      s += mesh.weights(j) * (std::conj(f(j)) - v - a1 * d - a2 * std::conj(d)) /
           (R2 - std::conj(mesh.nodes(j)) * t);
    }
    return s + v * pi - a1 * (pi * t / Real(2)) - a2 * (pi * std::conj(t));
  }
  for (Eigen::Index j = 0; j < mesh.size(); ++j)
    s += mesh.weights(j) * std::conj(f(j)) / (R2 - std::conj(mesh.nodes(j)) * t);
  return s;
}

}  // namespace detail

/// (Q_m f)(t) for m >= 1 at arbitrary targets; the mesh must be centred at 0.
template <typename Real>
ComplexVector<Real> qm_area(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f, int m,
                            const ComplexVector<Real>& targets,
                            OffGridRule rule = OffGridRule::taylor) {
  using C = std::complex<Real>;
  if (m < 1) throw OperatorError("qm_area: m must be >= 1");
  detail::check_centered(mesh, "qm_area");
  detail::check_targets(mesh, targets, "qm_area");
  if (f.size() != mesh.size()) throw OperatorError("qm_area: size mismatch");
  const Real pi = std::numbers::pi_v<Real>;
  const Real scale = pi * std::pow(mesh.radius, 2 * m);
  const C I2 = detail::reflection_moment(mesh, f);
  ComplexVector<Real> out(targets.size());
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const C t = targets(i);
    const C I1 = detail::reflection_integral(mesh, f, t, rule);
    out(i) = -(detail::ipow(t, 2 * m) * I1 + detail::ipow(t, 2 * m - 1) * I2) / scale;
  }
  return out;
}

/// t (Q_m f)(t) for m >= 0. For m = 0 the z^{-1} term of Q_0 is absorbed by
/// the factor t, leaving the constant -I2 / pi.
template <typename Real>
ComplexVector<Real> z_qm_area(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f, int m,
                              const ComplexVector<Real>& targets,
                              OffGridRule rule = OffGridRule::taylor) {
  using C = std::complex<Real>;
  if (m < 0) throw OperatorError("z_qm_area: m must be >= 0");
  detail::check_centered(mesh, "z_qm_area");
  detail::check_targets(mesh, targets, "z_qm_area");
  if (f.size() != mesh.size()) throw OperatorError("z_qm_area: size mismatch");
  const Real pi = std::numbers::pi_v<Real>;
  const Real scale = pi * std::pow(mesh.radius, 2 * m);
  const C I2 = detail::reflection_moment(mesh, f);
  ComplexVector<Real> out(targets.size());
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const C t = targets(i);
    const C I1 = detail::reflection_integral(mesh, f, t, rule);
    out(i) = -(detail::ipow(t, 2 * m + 1) * I1 + detail::ipow(t, 2 * m) * I2) / scale;
  }
  return out;
}

/// Dense matrix Z with (Z conj(f))_i = zeta_i (Q_m f)(zeta_i). The diagonal of
/// the reflection kernel is chosen so that constants are integrated exactly.
template <typename Real>
ComplexMatrix<Real> z_qm_matrix(const DiskMesh<Real>& mesh, int m) {
  using C = std::complex<Real>;
  if (m < 0) throw OperatorError("z_qm_matrix: m must be >= 0");
  detail::check_centered(mesh, "z_qm_matrix");
  const Eigen::Index n = mesh.size();
  const Real pi = std::numbers::pi_v<Real>;
  const Real R2 = mesh.radius * mesh.radius;
  const Real scale = pi * std::pow(mesh.radius, 2 * m);
  ComplexMatrix<Real> Z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const C zi = mesh.nodes(i);
    C off{};
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const C kij = mesh.weights(j) / (R2 - std::conj(mesh.nodes(j)) * zi);
      Z(i, j) = kij;
      off += kij;
    }
    Z(i, i) = pi - off;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const C zi = mesh.nodes(i);
    const C c1 = -detail::ipow(zi, 2 * m + 1) / scale;
    const C c2 = -detail::ipow(zi, 2 * m) / scale;
    for (Eigen::Index j = 0; j < n; ++j)
      Z(i, j) = c1 * Z(i, j) + c2 * mesh.weights(j) / std::conj(mesh.nodes(j));
  }
  return Z;
}

/// Matrix-free application of z_qm_matrix to conj(f) given f.
template <typename Real>
ComplexVector<Real> z_qm_nodes(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f, int m) {
  using C = std::complex<Real>;
  if (m < 0) throw OperatorError("z_qm_nodes: m must be >= 0");
  detail::check_centered(mesh, "z_qm_nodes");
  if (f.size() != mesh.size()) throw OperatorError("z_qm_nodes: size mismatch");
  const Eigen::Index n = mesh.size();
  const Real pi = std::numbers::pi_v<Real>;
  const Real R2 = mesh.radius * mesh.radius;
  const Real scale = pi * std::pow(mesh.radius, 2 * m);
  const C I2 = detail::reflection_moment(mesh, f);
  ComplexVector<Real> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const C zi = mesh.nodes(i);
    const C fi = std::conj(f(i));
    C s{};
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i)
        s += mesh.weights(j) * (std::conj(f(j)) - fi) / (R2 - std::conj(mesh.nodes(j)) * zi);
    const C I1 = s + pi * fi;
    out(i) = -(detail::ipow(zi, 2 * m + 1) * I1 + detail::ipow(zi, 2 * m) * I2) / scale;
  }
  return out;
}

}  // namespace vekua
