#pragma once

#include "vekua/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace vekua {

/// Value and Wirtinger derivatives of a mesh field at a point.
template <typename Real>
struct Jet {
  std::complex<Real> value{};
  std::complex<Real> dz{};
  std::complex<Real> dzbar{};
};

namespace detail {

template <typename Real, std::size_t N>
void lagrange(Real x, const std::array<Real, N>& xs, int n, std::array<Real, N>& L,
              std::array<Real, N>& D) {
  for (int i = 0; i < n; ++i) {
    Real l = 1;
    for (int j = 0; j < n; ++j)
      if (j != i) l *= (x - xs[j]) / (xs[i] - xs[j]);
    L[i] = l;
    Real d = 0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      Real p = 1 / (xs[i] - xs[k]);
      for (int j = 0; j < n; ++j)
        if (j != i && j != k) p *= (x - xs[j]) / (xs[i] - xs[j]);
      d += p;
    }
    D[i] = d;
  }
}

}  // namespace detail

/// Tensor-product 4x4 Lagrange interpolation in (r, theta) about the mesh
/// center. The angular stencil wraps periodically; the radial stencil is
/// clamped to the available rings, so points beyond the outermost ring are
/// extrapolated.
template <typename Real>
Jet<Real> polar_jet(const DiskMesh<Real>& mesh, const ComplexVector<Real>& f,
                    std::complex<Real> t) {
  using C = std::complex<Real>;
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  const C d = t - mesh.center;
  const Real r = std::abs(d);
  Real a = std::atan2(d.imag(), d.real());
  if (a < 0) a += two_pi;

  const int nr = std::min(4, mesh.n_r);
  const auto& rm = mesh.ring_radius;
  int i = static_cast<int>(std::lower_bound(rm.data(), rm.data() + rm.size(), r) - rm.data());
  int i0 = std::clamp(i - 2, 0, mesh.n_r - nr);
  std::array<Real, 4> rs{}, Lr{}, Dr{};
  for (int p = 0; p < nr; ++p) rs[p] = rm(i0 + p);
  detail::lagrange(r, rs, nr, Lr, Dr);

  const Real dth = mesh.angular_step();
  const int k = static_cast<int>(std::floor((a - mesh.angles(0)) / dth));
  std::array<Real, 4> ts{}, Lt{}, Dt{};
  std::array<int, 4> ks{};
  for (int q = 0; q < 4; ++q) {
    const int kk = k - 1 + q;
    ts[q] = mesh.angles(0) + kk * dth;
    ks[q] = ((kk % mesh.n_t) + mesh.n_t) % mesh.n_t;
  }
  detail::lagrange(a, ts, 4, Lt, Dt);

  C v{}, fr{}, ft{};
  for (int p = 0; p < nr; ++p) {
    for (int q = 0; q < 4; ++q) {
      const C s = f(mesh.index(i0 + p, ks[q]));
      v += Lr[p] * Lt[q] * s;
      fr += Dr[p] * Lt[q] * s;
      ft += Lr[p] * Dt[q] * s;
    }
  }
  Jet<Real> jet;
  jet.value = v;
  if (r > 0) {
    const C e = std::polar(Real(1), a);
    const C iu(0, 1);
    jet.dz = Real(0.5) / e * (fr - iu / r * ft);
    jet.dzbar = Real(0.5) * e * (fr + iu / r * ft);
  }
  return jet;
}

}  // namespace vekua
