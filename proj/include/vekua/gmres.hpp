#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>

namespace vekua {

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

/// Restarted GMRES(restart) for A x = b with a matrix-free operator.
/// x holds the initial guess on entry and the solution on exit.
template <typename Real>
GmresResult gmres(const std::function<Eigen::Matrix<Real, Eigen::Dynamic, 1>(
                      const Eigen::Matrix<Real, Eigen::Dynamic, 1>&)>& apply,
                  const Eigen::Matrix<Real, Eigen::Dynamic, 1>& b,
                  Eigen::Matrix<Real, Eigen::Dynamic, 1>& x, Real tol, int max_iter,
                  int restart = 60) {
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  GmresResult res;
  const Real bnorm = b.norm();
  if (bnorm == 0) {
    x.setZero(b.size());
    res.converged = true;
    return res;
  }
  if (x.size() != b.size()) x.setZero(b.size());

  while (res.iterations < max_iter) {
    Vec r = b - apply(x);
    Real beta = r.norm();
    res.relative_residual = static_cast<double>(beta / bnorm);
    if (beta <= tol * bnorm) {
      res.converged = true;
      return res;
    }
    const int m = restart;
    Mat Vb(b.size(), m + 1);
    Mat H = Mat::Zero(m + 1, m);
    Vec cs = Vec::Zero(m), sn = Vec::Zero(m), s = Vec::Zero(m + 1);
    Vb.col(0) = r / beta;
    s(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < max_iter; ++j) {
      ++res.iterations;
      Vec w = apply(Vb.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const Real h = Vb.col(i).dot(w);
          H(i, j) += h;
          w -= h * Vb.col(i);
        }
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0) Vb.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const Real t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const Real d = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = d == 0 ? Real(1) : H(j, j) / d;
      sn(j) = d == 0 ? Real(0) : H(j + 1, j) / d;
      H(j, j) = d;
      H(j + 1, j) = 0;
      s(j + 1) = -sn(j) * s(j);
      s(j) = cs(j) * s(j);
      res.relative_residual = static_cast<double>(std::abs(s(j + 1)) / bnorm);
      if (std::abs(s(j + 1)) <= tol * bnorm) {
        ++j;
        break;
      }
    }
    Vec y = H.topLeftCorner(j, j).template triangularView<Eigen::Upper>().solve(s.head(j));
    x += Vb.leftCols(j) * y;
    if (res.relative_residual <= static_cast<double>(tol)) {
      const Real true_res = (b - apply(x)).norm() / bnorm;
      res.relative_residual = static_cast<double>(true_res);
      if (true_res <= tol * 10) {
        res.converged = true;
        return res;
      }
    }
  }
  return res;
}

}  // namespace vekua
