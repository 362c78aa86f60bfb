#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace pubcast {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Largest |partial autocorrelation| the reparametrization can produce. Keeps
// every mapped polynomial a hair inside the stationary region.
inline constexpr double kMaxPartialCorrelation = 1.0 - 1e-7;

// Maps unconstrained values onto the coefficients of a stationary AR
// polynomial 1 - c_1 z - ... - c_p z^p: tanh gives partial autocorrelations,
// Durbin-Levinson turns them into coefficients (Monahan, 1984).
template <typename Derived>
Vector<typename Derived::Scalar> pacf_to_coefficients(const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = raw.size();
  Vector<Scalar> coef(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    coef[i] = std::clamp<Scalar>(std::tanh(raw[i]), -kMaxPartialCorrelation, kMaxPartialCorrelation);
  }
  Vector<Scalar> work(p);
  for (Eigen::Index j = 1; j < p; ++j) {
    const Scalar a = coef[j];
    for (Eigen::Index k = 0; k < j; ++k) work[k] = coef[k] - a * coef[j - k - 1];
    coef.head(j) = work.head(j);
  }
  return coef;
}

// Inverse of pacf_to_coefficients. Requires a stationary polynomial.
template <typename Derived>
Vector<typename Derived::Scalar> coefficients_to_pacf(const Eigen::MatrixBase<Derived>& coef_in) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = coef_in.size();
  Vector<Scalar> coef = coef_in;
  Vector<Scalar> work(p);
  for (Eigen::Index j = p - 1; j > 0; --j) {
    const Scalar a = coef[j];
    const Scalar denom = Scalar(1) - a * a;
    for (Eigen::Index k = 0; k < j; ++k) work[k] = (coef[k] + a * coef[j - k - 1]) / denom;
    coef.head(j) = work.head(j);
  }
  Vector<Scalar> raw(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    raw[i] = std::atanh(std::clamp<Scalar>(coef[i], -kMaxPartialCorrelation, kMaxPartialCorrelation));
  }
  return raw;
}

// Largest modulus among the reciprocal roots of 1 - c_1 z - ... - c_p z^p,
// i.e. the spectral radius of the companion matrix. All roots lie outside the
// unit circle iff this is < 1.
template <typename Derived>
typename Derived::Scalar max_reciprocal_root(const Eigen::MatrixBase<Derived>& coef) {
  using Scalar = typename Derived::Scalar;
  Eigen::Index p = coef.size();
  while (p > 0 && coef[p - 1] == Scalar(0)) --p;
  if (p == 0) return Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> companion =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(p, p);
  companion.row(0) = coef.head(p).transpose();
  if (p > 1) companion.block(1, 0, p - 1, p - 1).setIdentity();
  Eigen::EigenSolver<decltype(companion)> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// True when every root of 1 - c_1 z - ... has modulus > 1 + margin.
template <typename Derived>
bool roots_outside_unit_circle(const Eigen::MatrixBase<Derived>& coef, double margin = 1e-8) {
  return max_reciprocal_root(coef) < 1.0 / (1.0 + margin);
}

// AR coefficients of phi(z) (1 - z)^d, written in the same 1 - sum c_i z^i form.
template <typename Derived>
Vector<typename Derived::Scalar> expand_unit_roots(const Eigen::MatrixBase<Derived>& ar, int d) {
  using Scalar = typename Derived::Scalar;
  // Polynomial coefficients including the leading 1 and sign.
  Vector<Scalar> poly(ar.size() + 1);
  poly[0] = Scalar(1);
  poly.tail(ar.size()) = -ar;
  for (int k = 0; k < d; ++k) {
    Vector<Scalar> next = Vector<Scalar>::Zero(poly.size() + 1);
    next.head(poly.size()) += poly;
    next.tail(poly.size()) -= poly;
    poly = std::move(next);
  }
  return -poly.tail(poly.size() - 1);
}

// MA(infinity) weights psi_1..psi_h (psi_0 = 1 is implied) of
// (1 - sum ar_i z^i) x_t = (1 + sum ma_j z^j) e_t.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> psi_weights(const Eigen::MatrixBase<DerivedA>& ar,
                                              const Eigen::MatrixBase<DerivedB>& ma,
                                              Eigen::Index h) {
  using Scalar = typename DerivedA::Scalar;
  Vector<Scalar> psi(h + 1);
  psi[0] = Scalar(1);
  for (Eigen::Index j = 1; j <= h; ++j) {
    Scalar v = j <= ma.size() ? Scalar(ma[j - 1]) : Scalar(0);
    const Eigen::Index m = std::min<Eigen::Index>(j, ar.size());
    for (Eigen::Index i = 1; i <= m; ++i) v += ar[i - 1] * psi[j - i];
    psi[j] = v;
  }
  return psi.tail(h);
}

}  // namespace pubcast
