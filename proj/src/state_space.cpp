#include "pubcast/state_space.hpp"

#include <cmath>
#include <numbers>

#include "pubcast/errors.hpp"

namespace pubcast {

ArmaStateSpace::ArmaStateSpace(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma) {
  const Eigen::Index p = ar.size();
  const Eigen::Index q = ma.size();
  const Eigen::Index r = std::max(p, q + 1);

  transition = Eigen::MatrixXd::Zero(r, r);
  transition.col(0).head(p) = ar;
  if (r > 1) transition.topRightCorner(r - 1, r - 1).setIdentity();

  loading = Eigen::VectorXd::Zero(r);
  loading[0] = 1.0;
  loading.segment(1, q) = ma;

  // vec(P) = (I - T kron T)^{-1} vec(R R'). r <= 6 for the supported orders.
  const Eigen::Index r2 = r * r;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(r2, r2);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      const double tij = transition(i, j);
      if (tij == 0.0) continue;
      system.block(i * r, j * r, r, r) -= tij * transition;
    }
  }
  const Eigen::MatrixXd rr = loading * loading.transpose();
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rr.data(), r2);
  const Eigen::VectorXd vec_p = system.partialPivLu().solve(rhs);
  initial_covariance = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), r, r);
  initial_covariance = 0.5 * (initial_covariance + initial_covariance.transpose()).eval();
  if (!initial_covariance.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "stationary state covariance is not finite");
  }
}

KalmanOutput kalman_filter(const ArmaStateSpace& model, const Eigen::VectorXd& y) {
  const Eigen::Index r = model.dim();
  const Eigen::Index n = y.size();
  const Eigen::MatrixXd& T = model.transition;
  const Eigen::VectorXd& R = model.loading;
  const Eigen::MatrixXd RR = R * R.transpose();

  KalmanOutput out;
  out.n = n;
  out.innovations.resize(n);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd P = model.initial_covariance;
  Eigen::VectorXd a_upd(r);
  Eigen::MatrixXd P_upd(r, r);
  bool steady = false;

  for (Eigen::Index t = 0; t < n; ++t) {
    const double v = y[t] - a[0];
    out.innovations[t] = v;
    if (steady) {
      // P_{t|t-1} has converged to R R', so F = 1 and the gain is R.
      out.sum_squares += v * v;
      a_upd = a + R * v;
    } else {
      const double F = P(0, 0);
      if (!(F > 0.0) || !std::isfinite(F)) {
        throw Error(ErrorCode::NumericalFailure, "non-positive prediction variance in Kalman filter");
      }
      out.sum_log_variance += std::log(F);
      out.sum_squares += v * v / F;
      const Eigen::VectorXd pc = P.col(0);
      a_upd = a + pc * (v / F);
      P_upd = P - pc * pc.transpose() / F;
      P.noalias() = T * P_upd * T.transpose();
      P += RR;
      steady = (P - RR).cwiseAbs().maxCoeff() < 1e-13;
    }
    a.noalias() = T * a_upd;
  }
  if (!std::isfinite(out.sum_squares) || !std::isfinite(out.sum_log_variance)) {
    throw Error(ErrorCode::NumericalFailure, "Kalman filter produced a non-finite likelihood term");
  }
  out.predicted_state = a;
  return out;
}

double gaussian_loglik(const KalmanOutput& k, double sigma2) {
  const double n = static_cast<double>(k.n);
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * sigma2) + k.sum_log_variance +
                 k.sum_squares / sigma2);
}

double concentrated_loglik(const KalmanOutput& k) {
  const double n = static_cast<double>(k.n);
  const double sigma2 = k.sum_squares / n;
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * sigma2) + k.sum_log_variance + n);
}

Eigen::VectorXd arma_autocovariance(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma,
                                    double sigma2, Eigen::Index max_lag) {
  const ArmaStateSpace ss(ar, ma);
  Eigen::VectorXd gamma(max_lag + 1);
  Eigen::MatrixXd m = ss.initial_covariance;
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    gamma[k] = sigma2 * m(0, 0);
    m = ss.transition * m;
  }
  return gamma;
}

}  // namespace pubcast
