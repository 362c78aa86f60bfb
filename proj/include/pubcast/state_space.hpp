#pragma once

#include <Eigen/Dense>

namespace pubcast {

// Harvey state-space form of a zero-mean ARMA(p,q) with unit innovation
// variance: state dimension r = max(p, q + 1),
//   a_{t+1} = T a_t + R e_{t+1},   y_t = a_t[0].
struct ArmaStateSpace {
  Eigen::MatrixXd transition;
  Eigen::VectorXd loading;
  // Stationary covariance of the state, solving P = T P T' + R R'.
  Eigen::MatrixXd initial_covariance;

  ArmaStateSpace(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma);
  Eigen::Index dim() const { return loading.size(); }
};

struct KalmanOutput {
  // Sum of log prediction-error variances (in units of sigma^2).
  double sum_log_variance = 0.0;
  // Sum of squared standardized one-step prediction errors.
  double sum_squares = 0.0;
  Eigen::Index n = 0;
  // Raw one-step prediction errors y_t - E[y_t | y_1..y_{t-1}].
  Eigen::VectorXd innovations;
  // E[a_{n+1} | y_1..y_n].
  Eigen::VectorXd predicted_state;
};

// Prediction-error decomposition of a mean-adjusted ARMA series.
KalmanOutput kalman_filter(const ArmaStateSpace& model, const Eigen::VectorXd& y);

// Exact Gaussian log-likelihood for a given innovation variance.
double gaussian_loglik(const KalmanOutput& k, double sigma2);
// Likelihood maximized over sigma^2; the maximizer is sum_squares / n.
double concentrated_loglik(const KalmanOutput& k);

// Autocovariances gamma(0..max_lag) of the ARMA process, read off the
// stationary state covariance: gamma(k) = sigma2 * (T^k P)[0,0].
Eigen::VectorXd arma_autocovariance(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma,
                                    double sigma2, Eigen::Index max_lag);

}  // namespace pubcast
