#pragma once

#include <Eigen/Dense>
#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "pubcast/calendar.hpp"
#include "pubcast/series.hpp"

namespace pubcast {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  bool with_constant = false;

  auto operator<=>(const ArimaOrder&) const = default;
  std::string str() const;
};

// phi: AR coefficients of 1 - phi_1 z - ... ; theta: MA coefficients of
// 1 + theta_1 z + ... ; constant: intercept c of the differenced process
//   w_t = c + sum phi_i w_{t-i} + e_t + sum theta_j e_{t-j}.
struct ArimaCoefficients {
  Eigen::VectorXd phi;
  Eigen::VectorXd theta;
  double constant = 0.0;
  double sigma2 = 1.0;

  // Stationary mean of the differenced process, c / (1 - sum phi).
  double mean() const;
  static ArimaCoefficients from_mean(Eigen::VectorXd phi, Eigen::VectorXd theta, double mean,
                                     double sigma2);
  // AR stationarity and MA invertibility, both with roots beyond 1 + margin.
  bool is_admissible(double margin = 1e-8) const;
};

struct SeriesMeta {
  Date start_date;
  Eigen::Index length = 0;
  SeriesKind kind = SeriesKind::cumulative;
};

struct FittedModel {
  ArimaOrder order;
  ArimaCoefficients coefficients;
  double loglik = 0.0;
  double aicc = 0.0;
  // One-step prediction errors on the differenced scale.
  Eigen::VectorXd residuals;
  SeriesMeta series_meta;

  // The exact optimizer failed and the CSS estimate was kept instead.
  bool css_fallback = false;
  // Zero-variance differenced series; sigma2 = 0 and loglik/aicc are 0 by convention.
  bool degenerate = false;
  int iterations = 0;

  // Forecast state: the differenced data and E[state_{n+1} | data].
  DifferencedSeries differenced;
  Eigen::VectorXd predicted_state;
};

enum class ForecastScale { original, differenced };

struct Forecast {
  Date anchor_date;
  double level = 0.95;
  Eigen::VectorXd point;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  ForecastScale scale = ForecastScale::original;
  // Kind of the series the forecast is expressed in and its last observed value.
  SeriesKind kind = SeriesKind::cumulative;
  double anchor_value = 0.0;

  Eigen::Index horizon() const { return point.size(); }
  // Date of forecast index i (lead time i + 1).
  Date date_at(Eigen::Index i) const { return anchor_date + (i + 1); }
  Eigen::VectorXd half_width() const { return (upper - point).cwiseMax(point - lower); }
  // max(value, anchor): cumulative totals cannot fall below what was observed.
  Eigen::VectorXd point_clamped() const { return point.cwiseMax(anchor_value); }
  Eigen::VectorXd lower_clamped() const { return lower.cwiseMax(anchor_value); }
};

struct FitOptions {
  int max_iterations = 500;
  // Stop when an iteration improves the log-likelihood by less than this.
  double loglik_tolerance = 1e-8;
};

// Conditional-sum-of-squares estimate on the d-times differenced series.
ArimaCoefficients estimate_css(const Eigen::VectorXd& values, const ArimaOrder& order,
                               const FitOptions& options = {});
ArimaCoefficients estimate_css(const DailySeries& series, const ArimaOrder& order,
                               const FitOptions& options = {});

// Exact Gaussian log-likelihood of the differenced, mean-adjusted series.
double log_likelihood(const Eigen::VectorXd& values, const ArimaOrder& order,
                      const ArimaCoefficients& coefficients);
double log_likelihood(const DailySeries& series, const ArimaOrder& order,
                      const ArimaCoefficients& coefficients);

// Same quantity through the dense multivariate normal density. O(n^3); meant
// as a cross-check for short series.
double log_likelihood_dense(const Eigen::VectorXd& values, const ArimaOrder& order,
                            const ArimaCoefficients& coefficients);

FittedModel estimate_mle(const Eigen::VectorXd& values, const ArimaOrder& order,
                         const SeriesMeta& meta, const FitOptions& options = {});
FittedModel estimate_mle(const DailySeries& series, const ArimaOrder& order,
                         const FitOptions& options = {});

// Number of estimated parameters counted by AICc: p + q + constant + sigma2.
int parameter_count(const ArimaOrder& order);
double aicc(double loglik, int k, Eigen::Index n);

struct SelectOptions {
  int p_max = 5;
  int q_max = 5;
  int d_max = 2;
  double alpha = 0.05;
  // Skip the KPSS step and use this d.
  std::optional<int> d_override;
  FitOptions fit;
};

struct CandidateFit {
  ArimaOrder order;
  double aicc = 0.0;
  bool ok = false;
  bool starting_model = false;
  std::string failure;
};

struct OrderSearch {
  FittedModel best;
  int d = 0;
  // Every candidate visited, in visiting order.
  std::vector<CandidateFit> visited;
  double min_starting_aicc() const;
};

OrderSearch search_orders(const DailySeries& series, const SelectOptions& options = {});
FittedModel select_order(const DailySeries& series, const SelectOptions& options = {});

// psi_1..psi_h of the ARMA part.
Eigen::VectorXd psi_weights(const ArimaCoefficients& coefficients, Eigen::Index h);

// Point forecasts and level-`level` bounds on the original scale.
Forecast forecast(const FittedModel& model, int h, double level = 0.95);

// For a model fitted on daily increments: forecasts the running total that
// continues from `start_total`, with variance from one extra unit root.
Forecast forecast_accumulated(const FittedModel& model, int h, double start_total,
                              double level = 0.95);

// Forecast of the differenced series itself.
Forecast forecast_differenced(const FittedModel& model, int h, double level = 0.95);

// Two-sided standard normal quantile z_{(1+level)/2}.
double normal_quantile_two_sided(double level);

}  // namespace pubcast

namespace pubcast {

// Wraps known coefficients into a FittedModel by running the Kalman filter
// over the data (no estimation). sigma2 and the coefficients are used as given.
FittedModel condition_on(const Eigen::VectorXd& values, const ArimaOrder& order,
                         const ArimaCoefficients& coefficients, const SeriesMeta& meta);

}  // namespace pubcast
