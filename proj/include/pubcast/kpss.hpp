#pragma once

#include <Eigen/Dense>

#include "pubcast/series.hpp"

namespace pubcast {

struct KpssResult {
  double statistic = 0.0;
  int lag = 0;
  // Long-run variance estimate; zero for constant input.
  double long_run_variance = 0.0;
  bool degenerate = false;
};

// KPSS level-stationarity statistic with a Bartlett-window long-run variance
// and lag floor(4 (n/100)^0.25).
KpssResult kpss_level(const Eigen::VectorXd& x);

// Asymptotic critical value for the level test, interpolated between the
// tabulated 10%, 5%, 2.5% and 1% points.
double kpss_critical_value(double alpha);

// Smallest d <= d_max whose d-times differenced series passes the KPSS test.
int select_d(const Eigen::VectorXd& x, double alpha = 0.05, int d_max = 2);
int select_d(const DailySeries& series, double alpha = 0.05, int d_max = 2);

}  // namespace pubcast
