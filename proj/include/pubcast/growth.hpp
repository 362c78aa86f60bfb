#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pubcast/arima.hpp"
#include "pubcast/calendar.hpp"
#include "pubcast/series.hpp"

namespace pubcast {

struct LinearFit {
  double slope = 0.0;  // per day
  double intercept = 0.0;
  double r2 = 0.0;
  // Constant input: r2 is reported as 1.
  bool degenerate = false;
};

// Least squares of value on day index (0-based).
LinearFit linear_fit(const Eigen::VectorXd& values);
LinearFit linear_fit(const DailySeries& series);

struct DoublingResult {
  double start_count = 0.0;
  double target_factor = 2.0;
  std::optional<Date> point_date;
  std::optional<Date> upper_date;
};

// First forecast day on which the point (resp. upper bound) reaches
// factor * start_count. No interpolation between grid days.
DoublingResult doubling_date(const Forecast& forecast, double start_count, double factor = 2.0);

struct HorizonRow {
  int offset_days = 0;
  Date date;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct HorizonReport {
  std::string series_name;
  Date start_date;
  double start_count = 0.0;
  std::vector<HorizonRow> rows;
};

inline const std::vector<int> kDefaultOffsets = {90, 180, 270, 365};

// Rows read straight from the forecast vectors; offset k is lead time k.
HorizonReport horizon_report(const Forecast& forecast, const std::string& series_name,
                             const std::vector<int>& offsets = kDefaultOffsets);
// Same, with rows at explicit calendar dates after the anchor.
HorizonReport horizon_report_at(const Forecast& forecast, const std::string& series_name,
                                const std::vector<Date>& dates);

}  // namespace pubcast
