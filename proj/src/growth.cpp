#include "pubcast/growth.hpp"

#include <algorithm>

#include "pubcast/errors.hpp"

namespace pubcast {

LinearFit linear_fit(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (n < 3) throw Error(ErrorCode::InsufficientData, "linear fit needs at least 3 points");
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::ArrayXd dx = x - x_mean;
  const Eigen::ArrayXd dy = y.array() - y_mean;

  LinearFit fit;
  fit.slope = (dx * dy).sum() / dx.square().sum();
  fit.intercept = y_mean - fit.slope * x_mean;
  const double sst = dy.square().sum();
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (sst <= 1e-24 * scale * scale * n) {
    fit.r2 = 1.0;
    fit.degenerate = true;
    return fit;
  }
  const double sse = (dy - fit.slope * dx).square().sum();
  fit.r2 = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  return fit;
}

LinearFit linear_fit(const DailySeries& series) { return linear_fit(series.values()); }

DoublingResult doubling_date(const Forecast& forecast, double start_count, double factor) {
  if (forecast.scale != ForecastScale::original || forecast.kind != SeriesKind::cumulative) {
    throw Error(ErrorCode::WrongScale, "doubling dates need a cumulative forecast on the original scale");
  }
  if (!(start_count > 0.0)) throw Error(ErrorCode::InvalidArgument, "start count must be positive");
  DoublingResult out;
  out.start_count = start_count;
  out.target_factor = factor;
  const double target = factor * start_count;
  for (Eigen::Index i = 0; i < forecast.horizon(); ++i) {
    if (!out.point_date && forecast.point[i] >= target) out.point_date = forecast.date_at(i);
    if (!out.upper_date && forecast.upper[i] >= target) out.upper_date = forecast.date_at(i);
  }
  return out;
}

HorizonReport horizon_report(const Forecast& forecast, const std::string& series_name,
                             const std::vector<int>& offsets) {
  HorizonReport report;
  report.series_name = series_name;
  report.start_date = forecast.anchor_date;
  report.start_count = forecast.anchor_value;
  std::vector<int> sorted = offsets;
  std::sort(sorted.begin(), sorted.end());
  for (int offset : sorted) {
    if (offset < 1 || offset > forecast.horizon()) {
      throw Error(ErrorCode::InvalidHorizon, "offset " + std::to_string(offset) +
                                                 " lies outside the forecast horizon of " +
                                                 std::to_string(forecast.horizon()) + " days");
    }
    const Eigen::Index i = offset - 1;
    report.rows.push_back(
        {offset, forecast.date_at(i), forecast.point[i], forecast.lower[i], forecast.upper[i]});
  }
  return report;
}

HorizonReport horizon_report_at(const Forecast& forecast, const std::string& series_name,
                                const std::vector<Date>& dates) {
  std::vector<int> offsets;
  offsets.reserve(dates.size());
  for (const Date& d : dates) offsets.push_back(static_cast<int>(d - forecast.anchor_date));
  return horizon_report(forecast, series_name, offsets);
}

}  // namespace pubcast
