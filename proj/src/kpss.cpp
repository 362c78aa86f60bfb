#include "pubcast/kpss.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "pubcast/errors.hpp"

namespace pubcast {

KpssResult kpss_level(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "KPSS needs at least two observations");
  KpssResult out;
  out.lag = static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  out.lag = std::min<int>(out.lag, static_cast<int>(n) - 1);

  const Eigen::VectorXd e = x.array() - x.mean();
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if (e.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    out.degenerate = true;
    return out;
  }

  double lrv = e.squaredNorm() / n;
  for (int s = 1; s <= out.lag; ++s) {
    const double w = 1.0 - s / (out.lag + 1.0);
    lrv += 2.0 * w * e.tail(n - s).dot(e.head(n - s)) / n;
  }
  out.long_run_variance = lrv;
  if (!(lrv > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd partial = cumulative_sum(e);
  out.statistic = partial.squaredNorm() / (static_cast<double>(n) * n * lrv);
  return out;
}

double kpss_critical_value(double alpha) {
  static constexpr std::array<std::pair<double, double>, 4> table = {
      {{0.10, 0.347}, {0.05, 0.463}, {0.025, 0.574}, {0.01, 0.739}}};
  if (alpha > table.front().first || alpha < table.back().first) {
    throw Error(ErrorCode::InvalidArgument,
                "KPSS alpha must lie in [0.01, 0.10], got " + std::to_string(alpha));
  }
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    const auto [a0, c0] = table[i];
    const auto [a1, c1] = table[i + 1];
    if (alpha <= a0 && alpha >= a1) return c0 + (c1 - c0) * (a0 - alpha) / (a0 - a1);
  }
  return table.back().second;
}

int select_d(const Eigen::VectorXd& x, double alpha, int d_max) {
  if (x.size() < 20) {
    throw Error(ErrorCode::InsufficientData,
                "differencing selection needs at least 20 observations, got " + std::to_string(x.size()));
  }
  const double critical = kpss_critical_value(alpha);
  Eigen::VectorXd level = x;
  for (int d = 0; d < d_max; ++d) {
    const KpssResult r = kpss_level(level);
    if (r.degenerate || r.statistic < critical) return d;
    level = first_difference(level);
  }
  return d_max;
}

int select_d(const DailySeries& series, double alpha, int d_max) {
  return select_d(series.values(), alpha, d_max);
}

}  // namespace pubcast
