#include "pubcast/series.hpp"

#include <algorithm>
#include <string>

#include "pubcast/errors.hpp"

namespace pubcast {

std::string_view to_string(SeriesKind kind) {
  return kind == SeriesKind::cumulative ? "cumulative" : "increments";
}

SeriesKind series_kind_from_string(std::string_view text) {
  if (text == "cumulative") return SeriesKind::cumulative;
  if (text == "increments" || text == "daily") return SeriesKind::increments;
  throw Error(ErrorCode::InvalidArgument, "unknown series kind '" + std::string(text) + "'");
}

DailySeries::DailySeries(Date start_date, Eigen::VectorXd values, SeriesKind kind)
    : start_(start_date), values_(std::move(values)), kind_(kind) {
  if (values_.size() == 0) throw Error(ErrorCode::EmptyInput, "daily series needs at least one value");
  if (kind_ == SeriesKind::cumulative) {
    if (values_[0] < 0.0) {
      throw Error(ErrorCode::NonMonotonicCumulative, "cumulative series starts negative");
    }
    for (Eigen::Index i = 1; i < values_.size(); ++i) {
      if (values_[i] < values_[i - 1]) {
        throw Error(ErrorCode::NonMonotonicCumulative,
                    "cumulative series decreases on " + date_at(i).iso());
      }
    }
  }
}

DailySeries DailySeries::head(Eigen::Index n) const {
  if (n < 1 || n > size()) throw Error(ErrorCode::InvalidArgument, "head length out of range");
  return DailySeries{start_, values_.head(n), kind_};
}

bool DailySeries::operator==(const DailySeries& other) const {
  return start_ == other.start_ && kind_ == other.kind_ && values_.size() == other.values_.size() &&
         values_ == other.values_;
}

EventTally from_events(std::span<const Date> dates, std::optional<DateRange> range) {
  if (dates.empty()) throw Error(ErrorCode::EmptyInput, "no events to aggregate");
  Date first = range ? range->first : *std::min_element(dates.begin(), dates.end());
  Date last = range ? range->last : *std::max_element(dates.begin(), dates.end());
  if (last < first) throw Error(ErrorCode::InvalidArgument, "date range is reversed");

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(last - first + 1);
  std::size_t dropped = 0;
  for (const Date& d : dates) {
    if (d < first || d > last) {
      ++dropped;
      continue;
    }
    counts[d - first] += 1.0;
  }
  return {DailySeries{first, std::move(counts), SeriesKind::increments}, dropped};
}

DailySeries convert(const DailySeries& series, SeriesKind to) {
  if (series.kind() == to) return series;
  if (to == SeriesKind::cumulative) {
    return DailySeries{series.start_date(), cumulative_sum(series.values()), to};
  }
  const Eigen::VectorXd& v = series.values();
  Eigen::VectorXd inc(v.size());
  inc[0] = v[0];
  inc.tail(v.size() - 1) = first_difference(v);
  return DailySeries{series.start_date(), std::move(inc), to};
}

DifferencedSeries difference(const Eigen::VectorXd& values, int d, Date origin_start_date) {
  if (d < 0) throw Error(ErrorCode::InvalidArgument, "differencing order must be non-negative");
  if (values.size() <= d) {
    throw Error(ErrorCode::InsufficientData, "series of length " + std::to_string(values.size()) +
                                                 " cannot be differenced " + std::to_string(d) +
                                                 " times");
  }
  DifferencedSeries out;
  out.d = d;
  out.origin_start_date = origin_start_date;
  out.seed_values.resize(d);
  out.tail_values.resize(d);
  Eigen::VectorXd level = values;
  for (int k = 0; k < d; ++k) {
    out.seed_values[k] = level[0];
    out.tail_values[k] = level[level.size() - 1];
    level = first_difference(level);
  }
  out.values = std::move(level);
  return out;
}

DifferencedSeries difference(const DailySeries& series, int d) {
  return difference(series.values(), d, series.start_date());
}

Eigen::VectorXd reconstruct(const DifferencedSeries& diff) {
  Eigen::VectorXd level = diff.values;
  for (int k = diff.d - 1; k >= 0; --k) {
    Eigen::VectorXd up(level.size() + 1);
    up[0] = diff.seed_values[k];
    up.tail(level.size()) = cumulative_sum(level, diff.seed_values[k]);
    level = std::move(up);
  }
  return level;
}

Eigen::VectorXd integrate(const DifferencedSeries& diff, const Eigen::VectorXd& future) {
  // Each level's extension is a running sum anchored at that level's last value.
  Eigen::VectorXd level = future;
  for (int k = diff.d - 1; k >= 0; --k) {
    level = cumulative_sum(level, diff.tail_values[k]);
  }
  return level;
}

}  // namespace pubcast
