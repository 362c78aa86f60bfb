#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pubcast/calendar.hpp"

namespace pubcast {

enum class SeriesKind { increments, cumulative };

std::string_view to_string(SeriesKind kind);
SeriesKind series_kind_from_string(std::string_view text);

// Gap-free daily series: values[i] belongs to start_date + i days.
class DailySeries {
 public:
  // Validates the invariants (non-empty, cumulative non-decreasing and >= 0).
  DailySeries(Date start_date, Eigen::VectorXd values, SeriesKind kind);

  Date start_date() const { return start_; }
  Date end_date() const { return start_ + (size() - 1); }
  Date date_at(Eigen::Index i) const { return start_ + i; }
  const Eigen::VectorXd& values() const { return values_; }
  SeriesKind kind() const { return kind_; }
  Eigen::Index size() const { return values_.size(); }
  double last() const { return values_[values_.size() - 1]; }

  // First n days as a new series.
  DailySeries head(Eigen::Index n) const;

  bool operator==(const DailySeries& other) const;

 private:
  Date start_;
  Eigen::VectorXd values_;
  SeriesKind kind_;
};

struct DateRange {
  Date first;
  Date last;
};

struct EventTally {
  DailySeries series;
  std::size_t dropped_outside_range = 0;
};

// Counts events per day. Without a range the series spans first..last event.
EventTally from_events(std::span<const Date> dates,
                       std::optional<DateRange> range = std::nullopt);

DailySeries convert(const DailySeries& series, SeriesKind to);

// d-times differenced values plus what is needed to undo it.
struct DifferencedSeries {
  Eigen::VectorXd values;
  int d = 0;
  // seed_values[k] is the first entry of the k-times differenced series.
  Eigen::VectorXd seed_values;
  // tail_values[k] is the last entry of the k-times differenced series.
  Eigen::VectorXd tail_values;
  Date origin_start_date;
};

DifferencedSeries difference(const DailySeries& series, int d);
DifferencedSeries difference(const Eigen::VectorXd& values, int d,
                             Date origin_start_date = Date{});

// Rebuilds the original-scale values.
Eigen::VectorXd reconstruct(const DifferencedSeries& diff);

// Maps an extension of the differenced series back onto the original scale,
// continuing from the last original observation.
Eigen::VectorXd integrate(const DifferencedSeries& diff, const Eigen::VectorXd& future);

// First difference of any dense vector expression.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> first_difference(
    const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.size();
  if (n < 2) return Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>(0);
  return x.tail(n - 1) - x.head(n - 1);
}

// Running sum starting from `start` (the result has the same length as x).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> cumulative_sum(
    const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar start = 0) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(x.size());
  typename Derived::Scalar acc = start;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += x[i];
    out[i] = acc;
  }
  return out;
}

}  // namespace pubcast
