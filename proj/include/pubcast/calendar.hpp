#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace pubcast {

// Proleptic Gregorian day with plain day arithmetic; no time zones.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}) {}

  // Strict YYYY-MM-DD. Returns nullopt on malformed text or impossible dates.
  static std::optional<Date> parse(std::string_view text);
  // Throws Error(InvalidArgument) instead of returning nullopt.
  static Date from_iso(std::string_view text);

  std::string iso() const;
  constexpr std::chrono::sys_days sys_days() const { return days_; }
  constexpr long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date operator+(long n) const { return Date{days_ + std::chrono::days{n}}; }
  constexpr Date operator-(long n) const { return Date{days_ - std::chrono::days{n}}; }
  constexpr long operator-(const Date& other) const { return (days_ - other.days_).count(); }
  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace pubcast
