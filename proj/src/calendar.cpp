#include "pubcast/calendar.hpp"

#include <cstdio>

#include "pubcast/errors.hpp"

namespace pubcast {

namespace {

bool parse_digits(std::string_view s, int& out) {
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return !s.empty();
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::from_iso(std::string_view text) {
  auto parsed = parse(text);
  if (!parsed) {
    throw Error(ErrorCode::InvalidArgument, "invalid ISO date '" + std::string(text) + "'");
  }
  return *parsed;
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonMonotonicCumulative: return "NonMonotonicCumulative";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NoModelFound: return "NoModelFound";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::WrongScale: return "WrongScale";
    case ErrorCode::InvalidCoefficients: return "InvalidCoefficients";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pubcast
