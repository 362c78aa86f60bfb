#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "json.hpp"
#include "pubcast/arima.hpp"
#include "pubcast/growth.hpp"
#include "pubcast/series.hpp"
#include "pubcast/simulate.hpp"

namespace pubcast {

using Json = nlohmann::ordered_json;

Json to_json(const ArimaOrder& order);
Json to_json(const ArimaCoefficients& coefficients);
Json to_json(const FittedModel& model);
Json to_json(const Forecast& forecast);
Json to_json(const LinearFit& fit);
Json to_json(const DoublingResult& doubling);
Json to_json(const HorizonReport& report);
Json to_json(const BacktestReport& report);

ArimaOrder order_from_json(const Json& j);
ArimaCoefficients coefficients_from_json(const Json& j);

// Fixed 6-decimal rendering used by every CSV writer.
std::string fixed6(double value);

// date,point,lower,upper,point_clamped,lower_clamped
void write_forecast_csv(std::ostream& out, const Forecast& forecast);
// date,daily,cumulative
void write_series_csv(std::ostream& out, const DailySeries& increments);
// date,value
void write_values_csv(std::ostream& out, const DailySeries& series);

// Reads a date-indexed CSV written by the writers above. Picks `column` if
// given, else "cumulative", else "value".
DailySeries read_series_csv(std::istream& in, SeriesKind kind, const std::string& column = {});

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pubcast
