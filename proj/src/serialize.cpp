#include "pubcast/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "pubcast/errors.hpp"

namespace pubcast {

namespace {

Json array_of(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_of(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Json optional_date(const std::optional<Date>& d) { return d ? Json(d->iso()) : Json(nullptr); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

Json to_json(const ArimaOrder& order) {
  return Json{{"p", order.p}, {"d", order.d}, {"q", order.q}, {"with_constant", order.with_constant}};
}

Json to_json(const ArimaCoefficients& c) {
  return Json{{"phi", array_of(c.phi)},
              {"theta", array_of(c.theta)},
              {"constant", c.constant},
              {"sigma2", c.sigma2}};
}

Json to_json(const FittedModel& m) {
  return Json{{"order", to_json(m.order)},
              {"coefficients", to_json(m.coefficients)},
              {"loglik", m.loglik},
              {"aicc", m.aicc},
              {"residuals", array_of(m.residuals)},
              {"series_meta",
               {{"start_date", m.series_meta.start_date.iso()},
                {"length", m.series_meta.length},
                {"kind", to_string(m.series_meta.kind)}}},
              {"css_fallback", m.css_fallback},
              {"degenerate", m.degenerate}};
}

Json to_json(const Forecast& f) {
  return Json{{"anchor_date", f.anchor_date.iso()},
              {"level", f.level},
              {"point", array_of(f.point)},
              {"lower", array_of(f.lower)},
              {"upper", array_of(f.upper)},
              {"scale", f.scale == ForecastScale::original ? "original" : "differenced"}};
}

Json to_json(const LinearFit& fit) {
  return Json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"r2", fit.r2},
              {"degenerate", fit.degenerate}};
}

Json to_json(const DoublingResult& d) {
  return Json{{"start_count", d.start_count},
              {"target_factor", d.target_factor},
              {"point_date", optional_date(d.point_date)},
              {"upper_date", optional_date(d.upper_date)}};
}

Json to_json(const HorizonReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"offset_days", row.offset_days},
                    {"date", row.date.iso()},
                    {"point", row.point},
                    {"lower", row.lower},
                    {"upper", row.upper}});
  }
  return Json{{"series", r.series_name},
              {"start", {{"date", r.start_date.iso()}, {"count", r.start_count}}},
              {"rows", std::move(rows)}};
}

Json to_json(const BacktestReport& r) {
  Json records = Json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"origin_index", rec.origin_index},
                       {"horizon", rec.horizon},
                       {"point", rec.point},
                       {"lower", rec.lower},
                       {"upper", rec.upper},
                       {"actual", rec.actual},
                       {"point_error", rec.point_error},
                       {"interval_hit", rec.interval_hit}});
  }
  return Json{{"records", std::move(records)},
              {"aggregates",
               {{"mape", r.mape},
                {"coverage", r.coverage},
                {"mape_by_horizon", r.mape_by_horizon},
                {"coverage_by_horizon", r.coverage_by_horizon},
                {"origins", r.origins},
                {"failed_origins", r.failed_origins}}}};
}

ArimaOrder order_from_json(const Json& j) {
  return ArimaOrder{j.at("p").get<int>(), j.at("d").get<int>(), j.at("q").get<int>(),
                    j.value("with_constant", false)};
}

ArimaCoefficients coefficients_from_json(const Json& j) {
  ArimaCoefficients c;
  c.phi = vector_of(j.at("phi"));
  c.theta = vector_of(j.at("theta"));
  c.constant = j.value("constant", 0.0);
  c.sigma2 = j.value("sigma2", 1.0);
  return c;
}

std::string fixed6(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  // Avoid "-0.000000".
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

void write_forecast_csv(std::ostream& out, const Forecast& f) {
  out << "date,point,lower,upper,point_clamped,lower_clamped\n";
  const Eigen::VectorXd pc = f.point_clamped();
  const Eigen::VectorXd lc = f.lower_clamped();
  for (Eigen::Index i = 0; i < f.horizon(); ++i) {
    out << f.date_at(i).iso() << ',' << fixed6(f.point[i]) << ',' << fixed6(f.lower[i]) << ','
        << fixed6(f.upper[i]) << ',' << fixed6(pc[i]) << ',' << fixed6(lc[i]) << '\n';
  }
}

void write_series_csv(std::ostream& out, const DailySeries& series) {
  const DailySeries inc = convert(series, SeriesKind::increments);
  const DailySeries cum = convert(series, SeriesKind::cumulative);
  out << "date,daily,cumulative\n";
  for (Eigen::Index i = 0; i < inc.size(); ++i) {
    out << inc.date_at(i).iso() << ',' << fixed6(inc.values()[i]) << ',' << fixed6(cum.values()[i])
        << '\n';
  }
}

void write_values_csv(std::ostream& out, const DailySeries& series) {
  out << "date,value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out << series.date_at(i).iso() << ',' << fixed6(series.values()[i]) << '\n';
  }
}

DailySeries read_series_csv(std::istream& in, SeriesKind kind, const std::string& column) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "series file is empty");
  const auto header = split_csv_line(line);
  int date_col = -1, value_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "date") date_col = static_cast<int>(i);
  }
  const std::vector<std::string> wanted =
      column.empty() ? std::vector<std::string>{"cumulative", "value"} : std::vector<std::string>{column};
  for (const auto& w : wanted) {
    for (std::size_t i = 0; i < header.size() && value_col < 0; ++i) {
      if (header[i] == w) value_col = static_cast<int>(i);
    }
    if (value_col >= 0) break;
  }
  if (date_col < 0) throw Error(ErrorCode::SchemaError, "series file lacks a 'date' column");
  if (value_col < 0) throw Error(ErrorCode::SchemaError, "series file lacks a value column");

  std::optional<Date> start;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= std::max(date_col, value_col)) {
      throw Error(ErrorCode::SchemaError, "short row in series file: " + line);
    }
    const Date d = Date::from_iso(cells[date_col]);
    if (!start) start = d;
    if (d - *start != static_cast<long>(values.size())) {
      throw Error(ErrorCode::SchemaError, "series file is not gap-free at " + d.iso());
    }
    values.push_back(std::stod(cells[value_col]));
  }
  if (!start) throw Error(ErrorCode::EmptyInput, "series file has no rows");
  return DailySeries{*start, Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
                     kind};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace pubcast
