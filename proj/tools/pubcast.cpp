// pubcast: daily publication series -> ARIMA forecasts -> growth reports.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pubcast/arima.hpp"
#include "pubcast/errors.hpp"
#include "pubcast/growth.hpp"
#include "pubcast/ingest.hpp"
#include "pubcast/serialize.hpp"
#include "pubcast/simulate.hpp"

namespace fs = std::filesystem;
using namespace pubcast;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kFatal = 1, kPartial = 2 };

struct Logger {
  bool quiet = false;
  bool color = false;

  void info(const std::string& msg) const { emit("34", "info", msg); }
  void warn(const std::string& msg) const { emit("33", "warn", msg); }

 private:
  void emit(const char* code, const char* tag, const std::string& msg) const {
    if (quiet) return;
    if (color) {
      std::cerr << "\033[" << code << "m" << tag << "\033[0m " << msg << '\n';
    } else {
      std::cerr << tag << ' ' << msg << '\n';
    }
  }
};

Logger g_log;

void fail_json(std::string_view code, const std::string& detail) {
  std::cerr << Json{{"error", code}, {"detail", detail}}.dump() << '\n';
}

struct PipelineConfig {
  std::string input_path;
  std::string series_file;
  // Kind of the series file's value column; empty means infer from the header.
  std::string series_kind;
  std::string series = "all";
  std::string dataset;
  std::string start_date;
  std::string end_date;
  int horizon_days = 365;
  double level = 0.95;
  std::vector<int> offsets = kDefaultOffsets;
  std::vector<std::string> report_dates;
  std::string fit_scale = "cumulative";
  int p_max = 5;
  int q_max = 5;
  int d_max = 2;
  int d = -1;
  double alpha = 0.05;
  double doubling_factor = 2.0;
  std::uint64_t seed = 42;
  std::string output_dir = "out";

  Json echo() const {
    return Json{{"input_path", input_path},
                {"series_file", series_file},
                {"series_kind", series_kind},
                {"series", series},
                {"dataset", dataset},
                {"start_date", start_date},
                {"end_date", end_date},
                {"horizon_days", horizon_days},
                {"level", level},
                {"offsets", offsets},
                {"report_dates", report_dates},
                {"fit_scale", fit_scale},
                {"p_max", p_max},
                {"q_max", q_max},
                {"d_max", d_max},
                {"d", d},
                {"alpha", alpha},
                {"doubling_factor", doubling_factor},
                {"seed", seed},
                {"output_dir", output_dir}};
  }

  void validate() const {
    if (horizon_days < 1) throw Error(ErrorCode::InvalidHorizon, "horizon_days must be >= 1");
    if (!(level > 0.5 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0.5, 1)");
    for (int o : offsets) {
      if (o < 1 || o > horizon_days) {
        throw Error(ErrorCode::InvalidHorizon,
                    "offset " + std::to_string(o) + " exceeds horizon_days " + std::to_string(horizon_days));
      }
    }
    series_kind_from_string(fit_scale);
  }

  std::optional<DateRange> range() const {
    if (start_date.empty() && end_date.empty()) return std::nullopt;
    if (start_date.empty() || end_date.empty()) {
      throw Error(ErrorCode::InvalidArgument, "start_date and end_date must be given together");
    }
    return DateRange{Date::from_iso(start_date), Date::from_iso(end_date)};
  }

  SelectOptions select_options() const {
    SelectOptions o;
    o.p_max = p_max;
    o.q_max = q_max;
    o.d_max = d_max;
    o.alpha = alpha;
    if (d >= 0) o.d_override = d;
    return o;
  }
};

// Flat key = value file; keys are PipelineConfig field names. Returned as
// command-line tokens so that explicit flags (which come later) win.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find_first_of("=:");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\"");
      const auto e = s.find_last_not_of(" \t\r\"");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key);
    args.push_back(trim(line.substr(eq + 1)));
  }
  return args;
}

struct LoadedInput {
  std::vector<PublicationRecord> records;
  RejectReport report;
};

LoadedInput load_records(const PipelineConfig& cfg) {
  if (cfg.input_path.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
  std::ifstream in(cfg.input_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + cfg.input_path);
  std::optional<Dataset> ds;
  if (!cfg.dataset.empty()) {
    ds = dataset_from_string(cfg.dataset);
    if (!ds) throw Error(ErrorCode::InvalidArgument, "unknown dataset '" + cfg.dataset + "'");
  }
  ParseResult parsed = parse_records(in, ds);
  g_log.info("parsed " + std::to_string(parsed.report.accepted) + " records, " +
             std::to_string(parsed.report.rejected_total()) + " rejected, " +
             std::to_string(parsed.report.duplicate_ids) + " duplicate ids");
  return {std::move(parsed.records), parsed.report};
}

// Named increments series selected by the config, plus skipped names.
struct Selection {
  std::map<std::string, DailySeries> series;
  std::map<std::string, std::string> skipped;
  std::optional<RejectReport> reject_report;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Selection select_series(const PipelineConfig& cfg) {
  Selection sel;
  if (!cfg.series_file.empty()) {
    std::ifstream in(cfg.series_file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + cfg.series_file);
    // A series file holds totals unless its only value column is "daily" or
    // --series-kind says otherwise.
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    const bool daily_only = header.find("cumulative") == std::string::npos &&
                            header.find("value") == std::string::npos;
    DailySeries s = [&] {
      if (!cfg.series_kind.empty()) return read_series_csv(in, series_kind_from_string(cfg.series_kind));
      return daily_only ? read_series_csv(in, SeriesKind::increments, "daily")
                        : read_series_csv(in, SeriesKind::cumulative);
    }();
    sel.series.emplace(fs::path(cfg.series_file).stem().string(),
                       convert(s, SeriesKind::increments));
    return sel;
  }
  LoadedInput input = load_records(cfg);
  sel.reject_report = input.report;
  const auto range = cfg.range();
  const std::string wanted = cfg.series;
  if (wanted == "all" || wanted == "standard") {
    SuiteResult suite = build_standard_suite(input.records, range);
    sel.series = std::move(suite.series);
    sel.skipped = std::move(suite.skipped);
    return sel;
  }
  for (const auto& name : split_list(wanted)) {
    auto spec = find_standard_spec(name);
    if (!spec) throw Error(ErrorCode::InvalidArgument, "unknown series '" + name + "'");
    try {
      sel.series.emplace(spec->name, build_series(input.records, *spec, range));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptySelection) throw;
      sel.skipped.emplace(spec->name, e.what());
    }
  }
  return sel;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct SeriesOutcome {
  FittedModel model;
  Forecast forecast;
  OrderSearch search;
};

SeriesOutcome fit_and_forecast(const DailySeries& increments, const PipelineConfig& cfg) {
  const SeriesKind scale = series_kind_from_string(cfg.fit_scale);
  const DailySeries fit_series = convert(increments, scale);
  SeriesOutcome out;
  out.search = search_orders(fit_series, cfg.select_options());
  out.model = out.search.best;
  if (scale == SeriesKind::cumulative) {
    out.forecast = forecast(out.model, cfg.horizon_days, cfg.level);
  } else {
    const double total = convert(increments, SeriesKind::cumulative).last();
    out.forecast = forecast_accumulated(out.model, cfg.horizon_days, total, cfg.level);
  }
  return out;
}

HorizonReport make_report(const Forecast& f, const std::string& name, const PipelineConfig& cfg) {
  if (!cfg.report_dates.empty()) {
    std::vector<Date> dates;
    for (const auto& d : cfg.report_dates) dates.push_back(Date::from_iso(d));
    return horizon_report_at(f, name, dates);
  }
  return horizon_report(f, name, cfg.offsets);
}

Json fit_diagnostics(const SeriesOutcome& o, const DailySeries& increments) {
  const LinearFit lf = linear_fit(convert(increments, SeriesKind::cumulative));
  return Json{{"status", "ok"},
              {"order", to_json(o.model.order)},
              {"loglik", o.model.loglik},
              {"aicc", o.model.aicc},
              {"sigma2", o.model.coefficients.sigma2},
              {"css_fallback", o.model.css_fallback},
              {"degenerate", o.model.degenerate},
              {"candidates_visited", o.search.visited.size()},
              {"observations", increments.size()},
              {"total", convert(increments, SeriesKind::cumulative).last()},
              {"linear_fit", to_json(lf)}};
}

std::string render_forecast_csv(const Forecast& f) {
  std::ostringstream os;
  write_forecast_csv(os, f);
  return os.str();
}

// Per-subcommand drivers. Each returns an exit code.

int run_ingest(const PipelineConfig& cfg, const std::string& output) {
  LoadedInput input = load_records(cfg);
  const std::string text = input.report.to_json().dump() + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(output, text);
  }
  return kOk;
}

int run_series(const PipelineConfig& cfg) {
  Selection sel = select_series(cfg);
  fs::create_directories(cfg.output_dir);
  for (const auto& [name, s] : sel.series) {
    std::ostringstream os;
    write_series_csv(os, s);
    write_file_atomic(fs::path(cfg.output_dir) / (name + ".series.csv"), os.str());
    const LinearFit lf = linear_fit(convert(s, SeriesKind::cumulative));
    write_file_atomic(fs::path(cfg.output_dir) / (name + ".linear_fit.json"), dump(to_json(lf)));
    g_log.info(name + ": " + std::to_string(s.size()) + " days, R^2 " + std::to_string(lf.r2));
  }
  for (const auto& [name, why] : sel.skipped) g_log.warn("skipped " + name + ": " + why);
  return sel.skipped.empty() ? kOk : kPartial;
}

enum class Stage { fit, forecast, report, pipeline };

int run_modelling(const PipelineConfig& cfg, Stage stage) {
  cfg.validate();
  Selection sel = select_series(cfg);
  fs::create_directories(cfg.output_dir);
  const fs::path dir = cfg.output_dir;

  Json per_series = Json::object();
  std::map<std::string, std::string> skipped = sel.skipped;
  for (const auto& [name, s] : sel.series) {
    try {
      const SeriesOutcome o = fit_and_forecast(s, cfg);
      g_log.info(name + ": ARIMA" + o.model.order.str() + " AICc " + std::to_string(o.model.aicc));
      if (stage == Stage::fit || stage == Stage::pipeline) {
        write_file_atomic(dir / (name + ".model.json"), dump(to_json(o.model)));
      }
      if (stage == Stage::forecast || stage == Stage::pipeline) {
        write_file_atomic(dir / (name + ".forecast.csv"), render_forecast_csv(o.forecast));
      }
      if (stage == Stage::report || stage == Stage::pipeline) {
        write_file_atomic(dir / (name + ".report.json"), dump(to_json(make_report(o.forecast, name, cfg))));
        const DoublingResult dbl = doubling_date(o.forecast, o.forecast.anchor_value, cfg.doubling_factor);
        write_file_atomic(dir / (name + ".doubling.json"), dump(to_json(dbl)));
      }
      per_series[name] = fit_diagnostics(o, s);
    } catch (const Error& e) {
      g_log.warn("skipped " + name + ": " + e.what());
      skipped.emplace(name, std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  for (const auto& [name, why] : sel.skipped) g_log.warn("skipped " + name + ": " + why);

  if (stage == Stage::pipeline) {
    Json skipped_json = Json::object();
    for (const auto& [name, why] : skipped) skipped_json[name] = why;
    Json log{{"tool", "pubcast"},
             {"version", kVersion},
             {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
             {"rng_algorithm", kRngAlgorithm},
             {"config", cfg.echo()},
             {"reject_report", sel.reject_report ? Json(sel.reject_report->to_json()) : Json(nullptr)},
             {"duplicate_ids", sel.reject_report ? sel.reject_report->duplicate_ids : 0},
             {"series", per_series},
             {"skipped", skipped_json}};
    write_file_atomic(dir / "run.log.json", dump(log));
  }
  if (per_series.empty()) throw Error(ErrorCode::NoModelFound, "no series could be modelled");
  return skipped.empty() ? kOk : kPartial;
}

struct SimulateArgs {
  int p = 0, d = 0, q = 0;
  std::vector<double> phi, theta;
  double constant = 0.0;
  double sigma2 = 1.0;
  long n = 365;
  int burn_in = 200;
  std::uint64_t seed = 42;
  std::string start_date = "2020-01-01";
  std::string output;
};

int run_simulate(const SimulateArgs& a) {
  SimulationSpec spec;
  spec.order = ArimaOrder{a.p, a.d, a.q, a.constant != 0.0};
  spec.coefficients.phi = Eigen::Map<const Eigen::VectorXd>(a.phi.data(), static_cast<Eigen::Index>(a.phi.size()));
  spec.coefficients.theta =
      Eigen::Map<const Eigen::VectorXd>(a.theta.data(), static_cast<Eigen::Index>(a.theta.size()));
  spec.coefficients.constant = a.constant;
  spec.coefficients.sigma2 = a.sigma2;
  spec.n = a.n;
  spec.seed = a.seed;
  spec.burn_in = a.burn_in;
  spec.start_date = Date::from_iso(a.start_date);
  const DailySeries s = simulate_arima(spec);
  std::ostringstream os;
  write_values_csv(os, s);
  if (a.output.empty()) {
    std::cout << os.str();
  } else {
    write_file_atomic(a.output, os.str());
  }
  g_log.info("simulated ARIMA" + spec.order.str() + " n=" + std::to_string(a.n) + " seed=" +
             std::to_string(a.seed) + " rng=" + std::string(kRngAlgorithm));
  return kOk;
}

struct BacktestArgs {
  long initial_window = 0;
  long step = 7;
  int h = 30;
  std::string output;
};

int run_backtest(const PipelineConfig& cfg, const BacktestArgs& a) {
  Selection sel = select_series(cfg);
  fs::create_directories(cfg.output_dir);
  const SeriesKind scale = series_kind_from_string(cfg.fit_scale);
  Json all = Json::object();
  for (const auto& [name, s] : sel.series) {
    BacktestConfig bc;
    bc.initial_window = a.initial_window > 0 ? a.initial_window : s.size() / 2;
    bc.step = a.step;
    bc.h = a.h;
    bc.level = cfg.level;
    bc.select = cfg.select_options();
    const BacktestReport r = rolling_backtest(convert(s, scale), bc);
    Json j = to_json(r);
    write_file_atomic(fs::path(cfg.output_dir) / (name + ".backtest.json"), dump(j));
    g_log.info(name + ": MAPE " + std::to_string(r.mape) + "% coverage " + std::to_string(r.coverage));
    all[name] = j["aggregates"];
  }
  const std::string text = dump(all);
  if (a.output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(a.output, text);
  }
  return sel.skipped.empty() ? kOk : kPartial;
}

void add_record_options(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--input,--input-path", cfg.input_path, "Record CSV (id,date,source,open_access,dataset)");
  cmd->add_option("--series-file", cfg.series_file, "Date-indexed series CSV instead of records");
  cmd->add_option("--series-kind", cfg.series_kind, "Series file values: cumulative or increments");
  cmd->add_option("--series", cfg.series, "Comma-separated series names (TS1a..TS3d) or 'all'");
  cmd->add_option("--dataset", cfg.dataset, "Default/required dataset: dimensions or who");
  cmd->add_option("--start-date", cfg.start_date, "First day of the series (YYYY-MM-DD)");
  cmd->add_option("--end-date", cfg.end_date, "Last day of the series (YYYY-MM-DD)");
  cmd->add_option("--output-dir", cfg.output_dir, "Directory for artifacts");
}

void add_model_options(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--horizon-days", cfg.horizon_days, "Forecast horizon in days");
  cmd->add_option("--level", cfg.level, "Prediction interval level");
  cmd->add_option("--offsets", cfg.offsets, "Report offsets in days")->delimiter(',');
  cmd->add_option("--report-dates", cfg.report_dates, "Report at explicit dates instead of offsets")
      ->delimiter(',');
  cmd->add_option("--fit-scale", cfg.fit_scale, "cumulative or increments");
  cmd->add_option("--p-max", cfg.p_max, "Largest AR order searched");
  cmd->add_option("--q-max", cfg.q_max, "Largest MA order searched");
  cmd->add_option("--d-max", cfg.d_max, "Largest differencing order");
  cmd->add_option("--d", cfg.d, "Force the differencing order (skips KPSS)");
  cmd->add_option("--alpha", cfg.alpha, "KPSS significance level");
  cmd->add_option("--doubling-factor", cfg.doubling_factor, "Growth factor for the doubling report");
  cmd->add_option("--seed", cfg.seed, "Seed echoed into the run log");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Daily publication-count forecasting with ARIMA"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  // Subcommands inherit this, so app-level flags may follow the subcommand.
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PipelineConfig cfg;
  std::string config_path;
  bool quiet = false;

  auto* ingest = app.add_subcommand("ingest", "Validate a record file and print its reject report");
  std::string ingest_output;
  ingest->add_option("--input,--input-path", cfg.input_path, "Record CSV")->required();
  ingest->add_option("--dataset", cfg.dataset, "Default/required dataset");
  ingest->add_option("--output", ingest_output, "Write the report here instead of stdout");

  auto* series = app.add_subcommand("series", "Emit daily and cumulative series CSVs");
  add_record_options(series, cfg);

  auto* fit = app.add_subcommand("fit", "Select and fit ARIMA models");
  auto* fc = app.add_subcommand("forecast", "Write forecast CSVs");
  auto* report = app.add_subcommand("report", "Write horizon and doubling reports");
  auto* pipeline = app.add_subcommand("pipeline", "Run ingestion through reporting");
  for (auto* cmd : {fit, fc, report, pipeline}) {
    add_record_options(cmd, cfg);
    add_model_options(cmd, cfg);
  }

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate an ARIMA series");
  simulate->add_option("--p", sim.p);
  simulate->add_option("--d", sim.d);
  simulate->add_option("--q", sim.q);
  simulate->add_option("--phi", sim.phi)->delimiter(',');
  simulate->add_option("--theta", sim.theta)->delimiter(',');
  simulate->add_option("--constant", sim.constant, "Intercept of the differenced process");
  simulate->add_option("--sigma2", sim.sigma2);
  simulate->add_option("--n", sim.n);
  simulate->add_option("--burn-in", sim.burn_in);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--start-date", sim.start_date);
  simulate->add_option("--output", sim.output, "CSV path (stdout if omitted)");

  BacktestArgs bt;
  auto* backtest = app.add_subcommand("backtest", "Rolling-origin evaluation");
  add_record_options(backtest, cfg);
  add_model_options(backtest, cfg);
  backtest->add_option("--initial-window", bt.initial_window, "Training days at the first origin");
  backtest->add_option("--step", bt.step, "Days between origins");
  backtest->add_option("--horizon", bt.h, "Forecast horizon per origin (days)");
  backtest->add_option("--output", bt.output, "Aggregate JSON path (stdout if omitted)");

  app.add_flag("--quiet", quiet, "Suppress progress logs");

  // --config is handled before CLI11 so its values act as defaults.
  std::vector<std::string> args;
  try {
    std::vector<std::string> raw(argv + 1, argv + argc);
    std::vector<std::string> from_file;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == "--config" && i + 1 < raw.size()) {
        config_path = raw[++i];
      } else if (raw[i].rfind("--config=", 0) == 0) {
        config_path = raw[i].substr(9);
      } else {
        rest.push_back(raw[i]);
      }
    }
    if (!config_path.empty()) from_file = config_file_args(config_path);
    // Subcommand name first, then file values, then explicit flags. File keys
    // the chosen subcommand does not know are ignored.
    std::size_t sub = 0;
    while (sub < rest.size() && rest[sub].rfind("-", 0) == 0) ++sub;
    for (std::size_t i = 0; i <= sub && i < rest.size(); ++i) args.push_back(rest[i]);
    if (sub < rest.size()) {
      CLI::App* cmd = app.get_subcommand_no_throw(rest[sub]);
      for (std::size_t i = 0; cmd && i + 1 < from_file.size(); i += 2) {
        if (cmd->get_option_no_throw(from_file[i]) != nullptr) {
          args.push_back(from_file[i]);
          args.push_back(from_file[i + 1]);
        }
      }
    }
    for (std::size_t i = sub + 1; i < rest.size(); ++i) args.push_back(rest[i]);
  } catch (const Error& e) {
    fail_json(to_string(e.code()), e.what());
    return kFatal;
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    fail_json("UsageError", e.what());
    return kFatal;
  }

  g_log.quiet = quiet;
  g_log.color = std::getenv("NO_COLOR") == nullptr && isatty(fileno(stderr));

  try {
    if (*ingest) return run_ingest(cfg, ingest_output);
    if (*series) return run_series(cfg);
    if (*fit) return run_modelling(cfg, Stage::fit);
    if (*fc) return run_modelling(cfg, Stage::forecast);
    if (*report) return run_modelling(cfg, Stage::report);
    if (*pipeline) return run_modelling(cfg, Stage::pipeline);
    if (*simulate) return run_simulate(sim);
    if (*backtest) return run_backtest(cfg, bt);
  } catch (const Error& e) {
    fail_json(to_string(e.code()), e.what());
    return kFatal;
  } catch (const std::exception& e) {
    fail_json("InternalError", e.what());
    return kFatal;
  }
  return kFatal;
}
