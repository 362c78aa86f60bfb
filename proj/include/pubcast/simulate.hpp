#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "pubcast/arima.hpp"
#include "pubcast/series.hpp"

namespace pubcast {

// Recorded in every output that depends on random draws.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+marsaglia-polar;path-seed=splitmix64";

std::uint64_t splitmix64(std::uint64_t x);
// Seed of path `index` derived from a base seed.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

// Standard normal draws from mt19937_64 via the Marsaglia polar method. Both
// pieces are fully specified, so streams replay across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform();
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SimulationSpec {
  ArimaOrder order;
  ArimaCoefficients coefficients;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  int burn_in = 200;
  Date start_date{2020, 1, 1};
};

// ARMA recursion with Gaussian innovations after burn_in discarded steps,
// then integrated d times from zero. The result has kind increments.
DailySeries simulate_arima(const SimulationSpec& spec);

struct CoverageOptions {
  // Use the true coefficients instead of re-estimating them on each path.
  bool known_parameters = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct CoverageResult {
  double coverage = 0.0;
  std::size_t hits = 0;
  std::size_t valid_paths = 0;
  std::size_t failed_paths = 0;
};

// Fraction of paths whose value at lead h falls inside the level interval.
// Each path simulates spec.n + h values with its own derived seed, fits the
// true order on the first spec.n and forecasts h days ahead.
CoverageResult empirical_coverage(const SimulationSpec& spec, int h, double level,
                                  std::size_t n_paths, std::uint64_t seed,
                                  const CoverageOptions& options = {});

struct BacktestConfig {
  Eigen::Index initial_window = 0;
  Eigen::Index step = 1;
  int h = 1;
  double level = 0.95;
  SelectOptions select;
};

struct BacktestRecord {
  Eigen::Index origin_index = 0;  // index of the first held-out day
  int horizon = 0;                // lead time, 1-based
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double actual = 0.0;
  double point_error = 0.0;  // point - actual
  bool interval_hit = false;
};

struct BacktestReport {
  std::vector<BacktestRecord> records;
  // Mean absolute percentage error in percent, over records with actual != 0.
  double mape = 0.0;
  double coverage = 0.0;
  std::vector<double> mape_by_horizon;
  std::vector<double> coverage_by_horizon;
  std::size_t origins = 0;
  std::size_t failed_origins = 0;
};

// Rolling-origin evaluation: at each origin select_order sees only the prefix.
BacktestReport rolling_backtest(const DailySeries& series, const BacktestConfig& config);

// Deterministic fan-out of n independent jobs over worker threads.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace pubcast
