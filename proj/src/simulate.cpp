#include "pubcast/simulate.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "pubcast/errors.hpp"

namespace pubcast {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

double GaussianStream::uniform() {
  // 53 random bits onto (-1, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-52 - 1.0;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = uniform();
    v = uniform();
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

DailySeries simulate_arima(const SimulationSpec& spec) {
  if (spec.n < 1) throw Error(ErrorCode::InvalidArgument, "simulation length must be >= 1");
  if (spec.burn_in < 0) throw Error(ErrorCode::InvalidArgument, "burn-in must be >= 0");
  const ArimaCoefficients& c = spec.coefficients;
  if (c.phi.size() != spec.order.p || c.theta.size() != spec.order.q) {
    throw Error(ErrorCode::InvalidCoefficients, "coefficient lengths do not match the order");
  }
  if (!c.is_admissible(0.0) || !(c.sigma2 >= 0.0)) {
    throw Error(ErrorCode::InvalidCoefficients, "simulation needs stationary, invertible coefficients");
  }
  const Eigen::Index p = c.phi.size();
  const Eigen::Index q = c.theta.size();
  const Eigen::Index total = spec.n + spec.burn_in;
  const double sigma = std::sqrt(c.sigma2);
  const double mean = c.mean();

  GaussianStream rng(spec.seed);
  Eigen::VectorXd e(total), x(total);
  for (Eigen::Index t = 0; t < total; ++t) {
    e[t] = sigma * rng.next();
    double v = c.constant + e[t];
    for (Eigen::Index i = 0; i < p; ++i) v += c.phi[i] * (t - i - 1 >= 0 ? x[t - i - 1] : mean);
    for (Eigen::Index j = 0; j < q; ++j) v += t - j - 1 >= 0 ? c.theta[j] * e[t - j - 1] : 0.0;
    x[t] = v;
  }
  Eigen::VectorXd values = x.tail(spec.n);
  for (int k = 0; k < spec.order.d; ++k) values = cumulative_sum(values);
  return DailySeries{spec.start_date, std::move(values), SeriesKind::increments};
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

CoverageResult empirical_coverage(const SimulationSpec& spec, int h, double level,
                                  std::size_t n_paths, std::uint64_t seed,
                                  const CoverageOptions& options) {
  if (n_paths < 100) throw Error(ErrorCode::InvalidArgument, "coverage needs at least 100 paths");
  if (h < 1) throw Error(ErrorCode::InvalidHorizon, "coverage horizon must be >= 1");

  enum class Outcome : unsigned char { miss, hit, failed };
  std::vector<Outcome> outcomes(n_paths, Outcome::failed);

  parallel_for(n_paths, options.threads, [&](std::size_t i) {
    SimulationSpec path = spec;
    path.n = spec.n + h;
    path.seed = path_seed(seed, i);
    const DailySeries full = simulate_arima(path);
    const Eigen::VectorXd train = full.values().head(spec.n);
    const SeriesMeta meta{full.start_date(), spec.n, full.kind()};
    try {
      const FittedModel model = options.known_parameters
                                    ? condition_on(train, spec.order, spec.coefficients, meta)
                                    : estimate_mle(train, spec.order, meta);
      const Forecast f = forecast(model, h, level);
      const double actual = full.values()[spec.n + h - 1];
      outcomes[i] = (actual >= f.lower[h - 1] && actual <= f.upper[h - 1]) ? Outcome::hit : Outcome::miss;
    } catch (const Error&) {
      outcomes[i] = Outcome::failed;
    }
  });

  CoverageResult out;
  for (Outcome o : outcomes) {
    if (o == Outcome::failed) {
      ++out.failed_paths;
      continue;
    }
    ++out.valid_paths;
    if (o == Outcome::hit) ++out.hits;
  }
  out.coverage = out.valid_paths ? static_cast<double>(out.hits) / out.valid_paths : 0.0;
  return out;
}

BacktestReport rolling_backtest(const DailySeries& series, const BacktestConfig& config) {
  if (config.h < 1) throw Error(ErrorCode::InvalidHorizon, "backtest horizon must be >= 1");
  if (config.step < 1) throw Error(ErrorCode::InvalidArgument, "backtest step must be >= 1");
  if (config.initial_window < 1 || config.initial_window + config.h > series.size()) {
    throw Error(ErrorCode::InsufficientData,
                "series of length " + std::to_string(series.size()) + " cannot hold a window of " +
                    std::to_string(config.initial_window) + " plus horizon " + std::to_string(config.h));
  }

  BacktestReport report;
  const Eigen::VectorXd& y = series.values();
  std::vector<double> ape_sum(config.h, 0.0), hit_sum(config.h, 0.0);
  std::vector<std::size_t> ape_n(config.h, 0), hit_n(config.h, 0);

  for (Eigen::Index origin = config.initial_window; origin + config.h <= series.size();
       origin += config.step) {
    ++report.origins;
    Forecast f;
    try {
      const FittedModel model = select_order(series.head(origin), config.select);
      f = forecast(model, config.h, config.level);
    } catch (const Error&) {
      ++report.failed_origins;
      continue;
    }
    for (int l = 0; l < config.h; ++l) {
      BacktestRecord r;
      r.origin_index = origin;
      r.horizon = l + 1;
      r.point = f.point[l];
      r.lower = f.lower[l];
      r.upper = f.upper[l];
      r.actual = y[origin + l];
      r.point_error = r.point - r.actual;
      r.interval_hit = r.actual >= r.lower && r.actual <= r.upper;
      if (std::isfinite(r.actual)) {
        hit_sum[l] += r.interval_hit ? 1.0 : 0.0;
        ++hit_n[l];
        if (r.actual != 0.0) {
          ape_sum[l] += std::abs(r.point_error / r.actual) * 100.0;
          ++ape_n[l];
        }
      }
      report.records.push_back(r);
    }
  }

  double ape_total = 0.0, hit_total = 0.0;
  std::size_t ape_count = 0, hit_count = 0;
  for (int l = 0; l < config.h; ++l) {
    report.mape_by_horizon.push_back(ape_n[l] ? ape_sum[l] / ape_n[l] : 0.0);
    report.coverage_by_horizon.push_back(hit_n[l] ? hit_sum[l] / hit_n[l] : 0.0);
    ape_total += ape_sum[l];
    ape_count += ape_n[l];
    hit_total += hit_sum[l];
    hit_count += hit_n[l];
  }
  report.mape = ape_count ? ape_total / ape_count : 0.0;
  report.coverage = hit_count ? hit_total / hit_count : 0.0;
  return report;
}

}  // namespace pubcast
