#include "pubcast/arima.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include "pubcast/errors.hpp"
#include "pubcast/kpss.hpp"
#include "pubcast/optimize.hpp"
#include "pubcast/polynomial.hpp"
#include "pubcast/state_space.hpp"

namespace pubcast {

namespace {

// Unconstrained optimizer coordinates: partial autocorrelations through atanh
// for both polynomials, and the mean as an offset from the sample mean in
// units of the sample standard deviation.
struct ParameterLayout {
  int p = 0;
  int q = 0;
  bool constant = false;
  double center = 0.0;
  double scale = 1.0;

  Eigen::Index size() const { return p + q + (constant ? 1 : 0); }

  Eigen::VectorXd pack(const Eigen::VectorXd& phi, const Eigen::VectorXd& theta, double mean) const {
    Eigen::VectorXd x(size());
    x.head(p) = coefficients_to_pacf(phi);
    x.segment(p, q) = coefficients_to_pacf(-theta);
    if (constant) x[p + q] = (mean - center) / scale;
    return x;
  }

  void unpack(const Eigen::VectorXd& x, Eigen::VectorXd& phi, Eigen::VectorXd& theta,
              double& mean) const {
    phi = pacf_to_coefficients(x.head(p));
    theta = -pacf_to_coefficients(x.segment(p, q));
    mean = constant ? center + scale * x[p + q] : 0.0;
  }
};

ParameterLayout make_layout(const ArimaOrder& order, const Eigen::VectorXd& w) {
  ParameterLayout layout{order.p, order.q, order.with_constant, 0.0, 1.0};
  if (order.with_constant) {
    layout.center = w.mean();
    const double sd = std::sqrt((w.array() - layout.center).square().mean());
    layout.scale = sd > 0.0 ? sd : 1.0;
  }
  return layout;
}

void validate_order(const ArimaOrder& order) {
  if (order.p < 0 || order.q < 0 || order.d < 0) {
    throw Error(ErrorCode::InvalidArgument, "ARIMA orders must be non-negative");
  }
  if (order.d > 2) throw Error(ErrorCode::InvalidArgument, "differencing order above 2 is not supported");
  if (order.d == 2 && order.with_constant) {
    throw Error(ErrorCode::InvalidArgument, "a constant is not allowed with d = 2");
  }
}

Eigen::VectorXd differenced_for_fit(const Eigen::VectorXd& values, const ArimaOrder& order) {
  validate_order(order);
  Eigen::VectorXd w = difference(values, order.d).values;
  if (w.size() <= order.p + order.q + 2) {
    throw Error(ErrorCode::InsufficientData,
                "ARIMA" + order.str() + " needs more than " + std::to_string(order.p + order.q + 2) +
                    " differenced observations, got " + std::to_string(w.size()));
  }
  if (!w.allFinite()) throw Error(ErrorCode::NumericalFailure, "series contains non-finite values");
  return w;
}

// Root mean square, used to put the optimizer on unit scale so estimates are
// equivariant to rescaling the data.
double rms_scale(const Eigen::VectorXd& w) {
  const double r = std::sqrt(w.squaredNorm() / static_cast<double>(w.size()));
  return r > 0.0 && std::isfinite(r) ? r : 1.0;
}

bool zero_variance(const Eigen::VectorXd& w) {
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  return (w.maxCoeff() - w.minCoeff()) <= 1e-12 * scale;
}

// Conditional sum of squares: the first p observations condition the AR part
// and pre-sample innovations are zero.
double conditional_sum_of_squares(const Eigen::VectorXd& w, const Eigen::VectorXd& phi,
                                  const Eigen::VectorXd& theta, double mean, Eigen::Index& used) {
  const Eigen::Index n = w.size();
  const Eigen::Index p = phi.size();
  const Eigen::Index q = theta.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  double ssq = 0.0;
  for (Eigen::Index t = p; t < n; ++t) {
    double v = w[t] - mean;
    for (Eigen::Index i = 0; i < p; ++i) v -= phi[i] * (w[t - i - 1] - mean);
    for (Eigen::Index j = 0; j < q && j < t; ++j) v -= theta[j] * e[t - j - 1];
    e[t] = v;
    ssq += v * v;
  }
  used = n - p;
  return ssq;
}

struct CssFit {
  ArimaCoefficients coefficients;
  bool converged = true;
  int iterations = 0;
};

CssFit css_fit(const Eigen::VectorXd& w, const ArimaOrder& order, const FitOptions& options) {
  CssFit out;
  if (order.p == 0 && order.q == 0) {
    const double mean = order.with_constant ? w.mean() : 0.0;
    out.coefficients = ArimaCoefficients::from_mean({}, {}, mean, (w.array() - mean).square().mean());
    return out;
  }
  const double data_scale = rms_scale(w);
  const Eigen::VectorXd ws = w / data_scale;
  const ParameterLayout layout = make_layout(order, ws);

  auto objective = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd phi, theta;
    double mean;
    layout.unpack(x, phi, theta, mean);
    Eigen::Index used = 0;
    const double ssq = conditional_sum_of_squares(ws, phi, theta, mean, used);
    return 0.5 * std::log(ssq / static_cast<double>(used));
  };

  MinimizeOptions mo;
  mo.max_iterations = options.max_iterations;
  mo.value_tolerance = options.loglik_tolerance / static_cast<double>(w.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.size());
  try {
    const MinimizeResult r = minimize_bfgs(objective, x, mo);
    x = r.x;
    out.iterations = r.iterations;
  } catch (const ConvergenceFailure& e) {
    x = Eigen::Map<const Eigen::VectorXd>(e.best_point().data(),
                                          static_cast<Eigen::Index>(e.best_point().size()));
    out.converged = false;
    out.iterations = options.max_iterations;
  }
  Eigen::VectorXd phi, theta;
  double mean;
  layout.unpack(x, phi, theta, mean);
  mean *= data_scale;
  Eigen::Index used = 0;
  const double ssq = conditional_sum_of_squares(w, phi, theta, mean, used);
  out.coefficients = ArimaCoefficients::from_mean(phi, theta, mean, ssq / static_cast<double>(used));
  return out;
}

struct ExactEval {
  KalmanOutput filter;
  double loglik = 0.0;
};

ExactEval exact_concentrated(const Eigen::VectorXd& w, const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& theta, double mean) {
  const ArmaStateSpace ss(phi, theta);
  ExactEval out{kalman_filter(ss, (w.array() - mean).matrix()), 0.0};
  out.loglik = concentrated_loglik(out.filter);
  return out;
}

double anchor_of(const FittedModel& model) {
  const DifferencedSeries& diff = model.differenced;
  return diff.d > 0 ? diff.tail_values[0] : diff.values[diff.values.size() - 1];
}

FittedModel degenerate_model(const DifferencedSeries& diff, const ArimaOrder& order,
                             const SeriesMeta& meta) {
  FittedModel m;
  m.order = order;
  m.order.p = 0;
  m.order.q = 0;
  const double level = diff.values[0];
  m.coefficients = ArimaCoefficients::from_mean({}, {}, order.with_constant ? level : 0.0, 0.0);
  m.degenerate = true;
  m.loglik = 0.0;
  m.aicc = 0.0;
  m.residuals = Eigen::VectorXd::Zero(diff.values.size());
  m.series_meta = meta;
  m.differenced = diff;
  m.predicted_state = Eigen::VectorXd::Zero(1);
  return m;
}

}  // namespace

std::string ArimaOrder::str() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")" +
         (with_constant ? "+c" : "");
}

double ArimaCoefficients::mean() const { return constant / (1.0 - phi.sum()); }

ArimaCoefficients ArimaCoefficients::from_mean(Eigen::VectorXd phi, Eigen::VectorXd theta,
                                               double mean, double sigma2) {
  ArimaCoefficients c;
  c.constant = mean * (1.0 - phi.sum());
  c.phi = std::move(phi);
  c.theta = std::move(theta);
  c.sigma2 = sigma2;
  return c;
}

bool ArimaCoefficients::is_admissible(double margin) const {
  return roots_outside_unit_circle(phi, margin) &&
         roots_outside_unit_circle((-theta).eval(), margin);
}

int parameter_count(const ArimaOrder& order) {
  return order.p + order.q + (order.with_constant ? 1 : 0) + 1;
}

double aicc(double loglik, int k, Eigen::Index n) {
  if (n - k - 1 <= 0) {
    throw Error(ErrorCode::InsufficientData, "AICc undefined: " + std::to_string(k) +
                                                 " parameters on " + std::to_string(n) + " observations");
  }
  return -2.0 * loglik + 2.0 * k * static_cast<double>(n) / static_cast<double>(n - k - 1);
}

ArimaCoefficients estimate_css(const Eigen::VectorXd& values, const ArimaOrder& order,
                               const FitOptions& options) {
  const Eigen::VectorXd w = differenced_for_fit(values, order);
  CssFit fit = css_fit(w, order, options);
  if (!fit.converged) {
    const ArimaCoefficients& c = fit.coefficients;
    std::vector<double> best(c.phi.data(), c.phi.data() + c.phi.size());
    best.insert(best.end(), c.theta.data(), c.theta.data() + c.theta.size());
    best.push_back(c.constant);
    best.push_back(c.sigma2);
    throw ConvergenceFailure("CSS estimation of ARIMA" + order.str() + " did not converge",
                             std::move(best), c.sigma2);
  }
  return fit.coefficients;
}

ArimaCoefficients estimate_css(const DailySeries& series, const ArimaOrder& order,
                               const FitOptions& options) {
  return estimate_css(series.values(), order, options);
}

double log_likelihood(const Eigen::VectorXd& values, const ArimaOrder& order,
                      const ArimaCoefficients& coefficients) {
  validate_order(order);
  if (!coefficients.is_admissible(0.0)) {
    throw Error(ErrorCode::InvalidCoefficients, "coefficients are not stationary and invertible");
  }
  const Eigen::VectorXd w = difference(values, order.d).values;
  const ArmaStateSpace ss(coefficients.phi, coefficients.theta);
  const KalmanOutput k = kalman_filter(ss, (w.array() - coefficients.mean()).matrix());
  const double ll = gaussian_loglik(k, coefficients.sigma2);
  if (!std::isfinite(ll)) throw Error(ErrorCode::NumericalFailure, "log-likelihood is not finite");
  return ll;
}

double log_likelihood(const DailySeries& series, const ArimaOrder& order,
                      const ArimaCoefficients& coefficients) {
  return log_likelihood(series.values(), order, coefficients);
}

double log_likelihood_dense(const Eigen::VectorXd& values, const ArimaOrder& order,
                            const ArimaCoefficients& coefficients) {
  validate_order(order);
  if (!coefficients.is_admissible(0.0)) {
    throw Error(ErrorCode::InvalidCoefficients, "coefficients are not stationary and invertible");
  }
  const Eigen::VectorXd y = difference(values, order.d).values.array() - coefficients.mean();
  const Eigen::Index n = y.size();

  // gamma(k) = sigma2 * sum_j psi_j psi_{j+k}, truncated once the weights vanish.
  Eigen::Index terms = 64;
  Eigen::VectorXd psi;
  for (;;) {
    psi.resize(terms + 1);
    psi[0] = 1.0;
    psi.tail(terms) = psi_weights(coefficients.phi, coefficients.theta, terms);
    if (psi.tail(16).cwiseAbs().maxCoeff() < 1e-17 || terms >= (1 << 20)) break;
    terms *= 2;
  }
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n && k <= terms; ++k) {
    gamma[k] = coefficients.sigma2 * psi.head(terms + 1 - k).dot(psi.tail(terms + 1 - k));
  }
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = gamma[std::abs(i - j)];
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "autocovariance matrix is not positive definite");
  }
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

FittedModel estimate_mle(const Eigen::VectorXd& values, const ArimaOrder& order,
                         const SeriesMeta& meta, const FitOptions& options) {
  const Eigen::VectorXd w = differenced_for_fit(values, order);
  DifferencedSeries diff = difference(values, order.d, meta.start_date);

  if (zero_variance(w) && (order.with_constant || w.cwiseAbs().maxCoeff() == 0.0)) {
    return degenerate_model(diff, order, meta);
  }

  const CssFit css = css_fit(w, order, options);
  const double data_scale = rms_scale(w);
  const Eigen::VectorXd ws = w / data_scale;
  const ParameterLayout layout = make_layout(order, ws);
  const Eigen::VectorXd x0 =
      layout.pack(css.coefficients.phi, css.coefficients.theta, css.coefficients.mean() / data_scale);
  const double n = static_cast<double>(w.size());

  auto objective = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd phi, theta;
    double mean;
    layout.unpack(x, phi, theta, mean);
    try {
      return -exact_concentrated(ws, phi, theta, mean).loglik / n;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FittedModel model;
  model.order = order;
  model.series_meta = meta;
  Eigen::VectorXd x = x0;
  MinimizeOptions mo;
  mo.max_iterations = options.max_iterations;
  mo.value_tolerance = options.loglik_tolerance / n;
  try {
    const MinimizeResult r = minimize_bfgs(objective, x0, mo);
    x = r.x;
    model.iterations = r.iterations;
  } catch (const ConvergenceFailure&) {
    model.css_fallback = true;
    model.iterations = options.max_iterations;
  }

  Eigen::VectorXd phi, theta;
  double mean;
  layout.unpack(x, phi, theta, mean);
  mean *= data_scale;
  const ExactEval eval = exact_concentrated(w, phi, theta, mean);
  if (!std::isfinite(eval.loglik)) throw Error(ErrorCode::NumericalFailure, "log-likelihood is not finite");

  model.coefficients = ArimaCoefficients::from_mean(phi, theta, mean, eval.filter.sum_squares / n);
  model.loglik = eval.loglik;
  model.aicc = aicc(model.loglik, parameter_count(order), w.size());
  model.residuals = eval.filter.innovations;
  model.predicted_state = eval.filter.predicted_state;
  model.differenced = std::move(diff);
  return model;
}

FittedModel estimate_mle(const DailySeries& series, const ArimaOrder& order,
                         const FitOptions& options) {
  return estimate_mle(series.values(), order,
                      SeriesMeta{series.start_date(), series.size(), series.kind()}, options);
}

double OrderSearch::min_starting_aicc() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : visited) {
    if (c.starting_model && c.ok) best = std::min(best, c.aicc);
  }
  return best;
}

OrderSearch search_orders(const DailySeries& series, const SelectOptions& options) {
  if (series.size() < 30) {
    throw Error(ErrorCode::InsufficientData,
                "order selection needs at least 30 observations, got " + std::to_string(series.size()));
  }
  OrderSearch search;
  search.d = options.d_override ? *options.d_override
                                : select_d(series.values(), options.alpha, options.d_max);
  const int d = search.d;
  const SeriesMeta meta{series.start_date(), series.size(), series.kind()};
  DifferencedSeries diff = difference(series, d);

  if (zero_variance(diff.values)) {
    const bool constant = diff.values.cwiseAbs().maxCoeff() > 0.0;
    search.best = degenerate_model(diff, ArimaOrder{0, d, 0, constant}, meta);
    search.visited.push_back({search.best.order, 0.0, true, true, {}});
    return search;
  }

  const bool constant_allowed = d <= 1;
  std::map<ArimaOrder, std::optional<FittedModel>> fits;
  std::optional<ArimaOrder> incumbent;

  // Ordering used to pick among candidates: AICc, then (p, q, constant).
  auto better = [&](const ArimaOrder& a, const ArimaOrder& b) {
    const double fa = fits.at(a)->aicc;
    const double fb = fits.at(b)->aicc;
    if (fa != fb) return fa < fb;
    return std::tie(a.p, a.q, a.with_constant) < std::tie(b.p, b.q, b.with_constant);
  };

  auto visit = [&](const ArimaOrder& order, bool starting) -> bool {
    if (order.p < 0 || order.q < 0 || order.p > options.p_max || order.q > options.q_max) return false;
    if (order.with_constant && !constant_allowed) return false;
    if (fits.count(order)) return fits.at(order).has_value();
    CandidateFit record{order, 0.0, false, starting, {}};
    try {
      FittedModel m = estimate_mle(series.values(), order, meta, options.fit);
      record.aicc = m.aicc;
      record.ok = std::isfinite(m.aicc);
      if (record.ok) fits.emplace(order, std::move(m));
    } catch (const Error& e) {
      record.failure = std::string(to_string(e.code())) + ": " + e.what();
    }
    if (!record.ok) fits.emplace(order, std::nullopt);
    search.visited.push_back(record);
    return record.ok;
  };

  const std::pair<int, int> starts[] = {{2, 2}, {1, 0}, {0, 1}, {0, 0}};
  for (const auto& [p, q] : starts) {
    for (bool c : {true, false}) {
      const ArimaOrder order{std::min(p, options.p_max), d, std::min(q, options.q_max), c};
      if (visit(order, true) && (!incumbent || better(order, *incumbent))) incumbent = order;
    }
  }
  if (!incumbent) throw Error(ErrorCode::NoModelFound, "no starting model could be fitted");

  for (;;) {
    const ArimaOrder cur = *incumbent;
    std::vector<ArimaOrder> neighbours;
    for (int dp = -1; dp <= 1; ++dp) {
      for (int dq = -1; dq <= 1; ++dq) {
        if (dp == 0 && dq == 0) continue;
        neighbours.push_back({cur.p + dp, d, cur.q + dq, cur.with_constant});
      }
    }
    neighbours.push_back({cur.p, d, cur.q, !cur.with_constant});

    std::optional<ArimaOrder> best_neighbour;
    for (const auto& nb : neighbours) {
      if (visit(nb, false) && (!best_neighbour || better(nb, *best_neighbour))) best_neighbour = nb;
    }
    if (!best_neighbour || fits.at(*best_neighbour)->aicc >= fits.at(cur)->aicc) break;
    incumbent = best_neighbour;
  }
  search.best = std::move(*fits.at(*incumbent));
  return search;
}

FittedModel select_order(const DailySeries& series, const SelectOptions& options) {
  return search_orders(series, options).best;
}

Eigen::VectorXd psi_weights(const ArimaCoefficients& coefficients, Eigen::Index h) {
  if (h < 1) throw Error(ErrorCode::InvalidHorizon, "psi weights need h >= 1");
  return psi_weights(coefficients.phi, coefficients.theta, h);
}

double normal_quantile_two_sided(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "interval level must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + level));
}

namespace {

Eigen::VectorXd differenced_point_path(const FittedModel& model, int h) {
  Eigen::VectorXd out(h);
  const double mean = model.coefficients.mean();
  if (model.degenerate) return Eigen::VectorXd::Constant(h, mean);
  const ArmaStateSpace ss(model.coefficients.phi, model.coefficients.theta);
  Eigen::VectorXd a = model.predicted_state;
  for (int i = 0; i < h; ++i) {
    out[i] = mean + a[0];
    a = ss.transition * a;
  }
  return out;
}

// sigma2 * sum_{j<l} psi_j^2 for the ARMA operator with `unit_roots` extra
// factors of (1 - z).
Eigen::VectorXd lead_variance(const ArimaCoefficients& c, int unit_roots, int h) {
  Eigen::VectorXd var(h);
  if (c.sigma2 == 0.0) return Eigen::VectorXd::Zero(h);
  const Eigen::VectorXd ar = expand_unit_roots(c.phi, unit_roots);
  const Eigen::VectorXd psi = h > 1 ? psi_weights(ar, c.theta, h - 1) : Eigen::VectorXd(0);
  double acc = 1.0;
  var[0] = c.sigma2;
  for (int l = 1; l < h; ++l) {
    acc += psi[l - 1] * psi[l - 1];
    var[l] = c.sigma2 * acc;
  }
  return var;
}

Forecast assemble(const FittedModel& model, Eigen::VectorXd point, const Eigen::VectorXd& var,
                  double level) {
  const double z = normal_quantile_two_sided(level);
  Forecast f;
  f.anchor_date = model.series_meta.start_date + (model.series_meta.length - 1);
  f.level = level;
  const Eigen::VectorXd half = z * var.cwiseSqrt();
  f.lower = point - half;
  f.upper = point + half;
  f.point = std::move(point);
  return f;
}

void check_horizon(int h) {
  if (h < 1) throw Error(ErrorCode::InvalidHorizon, "forecast horizon must be >= 1, got " + std::to_string(h));
}

}  // namespace

Forecast forecast(const FittedModel& model, int h, double level) {
  check_horizon(h);
  const Eigen::VectorXd w = differenced_point_path(model, h);
  Forecast f = assemble(model, integrate(model.differenced, w),
                        lead_variance(model.coefficients, model.order.d, h), level);
  f.scale = ForecastScale::original;
  f.kind = model.series_meta.kind;
  f.anchor_value = anchor_of(model);
  return f;
}

Forecast forecast_accumulated(const FittedModel& model, int h, double start_total, double level) {
  check_horizon(h);
  const Eigen::VectorXd w = differenced_point_path(model, h);
  const Eigen::VectorXd increments = integrate(model.differenced, w);
  Forecast f = assemble(model, cumulative_sum(increments, start_total),
                        lead_variance(model.coefficients, model.order.d + 1, h), level);
  f.scale = ForecastScale::original;
  f.kind = SeriesKind::cumulative;
  f.anchor_value = start_total;
  return f;
}

Forecast forecast_differenced(const FittedModel& model, int h, double level) {
  check_horizon(h);
  Forecast f = assemble(model, differenced_point_path(model, h),
                        lead_variance(model.coefficients, 0, h), level);
  f.scale = ForecastScale::differenced;
  f.kind = model.series_meta.kind;
  const Eigen::VectorXd& w = model.differenced.values;
  f.anchor_value = w[w.size() - 1];
  return f;
}

}  // namespace pubcast

namespace pubcast {

FittedModel condition_on(const Eigen::VectorXd& values, const ArimaOrder& order,
                         const ArimaCoefficients& coefficients, const SeriesMeta& meta) {
  validate_order(order);
  if (!coefficients.is_admissible(0.0)) {
    throw Error(ErrorCode::InvalidCoefficients, "coefficients are not stationary and invertible");
  }
  FittedModel m;
  m.order = order;
  m.coefficients = coefficients;
  m.series_meta = meta;
  m.differenced = difference(values, order.d, meta.start_date);
  const Eigen::VectorXd& w = m.differenced.values;
  const ArmaStateSpace ss(coefficients.phi, coefficients.theta);
  const KalmanOutput k = kalman_filter(ss, (w.array() - coefficients.mean()).matrix());
  m.residuals = k.innovations;
  m.predicted_state = k.predicted_state;
  if (coefficients.sigma2 > 0.0) {
    m.loglik = gaussian_loglik(k, coefficients.sigma2);
    const int kpar = parameter_count(order);
    m.aicc = w.size() - kpar - 1 > 0 ? aicc(m.loglik, kpar, w.size()) : 0.0;
  } else {
    m.degenerate = true;
  }
  return m;
}

}  // namespace pubcast
