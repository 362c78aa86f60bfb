#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "pubcast/arima.hpp"
#include "pubcast/errors.hpp"
#include "pubcast/optimize.hpp"
#include "pubcast/polynomial.hpp"
#include "pubcast/state_space.hpp"
#include "test_support.hpp"

using namespace pubcast;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

double lag1_autocorrelation(const Eigen::VectorXd& x) {
  const Eigen::VectorXd e = x.array() - x.mean();
  return e.tail(x.size() - 1).dot(e.head(x.size() - 1)) / e.squaredNorm();
}

}  // namespace

TEST_CASE("partial-autocorrelation transform round trips and stays stationary") {
  std::mt19937_64 rng(4);
  for (int p = 1; p <= 6; ++p) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd raw = testing::random_vector(rng, p, -3, 3);
      const Eigen::VectorXd coef = pacf_to_coefficients(raw);
      // Strictly stationary; saturated inputs may sit closer than any fixed margin.
      CHECK(max_reciprocal_root(coef) < 1.0);
      const Eigen::VectorXd back = coefficients_to_pacf(coef);
      CHECK((back - raw).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  // Saturated inputs still land strictly inside.
  CHECK(max_reciprocal_root(pacf_to_coefficients(vec({40.0}))) < 1.0);
  CHECK(max_reciprocal_root(pacf_to_coefficients(vec({40.0, -40.0, 40.0}))) < 1.0);
}

TEST_CASE("root check") {
  CHECK(roots_outside_unit_circle(vec({0.5})));
  CHECK_FALSE(roots_outside_unit_circle(vec({1.0})));
  CHECK_FALSE(roots_outside_unit_circle(vec({1.2, -0.1})));
  CHECK(roots_outside_unit_circle(Eigen::VectorXd(0)));
  CHECK(max_reciprocal_root(vec({0.0, 0.25})) == doctest::Approx(0.5));
}

TEST_CASE("unit-root expansion") {
  CHECK(expand_unit_roots(Eigen::VectorXd(0), 1) == vec({1.0}));
  CHECK(expand_unit_roots(Eigen::VectorXd(0), 2) == vec({2.0, -1.0}));
  // (1 - 0.5z)(1 - z) = 1 - 1.5z + 0.5z^2
  CHECK(expand_unit_roots(vec({0.5}), 1) == vec({1.5, -0.5}));
}

TEST_CASE("BFGS minimizes a Rosenbrock valley") {
  auto f = [](const Eigen::VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  MinimizeOptions o;
  o.value_tolerance = 1e-14;
  o.max_iterations = 2000;
  const MinimizeResult r = minimize_bfgs(f, vec({-1.2, 1.0}), o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("BFGS reports the best iterate when the budget runs out") {
  auto f = [](const Eigen::VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  MinimizeOptions o;
  o.max_iterations = 2;
  o.value_tolerance = 0.0;
  try {
    minimize_bfgs(f, vec({-1.2, 1.0}), o);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.code() == ErrorCode::ConvergenceFailure);
    REQUIRE(e.best_point().size() == 2);
    CHECK(e.best_value() < f(vec({-1.2, 1.0})));
  }
}

TEST_CASE("stationary state covariance solves the Lyapunov equation") {
  const ArmaStateSpace ss(vec({0.5, -0.2}), vec({0.4, 0.1}));
  const Eigen::MatrixXd& P = ss.initial_covariance;
  const Eigen::MatrixXd rhs = ss.transition * P * ss.transition.transpose() +
                              ss.loading * ss.loading.transpose();
  CHECK((P - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("autocovariance from the state space agrees with psi-weight sums") {
  const Eigen::VectorXd phi = vec({0.6, -0.3});
  const Eigen::VectorXd theta = vec({0.4});
  const Eigen::VectorXd gamma = arma_autocovariance(phi, theta, 2.0, 5);
  Eigen::VectorXd psi(3001);
  psi[0] = 1.0;
  psi.tail(3000) = psi_weights(phi, theta, 3000);
  for (int k = 0; k <= 5; ++k) {
    const double oracle = 2.0 * psi.head(3001 - k).dot(psi.tail(3001 - k));
    CHECK(gamma[k] == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("log-likelihood of iid standard normal zeros") {
  ArimaCoefficients c;
  c.sigma2 = 1.0;
  const double ll = log_likelihood(vec({0, 0, 0}), ArimaOrder{0, 0, 0, false}, c);
  CHECK(ll == doctest::Approx(-1.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("AR(1) log-likelihood matches the trivariate normal density") {
  const double phi = 0.6, sigma2 = 1.7;
  const Eigen::VectorXd y = vec({0.3, -1.1, 0.8});
  ArimaCoefficients c = ArimaCoefficients::from_mean(vec({phi}), {}, 0.0, sigma2);

  // Covariance sigma2 phi^|i-j| / (1 - phi^2); determinant and quadratic form
  // by cofactor expansion.
  double S[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) S[i][j] = sigma2 * std::pow(phi, std::abs(i - j)) / (1 - phi * phi);
  const double det = S[0][0] * (S[1][1] * S[2][2] - S[1][2] * S[2][1]) -
                     S[0][1] * (S[1][0] * S[2][2] - S[1][2] * S[2][0]) +
                     S[0][2] * (S[1][0] * S[2][1] - S[1][1] * S[2][0]);
  double inv[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (S[r0][c0] * S[r1][c1] - S[r0][c1] * S[r1][c0]) / det;
    }
  }
  double quad = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) quad += y[i] * inv[i][j] * y[j];
  const double oracle = -0.5 * (3 * std::log(2 * std::numbers::pi) + std::log(det) + quad);

  CHECK(log_likelihood(y, ArimaOrder{1, 0, 0, false}, c) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("Kalman and dense-covariance likelihoods agree") {
  const auto s = testing::simulate({2, 1, 2, true}, {0.5, -0.3}, {0.4, 0.2}, 0.3, 1.5, 80, 17);
  ArimaCoefficients c = ArimaCoefficients::from_mean(vec({0.45, -0.25}), vec({0.35, 0.1}), 0.2, 1.3);
  const ArimaOrder order{2, 1, 2, true};
  CHECK(log_likelihood(s.values(), order, c) ==
        doctest::Approx(log_likelihood_dense(s.values(), order, c)).epsilon(1e-9));

  ArimaCoefficients ma = ArimaCoefficients::from_mean({}, vec({-0.7, 0.2, 0.1}), 0.0, 0.8);
  const ArimaOrder order_ma{0, 0, 3, false};
  CHECK(log_likelihood(s.values(), order_ma, ma) ==
        doctest::Approx(log_likelihood_dense(s.values(), order_ma, ma)).epsilon(1e-9));
}

TEST_CASE("log_likelihood rejects non-stationary coefficients") {
  ArimaCoefficients c = ArimaCoefficients::from_mean(vec({1.05}), {}, 0.0, 1.0);
  CHECK_THROWS_AS(log_likelihood(vec({1, 2, 3, 4}), ArimaOrder{1, 0, 0, false}, c), Error);
}

TEST_CASE("CSS recovers AR(1) near the Yule-Walker estimate") {
  const auto s = testing::simulate({1, 0, 0, false}, {0.7}, {}, 0.0, 1.0, 2000, 123);
  const double yw = lag1_autocorrelation(s.values());
  const ArimaCoefficients c = estimate_css(s, ArimaOrder{1, 0, 0, false});
  CHECK(c.phi[0] >= 0.65);
  CHECK(c.phi[0] <= 0.75);
  CHECK(std::abs(c.phi[0] - yw) < 0.01);
}

TEST_CASE("CSS recovers MA(1) near the moment estimate") {
  const auto s = testing::simulate({0, 0, 1, false}, {}, {0.5}, 0.0, 1.0, 2000, 321);
  const double rho = lag1_autocorrelation(s.values());
  // theta / (1 + theta^2) = rho, invertible root.
  const double moment = (1.0 - std::sqrt(1.0 - 4.0 * rho * rho)) / (2.0 * rho);
  const ArimaCoefficients c = estimate_css(s, ArimaOrder{0, 0, 1, false});
  CHECK(c.theta[0] >= 0.42);
  CHECK(c.theta[0] <= 0.58);
  CHECK(std::abs(c.theta[0] - moment) < 0.06);
}

TEST_CASE("CSS white noise with constant is the sample mean and variance") {
  const auto s = testing::simulate({0, 0, 0, false}, {}, {}, 3.0, 2.0, 400, 8);
  const ArimaCoefficients c = estimate_css(s, ArimaOrder{0, 0, 0, true});
  const double mean = s.values().mean();
  const double var = (s.values().array() - mean).square().mean();
  CHECK(std::abs(c.constant - mean) < 1e-9);
  CHECK(std::abs(c.sigma2 - var) < 1e-9);
}

TEST_CASE("estimation preconditions") {
  const Eigen::VectorXd shortv = vec({1, 2, 3, 4, 5});
  CHECK_THROWS_AS(estimate_css(shortv, ArimaOrder{2, 1, 1, false}), Error);
  CHECK_THROWS_AS(estimate_mle(shortv, ArimaOrder{2, 1, 1, false}, {}), Error);
  CHECK_THROWS_AS(estimate_css(Eigen::VectorXd::LinSpaced(50, 0, 1), ArimaOrder{0, 2, 0, true}), Error);
}

TEST_CASE("MLE ARMA(1,1) recovers the parameters and stays near CSS") {
  const auto s = testing::simulate({1, 0, 1, false}, {0.5}, {0.3}, 0.0, 1.0, 3000, 77);
  const ArimaOrder order{1, 0, 1, false};
  const ArimaCoefficients css = estimate_css(s, order);
  const FittedModel m = estimate_mle(s, order);
  CHECK(m.coefficients.phi[0] >= 0.4);
  CHECK(m.coefficients.phi[0] <= 0.6);
  CHECK(m.coefficients.theta[0] >= 0.2);
  CHECK(m.coefficients.theta[0] <= 0.4);
  CHECK(std::abs(m.coefficients.phi[0] - css.phi[0]) <= 0.05);
  CHECK(std::abs(m.coefficients.theta[0] - css.theta[0]) <= 0.05);
  CHECK(m.residuals.size() == 3000);
  CHECK(std::isfinite(m.aicc));
  CHECK_FALSE(m.css_fallback);
}

TEST_CASE("MLE (0,0,0) without constant gives the mean square") {
  const auto s = testing::simulate({0, 0, 0, false}, {}, {}, 0.0, 1.0, 300, 5);
  const FittedModel m = estimate_mle(s, ArimaOrder{0, 0, 0, false});
  CHECK(std::abs(m.coefficients.sigma2 - s.values().squaredNorm() / 300.0) < 1e-9);
}

TEST_CASE("AICc formula") {
  const auto s = testing::simulate({1, 0, 0, true}, {0.4}, {}, 1.0, 1.0, 200, 9);
  const FittedModel m = estimate_mle(s, ArimaOrder{1, 0, 0, true});
  const double k = 3, n = 200;
  CHECK(m.aicc == doctest::Approx(-2 * m.loglik + 2 * k * n / (n - k - 1)).epsilon(1e-14));
  CHECK(parameter_count(ArimaOrder{2, 1, 3, true}) == 7);
}

TEST_CASE("MLE dominates CSS and returns admissible coefficients") {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> ord(0, 2), dd(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = ord(rng), q = ord(rng), d = dd(rng);
    const ArimaOrder order{p, d, q, d == 0};
    SimulationSpec spec;
    spec.order = {1, d, 1, false};
    spec.coefficients = ArimaCoefficients::from_mean(vec({0.4}), vec({0.3}), 0.0, 1.0);
    spec.n = 150;
    spec.seed = static_cast<std::uint64_t>(trial);
    const DailySeries y = simulate_arima(spec);
    const ArimaCoefficients css = estimate_css(y, order);
    const FittedModel mle = estimate_mle(y, order);
    CHECK(mle.loglik >= log_likelihood(y, order, css) - 1e-8);
    CHECK(mle.coefficients.is_admissible());
    CHECK(css.is_admissible());
  }
}

TEST_CASE("select_order picks white noise on white noise, matching a grid search") {
  const auto s = testing::simulate({0, 0, 0, false}, {}, {}, 0.0, 1.0, 500, 31);
  const OrderSearch search = search_orders(s);
  CHECK(search.d == 0);
  CHECK(search.best.order.p == 0);
  CHECK(search.best.order.q == 0);

  double grid_best = std::numeric_limits<double>::infinity();
  ArimaOrder grid_arg;
  for (int p = 0; p <= 2; ++p) {
    for (int q = 0; q <= 2; ++q) {
      for (bool c : {false, true}) {
        const FittedModel m = estimate_mle(s, ArimaOrder{p, 0, q, c});
        if (m.aicc < grid_best) {
          grid_best = m.aicc;
          grid_arg = m.order;
        }
      }
    }
  }
  CHECK(grid_arg.p == 0);
  CHECK(grid_arg.q == 0);
  CHECK(search.best.aicc <= grid_best + 1e-9);
}

TEST_CASE("select_order on ARIMA(1,1,0)") {
  const auto s = testing::simulate({1, 1, 0, false}, {0.6}, {}, 0.0, 1.0, 800, 3);
  const OrderSearch search = search_orders(s);
  CHECK(search.d == 1);
  CHECK(search.best.aicc <= search.min_starting_aicc());
  const FittedModel truth = estimate_mle(s, ArimaOrder{1, 1, 0, false});
  CHECK(search.best.aicc <= truth.aicc + 1e-6);
  CHECK(search.best.coefficients.is_admissible());
}

TEST_CASE("select_order on a constant series is degenerate") {
  const DailySeries c(Date(2020, 1, 1), Eigen::VectorXd::Constant(60, 5.0), SeriesKind::increments);
  const FittedModel m = select_order(c);
  CHECK(m.degenerate);
  CHECK(m.order.p == 0);
  CHECK(m.order.d == 0);
  CHECK(m.order.q == 0);
  CHECK(m.coefficients.sigma2 == 0.0);
  CHECK(std::isfinite(m.aicc));
}

TEST_CASE("select_order honours d override and preconditions") {
  const auto s = testing::simulate({0, 1, 0, false}, {}, {}, 0.0, 1.0, 200, 6);
  SelectOptions o;
  o.d_override = 2;
  CHECK(select_order(s, o).order.d == 2);
  CHECK_FALSE(select_order(s, o).order.with_constant);
  CHECK_THROWS_AS(select_order(s.head(29)), Error);
  o.d_override.reset();
  o.p_max = 0;
  o.q_max = 0;
  const FittedModel m = select_order(s, o);
  CHECK(m.order.p == 0);
  CHECK(m.order.q == 0);
}

TEST_CASE("shift equivariance of the estimates") {
  const auto s = testing::simulate({1, 0, 1, true}, {0.5}, {0.3}, 2.0, 1.0, 400, 44);
  const Eigen::VectorXd shifted = s.values().array() + 1000.0;
  const ArimaOrder order{1, 0, 1, true};
  const FittedModel a = estimate_mle(s.values(), order, {s.start_date(), s.size(), s.kind()});
  const FittedModel b = estimate_mle(shifted, order, {s.start_date(), s.size(), s.kind()});
  CHECK(std::abs(a.coefficients.phi[0] - b.coefficients.phi[0]) < 1e-6);
  CHECK(std::abs(a.coefficients.theta[0] - b.coefficients.theta[0]) < 1e-6);
  CHECK(std::abs(a.coefficients.sigma2 - b.coefficients.sigma2) < 1e-6);
}

TEST_CASE("psi weights") {
  ArimaCoefficients arma = ArimaCoefficients::from_mean(vec({0.5}), vec({0.3}), 0.0, 1.0);
  const Eigen::VectorXd psi = psi_weights(arma, 3);
  CHECK(psi[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(psi[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(psi[2] == doctest::Approx(0.2).epsilon(1e-15));

  ArimaCoefficients ma = ArimaCoefficients::from_mean({}, vec({0.4, -0.2, 0.1}), 0.0, 1.0);
  const Eigen::VectorXd m = psi_weights(ma, 6);
  CHECK(m == vec({0.4, -0.2, 0.1, 0.0, 0.0, 0.0}));

  ArimaCoefficients ar = ArimaCoefficients::from_mean(vec({0.9}), {}, 0.0, 1.0);
  const Eigen::VectorXd g = psi_weights(ar, 50);
  for (int j = 1; j <= 50; ++j) CHECK(std::abs(g[j - 1] - std::pow(0.9, j)) < 1e-12);

  CHECK_THROWS_AS(psi_weights(ar, 0), Error);
}

TEST_CASE("scale equivariance of selection and forecasts") {
  int same = 0;
  double worst_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = testing::simulate({1, 1, 1, true}, {0.5}, {0.3}, 0.5, 1.0, 200, 9000 + seed);
    const double scale = 1.0 + static_cast<double>(seed % 7) * 3.5;
    const DailySeries scaled(s.start_date(), s.values() * scale, s.kind());
    const FittedModel a = select_order(s);
    const FittedModel b = select_order(scaled);
    const bool match = a.order.p == b.order.p && a.order.d == b.order.d && a.order.q == b.order.q;
    same += match;
    if (!match) continue;
    const FittedModel fixed = estimate_mle(scaled, a.order);
    const Forecast fa = forecast(a, 60), fb = forecast(fixed, 60);
    for (int i = 0; i < 60; ++i) {
      const double pa = fa.point[i] * scale;
      worst_rel = std::max(worst_rel, std::abs(fb.point[i] - pa) / std::max(1.0, std::abs(pa)));
      const double ha = (fa.upper[i] - fa.point[i]) * scale;
      worst_rel = std::max(worst_rel, std::abs((fb.upper[i] - fb.point[i]) - ha) / ha);
    }
  }
  CHECK(same >= 95);
  CHECK(worst_rel <= 1e-6);
}

TEST_CASE("selected model is no worse than the true order when visited") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = testing::simulate({1, 1, 0, false}, {0.6}, {}, 0.0, 1.0, 800, 7000 + seed);
    const OrderSearch search = search_orders(s);
    const ArimaOrder truth{1, 1, 0, false};
    for (const CandidateFit& c : search.visited) {
      if (c.order == truth && c.ok) CHECK(search.best.aicc <= c.aicc + 1e-6);
    }
  }
}
