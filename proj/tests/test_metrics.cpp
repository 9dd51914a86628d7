#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "steinflow/metrics.hpp"

using namespace steinflow;

namespace {

Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("kde peak value for coincident particles") {
  const Matrix x = Matrix::Zero(7, 2);
  CHECK(kde_log_density(x, 1.0, Vector::Zero(2)) == doctest::Approx(std::log(1.0 / (2 * std::numbers::pi))));
}

TEST_CASE("kde far query stays finite") {
  const Matrix x = Matrix::Zero(3, 2);
  const double v = kde_log_density(x, 0.1, vec2(1e3, -1e3));
  CHECK(std::isfinite(v));
  CHECK(v < -1e7);
}

TEST_CASE("kde input validation") {
  const Matrix x = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(kde_log_density(x, 0.0, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(kde_log_density(x, -1.0, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(kde_log_density(Matrix::Zero(1, 2), 1.0, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(kde_log_density(x, 1.0, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("kde integrates to one") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix x = random_matrix(gen, 20, 2);
    const double h = 0.3 + 0.2 * trial;
    const int n = 301;
    const double lo = -8, hi = 8, step = (hi - lo) / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) total += std::exp(kde_log_density(x, h, vec2(lo + i * step, lo + j * step)));
    CHECK(std::abs(total * step * step - 1.0) < 1e-3);
  }
}

TEST_CASE("kl estimate near zero for samples of the target") {
  const Target t = gaussian_target(Matrix::Identity(2, 2), Vector::Zero(2));
  const Ensemble e = init_ensemble({Vector::Zero(2), Matrix::Identity(2, 2), 500, 1});
  const double h = silverman_bandwidth(e.positions).h;
  CHECK(std::abs(kl_estimate(e.positions, t, h, *t.analytic_log_z)) < 0.15);

  Matrix far = e.positions;
  far.col(0).array() += 6.0;
  CHECK(kl_estimate(far, t, h, *t.analytic_log_z) > 10.0);
}

TEST_CASE("kl estimate cancels an additive constant in the potential") {
  const Target t = quartic_target();
  Target shifted = t;
  shifted.potential = [f = t.potential](const Vector& x) { return f(x) + 3.25; };
  std::mt19937_64 gen(32);
  const Matrix x = random_matrix(gen, 50, 2);
  const double log_z = log_normalizer(t, 400);
  const double log_z_shifted = log_normalizer(shifted, 400);
  CHECK(log_z_shifted == doctest::Approx(log_z - 3.25).epsilon(1e-14));
  CHECK(std::abs(kl_estimate(x, t, 0.4, log_z) - kl_estimate(x, shifted, 0.4, log_z - 3.25)) < 1e-12);
}

TEST_CASE("silverman bandwidth") {
  std::mt19937_64 gen(33);
  const Matrix x = random_matrix(gen, 500, 2);
  const Bandwidth b = silverman_bandwidth(x);
  const Matrix c = x.rowwise() - x.colwise().mean();
  const double s0 = std::sqrt(c.col(0).squaredNorm() / 499), s1 = std::sqrt(c.col(1).squaredNorm() / 499);
  const double factor = std::pow(4.0 / (4.0 * 500.0), 1.0 / 6.0);
  CHECK(factor == doctest::Approx(0.35493).epsilon(1e-4));
  CHECK(b.h == doctest::Approx(0.5 * (s0 + s1) * factor).epsilon(1e-14));
  CHECK(b.h == doctest::Approx(factor).epsilon(0.1));
  CHECK_FALSE(b.degenerate);

  CHECK(silverman_bandwidth(3.0 * x).h == doctest::Approx(3.0 * b.h).epsilon(1e-14));

  double previous = 1e300;
  for (Index n : {10, 100, 1000, 10000}) {
    const Matrix ones = Matrix::Ones(n, 2);
    Matrix alternating = ones;
    for (Index i = 0; i < n; i += 2) alternating.row(i) *= -1;
    const double h = silverman_bandwidth(alternating).h;
    CHECK(h < previous);
    previous = h;
  }

  const Bandwidth flat = silverman_bandwidth(Matrix::Constant(10, 2, 1.5));
  CHECK(flat.degenerate);
  CHECK(flat.h == kMinBandwidth);
  CHECK_THROWS_AS(silverman_bandwidth(Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("step record fields") {
  const Target t = gaussian_target(Matrix::Identity(2, 2), Vector::Zero(2));
  Ensemble e = init_ensemble({vec2(1, -1), Matrix::Identity(2, 2) * 0.5, 100, 4});
  e.step_index = 30;
  StepStats s;
  s.restart_fraction = 0.25;
  s.alpha_mean = 0.4;
  const StepRecord r = make_step_record(e, s, t, *t.analytic_log_z);
  const MeanCov mc = sample_mean_cov(e);
  CHECK(r.step == 30);
  CHECK(r.mean == mc.mean);
  CHECK(r.cov_trace == doctest::Approx(mc.covariance.trace()));
  CHECK(r.restart_fraction == 0.25);
  CHECK(r.alpha_mean == 0.4);
  CHECK(r.kl_estimate ==
        doctest::Approx(kl_estimate(e.positions, t, silverman_bandwidth(e.positions).h, *t.analytic_log_z)));

  const StepRecord one = make_step_record(make_ensemble(Matrix::Zero(1, 2)), s, t, 0.0);
  CHECK(std::isnan(one.kl_estimate));
}
