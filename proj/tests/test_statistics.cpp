#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "lpball/rng.hpp"
#include "lpball/statistics.hpp"

using namespace lpball;

namespace {

Exponent fin(double v) { return Exponent::finite(v); }

}  // namespace

TEST(LqNorm, SmallVectors) {
  const std::vector<double> x{3.0, -4.0};
  EXPECT_DOUBLE_EQ(lq_norm(x, fin(1)), 7.0);
  EXPECT_DOUBLE_EQ(lq_norm(x, fin(2)), 5.0);
  EXPECT_DOUBLE_EQ(lq_norm(x, Exponent::infinity()), 4.0);
  EXPECT_NEAR(lq_norm(x, fin(3)), std::cbrt(27.0 + 64.0), 1e-14);
  EXPECT_NEAR(lq_norm(x, fin(1.5)), std::pow(std::pow(3.0, 1.5) + std::pow(4.0, 1.5), 1 / 1.5), 1e-13);
}

TEST(LqNorm, ZeroAndHugeEntries) {
  const std::vector<double> zero(5, 0.0);
  EXPECT_EQ(lq_norm(zero, fin(2)), 0.0);
  const std::vector<double> big{1e300, 1e300};
  EXPECT_NEAR(lq_norm(big, fin(2)) / (1e300 * std::sqrt(2.0)), 1.0, 1e-14);
  const std::vector<double> tiny{1e-300, 1e-300};
  EXPECT_NEAR(lq_norm(tiny, fin(4)) / (1e-300 * std::pow(2.0, 0.25)), 1.0, 1e-14);
}

TEST(LqNorm, MonotoneInExponent) {
  RngStream rng(1);
  std::vector<double> x(30);
  for (auto& v : x) v = rng.normal();
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 10.0}) {
    const double v = lq_norm(x, fin(q));
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_LE(lq_norm(x, Exponent::infinity()), prev);
}

TEST(CltStatistic, DirectFormula) {
  const CltStatistic stat(fin(3), {fin(1), fin(2)});
  RngStream rng(2);
  const auto z = sample_uniform_ball(rng, fin(3), 500);
  std::vector<double> out(2);
  stat.evaluate(z.coords, out);
  const double n = 500;
  for (std::size_t i = 0; i < 2; ++i) {
    const double q = i == 0 ? 1.0 : 2.0;
    const double direct = std::sqrt(n) * (std::pow(n, 1.0 / 3.0 - 1.0 / q) * lq_norm(z.coords, fin(q)) /
                                              std::pow(moment(fin(3), q), 1.0 / q) -
                                          1.0);
    EXPECT_NEAR(out[i], direct, 1e-10);
  }
  EXPECT_EQ(clt_statistic(z, fin(3), {fin(1), fin(2)}), out);
}

TEST(CltStatistic, VanishesAtCentringNorm) {
  const CltStatistic stat(Exponent::infinity(), {fin(1), fin(2), fin(5)});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(stat.from_norm(i, stat.centring_norm(i, 1000), 1000), 0.0, 1e-12);
  // Cube with q = 1: centring norm n M(1) = n/2.
  EXPECT_NEAR(stat.centring_norm(0, 1000), 500.0, 1e-9);
}

TEST(CltStatistic, SampleExponentMustMatch) {
  RngStream rng(3);
  const auto z = sample_uniform_ball(rng, fin(2), 10);
  EXPECT_THROW(clt_statistic(z, fin(3), {fin(1)}), RegimeError);
  EXPECT_THROW(radial_statistic(z, fin(3)), RegimeError);
}

TEST(CltStatistic, RejectsInvalidExponents) {
  EXPECT_THROW(CltStatistic(fin(2), {fin(2)}), RegimeError);
  EXPECT_THROW(CltStatistic(fin(2), {}), std::exception);
}

TEST(RadialStatistic, Value) {
  BallSample z{{0.3, -0.4}, fin(2), Measure::uniform_ball};
  EXPECT_NEAR(radial_statistic(z, fin(2)), 2.0 * 0.5, 1e-15);
}

TEST(MaxNorm, Value) {
  const auto g = gumbel_norms(fin(2), 100);
  BallSample z{std::vector<double>(100, 0.0), fin(2), Measure::uniform_ball};
  z.coords[7] = -0.25;
  EXPECT_NEAR(maxnorm_statistic(z, fin(2), g), 10.0 * 0.25 / g.c_n - g.a_n, 1e-12);
  EXPECT_THROW(maxnorm_statistic(z, Exponent::infinity(), g), RegimeError);
}

TEST(MomentAccumulator, MatchesTwoPass) {
  RngStream rng(4);
  std::vector<std::array<double, 2>> xs(5000);
  for (auto& x : xs) {
    x[0] = rng.normal() + 3.0;
    x[1] = 0.5 * x[0] + rng.exponential();
  }
  MomentAccumulator acc(2);
  for (const auto& x : xs) acc.observe(x);
  double m[2] = {0, 0};
  for (const auto& x : xs)
    for (int i = 0; i < 2; ++i) m[i] += x[i] / xs.size();
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(acc.mean(i), m[i], 1e-12);
    for (int j = 0; j < 2; ++j) {
      double c = 0.0;
      for (const auto& x : xs) c += (x[i] - m[i]) * (x[j] - m[j]);
      EXPECT_NEAR(acc.covariance(i, j), c / (xs.size() - 1), 1e-10);
    }
  }
  EXPECT_EQ(acc.count(), 5000u);
}

TEST(MomentAccumulator, MergeEqualsSequential) {
  RngStream rng(5);
  MomentAccumulator whole(1), a(1), b(1), empty(1);
  for (auto* acc : {&whole, &a, &b, &empty}) acc->add_threshold(0.5);
  for (int k = 0; k < 3000; ++k) {
    const double x = rng.uniform();
    whole.observe(x);
    (k < 1000 ? a : b).observe(x);
  }
  MomentAccumulator merged = empty;
  merged.merge(a);
  merged.merge(b);
  merged.merge(empty);
  EXPECT_EQ(merged.count(), whole.count());
  EXPECT_NEAR(merged.mean(), whole.mean(), 1e-14);
  EXPECT_NEAR(merged.variance(), whole.variance(), 1e-13);
  EXPECT_EQ(merged.thresholds()[0].count, whole.thresholds()[0].count);
}

TEST(MomentAccumulator, ThresholdsAndTailProbabilities) {
  MomentAccumulator acc(2);
  acc.add_threshold(1.0, 0, Tail::upper);
  acc.add_threshold(1.0, 1, Tail::lower);
  acc.add_threshold(10.0, 0, Tail::upper);
  for (double x : {0.0, 1.0, 2.0, 3.0}) {
    const double v[2] = {x, x};
    acc.observe(v);
  }
  EXPECT_NEAR(*tail_log_prob(acc, 1.0, 0, Tail::upper), std::log(0.5), 1e-15);
  EXPECT_NEAR(*tail_log_prob(acc, 1.0, 1, Tail::lower), std::log(0.5), 1e-15);
  EXPECT_FALSE(tail_log_prob(acc, 10.0).has_value());
  EXPECT_THROW(tail_log_prob(acc, 2.0), DomainError);
  EXPECT_THROW(acc.add_threshold(3.0), DomainError);
}

TEST(MomentAccumulator, ShapeErrors) {
  MomentAccumulator a(1), b(2), c(1);
  c.add_threshold(0.0);
  EXPECT_THROW(a.merge(b), DomainError);
  EXPECT_THROW(a.merge(c), DomainError);
  EXPECT_THROW(static_cast<void>(a.covariance(0, 0)), DomainError);
  EXPECT_THROW(a.add_threshold(0.0, 3), DomainError);
}

TEST(Ecdf, StepValuesAndQuantiles) {
  const Ecdf f({3.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(f(0.5), 0.0);
  EXPECT_EQ(f(1.0), 0.25);
  EXPECT_EQ(f(2.0), 0.75);
  EXPECT_EQ(f(10.0), 1.0);
  EXPECT_EQ(f.quantile(0.5), 2.0);
  EXPECT_EQ(f.quantile(0.0), 1.0);
  EXPECT_EQ(f.quantile(1.0), 3.0);
  EXPECT_THROW(Ecdf(std::vector<double>{}), DomainError);
}

TEST(KsDistance, SinglePointAgainstUniform) {
  // ECDF jumps 0 -> 1 at 0.3: sup distance is max(0.3, 0.7).
  EXPECT_NEAR(ks_distance(Ecdf({0.3}), [](double x) { return cdf::uniform(x, 0, 1); }), 0.7, 1e-15);
}

TEST(KsDistance, MatchesBruteForce) {
  RngStream rng(6);
  std::vector<double> xs(500);
  for (auto& x : xs) x = std::round(rng.normal() * 4.0) / 4.0;  // ties
  const Ecdf f(xs);
  auto F = [](double x) { return cdf::normal(x, 1.2); };
  double brute = 0.0;
  for (double t = -6.0; t <= 6.0; t += 0.25) {
    brute = std::max(brute, std::abs(f(t) - F(t)));
    brute = std::max(brute, std::abs(f(std::nextafter(t, -1e9)) - F(t)));
  }
  EXPECT_NEAR(ks_distance(f, F), brute, 1e-12);
}

TEST(GridKs, CloseToExact) {
  RngStream rng(7);
  std::vector<double> xs(20000);
  GridKs grid(4096), other(4096);
  auto F = [](double x) { return cdf::normal(x, 1.1); };
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xs[k] = rng.normal();
    (k % 2 ? grid : other).observe(xs[k], F);
  }
  grid.merge(other);
  EXPECT_EQ(grid.count(), xs.size());
  const double exact = ks_distance(Ecdf(xs), F);
  EXPECT_LE(grid.distance(), exact + 1e-12);
  EXPECT_GE(grid.distance(), exact - 1.0 / 4096 - 1e-12);
  EXPECT_THROW(GridKs(4).merge(GridKs(8)), DomainError);
}

TEST(ReferenceCdf, Values) {
  EXPECT_NEAR(cdf::normal(0.0), 0.5, 1e-16);
  EXPECT_NEAR(cdf::normal(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(cdf::normal(2.0, 4.0), 0.8413447460685429, 1e-15);
  EXPECT_EQ(cdf::exponential(-1.0), 0.0);
  EXPECT_NEAR(cdf::exponential(1.0), 1.0 - std::exp(-1.0), 1e-16);
  EXPECT_NEAR(cdf::gumbel(0.0), std::exp(-1.0), 1e-16);
  EXPECT_EQ(cdf::uniform(5.0, 0.0, 2.0), 1.0);
  EXPECT_EQ(cdf::uniform(0.5, 0.0, 2.0), 0.25);
}

TEST(KsDistance, InvariantUnderIncreasingMaps) {
  RngStream rng(8);
  std::vector<double> xs(2000), ys(2000), ws(2000);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    xs[k] = rng.normal();
    ys[k] = 3.0 * xs[k] - 1.0;
    ws[k] = std::exp(xs[k]);
  }
  auto F = [](double x) { return cdf::normal(x, 1.0); };
  const double base = ks_distance(Ecdf(xs), F);
  EXPECT_NEAR(ks_distance(Ecdf(ys), [&](double y) { return F((y + 1.0) / 3.0); }), base, 1e-12);
  EXPECT_NEAR(ks_distance(Ecdf(ws), [&](double w) { return w > 0.0 ? F(std::log(w)) : 0.0; }), base, 1e-12);
}
