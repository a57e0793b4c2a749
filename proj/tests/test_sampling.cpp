#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "lpball/analytic.hpp"
#include "lpball/parallel.hpp"
#include "lpball/rng.hpp"
#include "lpball/sampling.hpp"
#include "lpball/statistics.hpp"

using namespace lpball;

namespace {

Exponent fin(double v) { return Exponent::finite(v); }

// Two-sided KS critical value at level 0.001.
double ks_critical(std::size_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

std::vector<double> draw(std::size_t count, auto&& f) {
  std::vector<double> out(count);
  for (auto& x : out) x = f();
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswerZero) {
  const auto out = detail::Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (detail::Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = detail::Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                                {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (detail::Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = detail::Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                                {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (detail::Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, FirstWordsComeFromCounterZero) {
  RngStream rng(0, 0);
  EXPECT_EQ(rng.next_u32(), 0x6627e8d5u);
  EXPECT_EQ(rng.next_u64(), (std::uint64_t{0xe169c58du} << 32) | 0xbc57ac4cu);
  EXPECT_EQ(rng.next_u32(), 0x9b00dbd8u);
}

TEST(RngStream, MisalignedU64SpansBlocks) {
  RngStream a(5, 3), b(5, 3);
  std::vector<std::uint32_t> words(12);
  for (auto& w : words) w = a.next_u32();
  b.next_u32();
  for (int k = 0; k < 5; ++k) {
    const std::uint64_t expect = (std::uint64_t{words[1 + 2 * k]} << 32) | words[2 + 2 * k];
    EXPECT_EQ(b.next_u64(), expect);
  }
}

TEST(RngStream, Reproducible) {
  RngStream a(42, 7), b(42, 7);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a(), b());
  EXPECT_EQ(a.substream(9).seed(), 42u);
  EXPECT_EQ(a.substream(9).stream_id(), 9u);
}

TEST(RngStream, StreamsAndSeedsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a(), y = b(), z = c();
    same_ab += x == y;
    same_ac += x == z;
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, SubstreamsUncorrelated) {
  const std::size_t n = 200000;
  RngStream a(1, 0), b(1, 1);
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = a.uniform(), y = b.uniform();
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(double(n)));
}

TEST(RngStream, UniformIsOpenAndUniform) {
  RngStream rng(3);
  auto xs = draw(200000, [&] { return rng.uniform(); });
  for (double x : xs) {
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
  EXPECT_LT(ks_distance(Ecdf(xs), [](double x) { return cdf::uniform(x, 0, 1); }), ks_critical(xs.size()));
}

TEST(RngStream, NormalAndExponential) {
  RngStream rng(4);
  auto zs = draw(200000, [&] { return rng.normal(); });
  EXPECT_LT(ks_distance(Ecdf(zs), [](double x) { return cdf::normal(x); }), ks_critical(zs.size()));
  auto es = draw(200000, [&] { return rng.exponential(); });
  EXPECT_LT(ks_distance(Ecdf(es), cdf::exponential), ks_critical(es.size()));
}

TEST(Gamma, MatchesIncompleteGamma) {
  for (double shape : {0.05, 0.3, 1.0, 2.5, 17.0}) {
    RngStream rng(10, static_cast<std::uint64_t>(shape * 100));
    auto xs = draw(100000, [&] { return sample_gamma(rng, shape); });
    const double d = ks_distance(Ecdf(xs), [shape](double x) { return x <= 0 ? 0.0 : boost::math::gamma_p(shape, x); });
    EXPECT_LT(d, ks_critical(xs.size())) << shape;
    EXPECT_NEAR(mean_of(xs), shape, 5.0 * std::sqrt(shape / xs.size())) << shape;
  }
}

TEST(Gamma, TinyShapeDoesNotUnderflowToZeroInLogSpace) {
  RngStream rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double lg = detail::sample_log_gamma(rng, 1e-3);
    ASSERT_TRUE(std::isfinite(lg));
  }
}

TEST(Gamma, RejectsBadShape) {
  RngStream rng(1);
  EXPECT_THROW(sample_gamma(rng, 0.0), DomainError);
  EXPECT_THROW(sample_gamma(rng, -1.0), DomainError);
}

TEST(GeneralizedGaussian, AbsolutePowerIsGamma) {
  for (double p : {1.0, 1.5, 2.0, 3.0, 6.0}) {
    RngStream rng(12, static_cast<std::uint64_t>(p * 10));
    auto xs = draw(100000, [&] {
      const double x = sample_pgg(rng, fin(p));
      return std::pow(std::abs(x), p) / p;
    });
    const double shape = 1.0 / p;
    EXPECT_LT(ks_distance(Ecdf(xs), [shape](double x) { return x <= 0 ? 0.0 : boost::math::gamma_p(shape, x); }),
              ks_critical(xs.size()))
        << p;
  }
}

TEST(GeneralizedGaussian, SymmetricSigns) {
  RngStream rng(13);
  int positive = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) positive += sample_pgg(rng, fin(3)) > 0;
  EXPECT_NEAR(positive / double(n), 0.5, 5.0 * 0.5 / std::sqrt(double(n)));
}

TEST(GeneralizedGaussian, AbsoluteMomentsMatch) {
  for (double p : {1.0, 2.0, 2.5, 4.0}) {
    for (double r : {1.0, 2.0}) {
      RngStream rng(14, static_cast<std::uint64_t>(p * 10 + r));
      auto xs = draw(200000, [&] { return std::pow(std::abs(sample_pgg(rng, fin(p))), r); });
      EXPECT_NEAR(mean_of(xs), moment(fin(p), r), 5.0 * sd_of(xs) / std::sqrt(double(xs.size()))) << p << " " << r;
    }
  }
}

TEST(GeneralizedGaussian, InfiniteIsUniform) {
  RngStream rng(15);
  auto xs = draw(100000, [&] { return sample_pgg(rng, Exponent::infinity()); });
  EXPECT_LT(ks_distance(Ecdf(xs), [](double x) { return cdf::uniform(x, -1, 1); }), ks_critical(xs.size()));
}

TEST(UniformBall, StaysInsideBall) {
  for (auto p : {fin(1), fin(2), fin(3.3), Exponent::infinity()}) {
    RngStream rng(16);
    for (int k = 0; k < 1000; ++k) {
      const auto z = sample_uniform_ball(rng, p, 50);
      ASSERT_EQ(z.dim(), 50u);
      ASSERT_LE(lq_norm(z.coords, p), 1.0 + 1e-12);
    }
  }
}

// ||Z||_p^n is uniform on (0, 1) for the uniform law on B_p^n.
TEST(UniformBall, RadialLaw) {
  for (auto [p, n] : {std::pair{fin(1), 5}, std::pair{fin(2), 20}, std::pair{fin(4), 3}, std::pair{Exponent::infinity(), 4}}) {
    RngStream rng(17, static_cast<std::uint64_t>(n));
    std::vector<double> z(n);
    auto xs = draw(50000, [&] {
      sample_uniform_ball_into(rng, p, z);
      return std::pow(lq_norm(z, p), n);
    });
    EXPECT_LT(ks_distance(Ecdf(xs), [](double x) { return cdf::uniform(x, 0, 1); }), ks_critical(xs.size()));
  }
}

// Planar cross-polytope: P(|Z_1| <= 1/2) = 3/4 by elementary area.
TEST(UniformBall, DiamondMarginal) {
  RngStream rng(18);
  const int n = 200000;
  int hits = 0;
  std::vector<double> z(2);
  for (int k = 0; k < n; ++k) {
    sample_uniform_ball_into(rng, fin(1), z);
    hits += std::abs(z[0]) <= 0.5;
  }
  EXPECT_NEAR(hits / double(n), 0.75, 5.0 * std::sqrt(0.75 * 0.25 / n));
}

// Disk: the first coordinate has density (2/pi) sqrt(1 - x^2).
TEST(UniformBall, DiskMarginal) {
  RngStream rng(19);
  std::vector<double> z(2);
  auto xs = draw(100000, [&] {
    sample_uniform_ball_into(rng, fin(2), z);
    return z[0];
  });
  const double pi = std::acos(-1.0);
  auto cdf = [pi](double x) { return 0.5 + (x * std::sqrt(1 - x * x) + std::asin(x)) / pi; };
  EXPECT_LT(ks_distance(Ecdf(xs), cdf), ks_critical(xs.size()));
}

TEST(UniformBall, RejectsEmptyDimension) {
  RngStream rng(1);
  std::vector<double> none;
  EXPECT_THROW(sample_uniform_ball_into(rng, fin(2), none), DomainError);
  EXPECT_THROW(sample_cone_into(rng, fin(2), none), DomainError);
}

TEST(Cone, OnTheSphere) {
  for (double p : {1.0, 1.5, 2.0, 7.0}) {
    RngStream rng(20);
    for (int k = 0; k < 200; ++k) {
      const auto z = sample_cone(rng, fin(p), 100);
      ASSERT_NEAR(lq_norm(z.coords, fin(p)), 1.0, 1e-12);
      ASSERT_EQ(z.measure, Measure::cone_boundary);
    }
  }
}

// On the l1 sphere the cone measure makes (|Z_1|, ..., |Z_n|) flat Dirichlet,
// so |Z_1| ~ Beta(1, n - 1).
TEST(Cone, CrossPolytopeMarginal) {
  const int n = 6;
  RngStream rng(21);
  std::vector<double> z(n);
  auto xs = draw(100000, [&] {
    sample_cone_into(rng, fin(1), z);
    return std::abs(z[0]);
  });
  auto cdf = [](double t) { return t <= 0 ? 0.0 : 1.0 - std::pow(1.0 - std::min(t, 1.0), n - 1); };
  EXPECT_LT(ks_distance(Ecdf(xs), cdf), ks_critical(xs.size()));
}

// On the circle the cone measure is arc length.
TEST(Cone, CircleAngleIsUniform) {
  RngStream rng(22);
  std::vector<double> z(2);
  const double pi = std::acos(-1.0);
  auto xs = draw(100000, [&] {
    sample_cone_into(rng, fin(2), z);
    return std::atan2(z[1], z[0]);
  });
  EXPECT_LT(ks_distance(Ecdf(xs), [pi](double x) { return cdf::uniform(x, -pi, pi); }), ks_critical(xs.size()));
}

TEST(Cone, InfiniteExponentIsARegimeError) {
  RngStream rng(1);
  EXPECT_THROW(sample_cone(rng, Exponent::infinity(), 3), RegimeError);
}

TEST(Sampling, DeterministicPerStream) {
  RngStream a(99, 4), b(99, 4);
  const auto x = sample_uniform_ball(a, fin(2.5), 64);
  const auto y = sample_uniform_ball(b, fin(2.5), 64);
  EXPECT_EQ(x.coords, y.coords);
  std::vector<double> s(64);
  RngStream c(99, 4);
  sample_into(c, fin(2.5), Measure::uniform_ball, s);
  EXPECT_EQ(s, x.coords);
}

TEST(Parallel, ChunkPlanBounds) {
  const auto small = plan_chunks(1000);
  EXPECT_EQ(small.chunk_size, 256u);
  EXPECT_EQ(small.chunks(), 4u);
  EXPECT_EQ(small.size(3), 1000u - 768u);
  const auto big = plan_chunks(10000000);
  EXPECT_LE(big.chunks(), 1024u);
  std::uint64_t total = 0;
  for (std::uint64_t k = 0; k < big.chunks(); ++k) total += big.size(k);
  EXPECT_EQ(total, 10000000u);
}

TEST(Parallel, IndependentOfWorkerCount) {
  auto run = [](unsigned workers) {
    return run_chunked(
        7, 100, 50000, workers, [] { return std::vector<double>(); },
        [](std::vector<double>& s, RngStream& rng, std::uint64_t, std::uint64_t count) {
          for (std::uint64_t k = 0; k < count; ++k) s.push_back(rng.normal());
        },
        [](std::vector<double>& into, const std::vector<double>& from) {
          into.insert(into.end(), from.begin(), from.end());
        });
  };
  const auto one = run(1);
  EXPECT_EQ(one.size(), 50000u);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(run_chunked(
                   1, 0, 5000, 2, [] { return 0; },
                   [](int&, RngStream&, std::uint64_t first, std::uint64_t) {
                     if (first > 1000) throw DomainError("boom");
                   },
                   [](int&, const int&) {}),
               DomainError);
}
