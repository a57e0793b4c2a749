#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lpball/errors.hpp"
#include "lpball/exponent.hpp"
#include "lpball/rng.hpp"

namespace lpball {

enum class Measure { uniform_ball, cone_boundary };

inline const char* to_string(Measure m) noexcept {
  return m == Measure::uniform_ball ? "uniform-ball" : "cone-boundary";
}

struct BallSample {
  std::vector<double> coords;
  Exponent p = Exponent::infinity();
  Measure measure = Measure::uniform_ball;

  [[nodiscard]] std::size_t dim() const noexcept { return coords.size(); }
};

namespace detail {

// log of a Gamma(shape, 1) variate. Marsaglia-Tsang squeeze/rejection for
// shape >= 1; for shape < 1 the boost G = G' U^{1/shape} with G' ~
// Gamma(shape + 1) is applied in log space so tiny shapes cannot underflow.
inline double sample_log_gamma(RngStream& rng, double shape) {
  const bool boosted = shape < 1.0;
  const double a = boosted ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double log_g = 0.0;
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      log_g = std::log(d * v);
      break;
    }
    const double log_v = std::log(v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + log_v)) {
      log_g = std::log(d) + log_v;
      break;
    }
  }
  if (boosted) log_g += std::log(rng.uniform()) / shape;
  return log_g;
}

inline void sample_pgg_into(RngStream& rng, Exponent p, std::span<double> out) {
  if (p.is_infinite()) {
    for (double& x : out) x = rng.uniform_symmetric();
    return;
  }
  const double pv = p.value();
  // Signs come from a pool of random bits, 64 per draw.
  std::uint64_t signs = 0;
  int left = 0;
  auto sign = [&](double mag) {
    if (left == 0) {
      signs = rng.next_u64();
      left = 64;
    }
    const bool negative = (signs & 1u) != 0;
    signs >>= 1;
    --left;
    return negative ? -mag : mag;
  };
  if (pv == 1.0) {
    // Laplace: |X| ~ Exp(1).
    for (double& x : out) x = sign(rng.exponential());
    return;
  }
  if (pv == 2.0) {
    for (double& x : out) x = rng.normal();
    return;
  }
  const double shape = 1.0 / pv;
  const double log_p = std::log(pv);
  for (double& x : out) x = sign(std::exp((log_p + sample_log_gamma(rng, shape)) / pv));
}

inline double finite_norm_of(std::span<const double> y, double p) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  if (p == 1.0) {
    for (double v : y) s += std::abs(v);
    return s;
  }
  if (p == 2.0) {
    for (double v : y) {
      const double r = v / m;
      s += r * r;
    }
    return m * std::sqrt(s);
  }
  for (double v : y) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

}  // namespace detail

/// One Gamma(shape, 1) variate.
inline double sample_gamma(RngStream& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
  return std::exp(detail::sample_log_gamma(rng, shape));
}

/// One p-generalized Gaussian variate, density exp(-|x|^p / p) / (2 p^{1/p}
/// Gamma(1 + 1/p)); uniform on [-1, 1] for p = inf.
///
/// General p uses |X|^p / p ~ Gamma(1/p, 1) with an independent random sign.
/// p = 1 (Laplace) and p = 2 (standard normal) are drawn directly.
inline double sample_pgg(RngStream& rng, Exponent p) {
  double x = 0.0;
  detail::sample_pgg_into(rng, p, std::span<double>(&x, 1));
  return x;
}

/// Fills `out` with a uniform point of B_p^n, n = out.size().
/// Finite p: Z = U^{1/n} Y / ||Y||_p with Y i.i.d. p-generalized Gaussian.
inline void sample_uniform_ball_into(RngStream& rng, Exponent p, std::span<double> out) {
  if (out.empty()) throw DomainError("dimension must be >= 1");
  detail::sample_pgg_into(rng, p, out);
  if (p.is_infinite()) return;
  const double norm = detail::finite_norm_of(out, p.value());
  const double radial = std::exp(std::log(rng.uniform()) / static_cast<double>(out.size()));
  const double scale = radial / norm;
  for (double& x : out) x *= scale;
}

/// Fills `out` with a cone-measure point of the boundary of B_p^n: Y / ||Y||_p.
inline void sample_cone_into(RngStream& rng, Exponent p, std::span<double> out) {
  if (p.is_infinite()) throw RegimeError("cone-measure sampling is only provided for p < inf");
  if (out.empty()) throw DomainError("dimension must be >= 1");
  detail::sample_pgg_into(rng, p, out);
  const double inv = 1.0 / detail::finite_norm_of(out, p.value());
  for (double& x : out) x *= inv;
}

inline BallSample sample_uniform_ball(RngStream& rng, Exponent p, std::size_t n) {
  BallSample z{std::vector<double>(n), p, Measure::uniform_ball};
  sample_uniform_ball_into(rng, p, z.coords);
  return z;
}

inline BallSample sample_cone(RngStream& rng, Exponent p, std::size_t n) {
  BallSample z{std::vector<double>(n), p, Measure::cone_boundary};
  sample_cone_into(rng, p, z.coords);
  return z;
}

inline void sample_into(RngStream& rng, Exponent p, Measure m, std::span<double> out) {
  if (m == Measure::uniform_ball) {
    sample_uniform_ball_into(rng, p, out);
  } else {
    sample_cone_into(rng, p, out);
  }
}

}  // namespace lpball
