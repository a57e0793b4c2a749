#pragma once

// Norms, the normalized limit statistics of a random point of B_p^n, and
// streaming empirical summaries (moments, exceedance counts, ECDF, KS).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lpball/analytic.hpp"
#include "lpball/errors.hpp"
#include "lpball/exponent.hpp"
#include "lpball/sampling.hpp"

namespace lpball {

namespace detail {

// |x|^q with multiplication for small integer and half-integer q.
inline double pow_abs(double ax, double q) {
  if (q == 1.0) return ax;
  if (q == 2.0) return ax * ax;
  if (q == 3.0) return ax * ax * ax;
  if (q == 4.0) {
    const double s = ax * ax;
    return s * s;
  }
  if (q == 1.5) return ax * std::sqrt(ax);
  if (q == 2.5) return ax * ax * std::sqrt(ax);
  return std::pow(ax, q);
}

}  // namespace detail

/// ||x||_q, evaluated as m (sum (|x_i|/m)^q)^{1/q} with m = max |x_i| so that
/// large entries cannot overflow.
inline double lq_norm(std::span<const double> x, Exponent q) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (q.is_infinite() || m == 0.0) return m;
  const double qv = q.value();
  if (!std::isfinite(m)) return m;
  const double inv = 1.0 / m;
  double s = 0.0;
  for (double v : x) s += detail::pow_abs(std::abs(v) * inv, qv);
  if (qv == 1.0) return m * s;
  if (qv == 2.0) return m * std::sqrt(s);
  return m * std::pow(s, 1.0 / qv);
}

/// Precomputed centring for the multivariate CLT statistic
/// sqrt(n) (n^{1/p - 1/q_i} ||z||_{q_i} / M_p(q_i)^{1/q_i} - 1).
class CltStatistic {
 public:
  CltStatistic(Exponent p, std::vector<Exponent> qs) : p_(p), qs_(std::move(qs)) {
    detail::validate_clt_exponents(p_, qs_);
    log_m_.reserve(qs_.size());
    for (const auto& q : qs_) log_m_.push_back(std::log(moment(p_, q.value())) / q.value());
  }

  [[nodiscard]] Exponent p() const noexcept { return p_; }
  [[nodiscard]] const std::vector<Exponent>& qs() const noexcept { return qs_; }

  /// Norm value at which component i vanishes, for dimension n.
  [[nodiscard]] double centring_norm(std::size_t i, std::size_t n) const {
    return std::exp(log_m_.at(i) + (qs_[i].reciprocal() - p_.reciprocal()) * std::log(static_cast<double>(n)));
  }

  /// Statistic from a precomputed norm value ||z||_{q_i}.
  [[nodiscard]] double from_norm(std::size_t i, double norm, std::size_t n) const {
    const double nd = static_cast<double>(n);
    const double t = (p_.reciprocal() - qs_[i].reciprocal()) * std::log(nd) + std::log(norm) - log_m_[i];
    return std::sqrt(nd) * std::expm1(t);
  }

  void evaluate(std::span<const double> z, std::span<double> out) const {
    for (std::size_t i = 0; i < qs_.size(); ++i) out[i] = from_norm(i, lq_norm(z, qs_[i]), z.size());
  }

 private:
  Exponent p_;
  std::vector<Exponent> qs_;
  std::vector<double> log_m_;
};

inline std::vector<double> clt_statistic(const BallSample& z, Exponent p, const std::vector<Exponent>& qs) {
  if (!(z.p == p)) throw RegimeError("sample exponent " + z.p.to_string() + " does not match p = " + p.to_string());
  CltStatistic stat(p, qs);
  std::vector<double> out(qs.size());
  stat.evaluate(z.coords, out);
  return out;
}

/// n (1 - ||z||_p); converges to Exp(1) for uniform points of B_p^n.
inline double radial_statistic(const BallSample& z, Exponent p) {
  if (!(z.p == p)) throw RegimeError("radial statistic requires the sampling exponent");
  return static_cast<double>(z.dim()) * (1.0 - lq_norm(z.coords, p));
}

/// n^{1/p} ||z||_inf / c_n - a_n; converges to a standard Gumbel law.
inline double maxnorm_from_norm(double max_abs, std::size_t n, Exponent p, const GumbelNorms& norms) {
  return std::exp(p.reciprocal() * std::log(static_cast<double>(n))) * max_abs / norms.c_n - norms.a_n;
}

inline double maxnorm_statistic(const BallSample& z, Exponent p, const GumbelNorms& norms) {
  if (p.is_infinite()) throw RegimeError("max-norm statistic requires p < inf");
  return maxnorm_from_norm(lq_norm(z.coords, Exponent::infinity()), z.dim(), p, norms);
}

enum class Tail { upper, lower };

/// Streaming, mergeable accumulator of counts, means, centred cross-moments
/// and threshold exceedance counts for d-dimensional observations.
class MomentAccumulator {
 public:
  struct Threshold {
    std::size_t component = 0;
    double level = 0.0;
    Tail tail = Tail::upper;  // upper counts x > level, lower counts x <= level
    std::uint64_t count = 0;
  };

  explicit MomentAccumulator(std::size_t dim = 1) : mean_(dim, 0.0), comoment_(dim * dim, 0.0), scratch_(dim) {}

  void add_threshold(double level, std::size_t component = 0, Tail tail = Tail::upper) {
    if (count_ != 0) throw DomainError("thresholds must be registered before observing");
    if (component >= dim()) throw DomainError("threshold component out of range");
    thresholds_.push_back({component, level, tail, 0});
  }

  void observe(std::span<const double> x) {
    const std::size_t d = dim();
    ++count_;
    const double inv_n = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < d; ++i) {
      scratch_[i] = x[i] - mean_[i];
      mean_[i] += scratch_[i] * inv_n;
    }
    // Welford update of the co-moment: delta_old_i * delta_new_j.
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) comoment_[i * d + j] += scratch_[i] * (x[j] - mean_[j]);
    for (auto& t : thresholds_) {
      const double v = x[t.component];
      if (t.tail == Tail::upper ? v > t.level : v <= t.level) ++t.count;
    }
  }

  void observe(double x) { observe(std::span<const double>(&x, 1)); }

  /// Chan et al. pairwise combination; thresholds must match.
  void merge(const MomentAccumulator& other) {
    if (other.dim() != dim() || other.thresholds_.size() != thresholds_.size()) {
      throw DomainError("cannot merge accumulators of different shape");
    }
    for (std::size_t k = 0; k < thresholds_.size(); ++k) {
      const auto& a = thresholds_[k];
      const auto& b = other.thresholds_[k];
      if (a.component != b.component || a.level != b.level || a.tail != b.tail) {
        throw DomainError("cannot merge accumulators with different thresholds");
      }
    }
    if (other.count_ == 0) return;
    for (std::size_t k = 0; k < thresholds_.size(); ++k) thresholds_[k].count += other.thresholds_[k].count;
    if (count_ == 0) {
      count_ = other.count_;
      mean_ = other.mean_;
      comoment_ = other.comoment_;
      return;
    }
    const std::size_t d = dim();
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t i = 0; i < d; ++i) scratch_[i] = other.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        comoment_[i * d + j] += other.comoment_[i * d + j] + scratch_[i] * scratch_[j] * na * nb / n;
    for (std::size_t i = 0; i < d; ++i) mean_[i] += scratch_[i] * nb / n;
    count_ += other.count_;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return mean_.size(); }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] double mean(std::size_t i = 0) const { return mean_.at(i); }
  [[nodiscard]] double comoment(std::size_t i, std::size_t j) const { return comoment_.at(i * dim() + j); }

  /// Unbiased sample covariance.
  [[nodiscard]] double covariance(std::size_t i, std::size_t j) const {
    if (count_ < 2) throw DomainError("covariance needs at least two observations");
    return comoment(i, j) / static_cast<double>(count_ - 1);
  }
  [[nodiscard]] double variance(std::size_t i = 0) const { return covariance(i, i); }

  [[nodiscard]] const std::vector<Threshold>& thresholds() const noexcept { return thresholds_; }

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
  std::vector<Threshold> thresholds_;
  std::vector<double> scratch_;
};

/// log(exceed_count / count) for a registered threshold; std::nullopt when
/// no observation crossed it (the event is beyond Monte Carlo reach, not
/// impossible).
inline std::optional<double> tail_log_prob(const MomentAccumulator& acc, double level, std::size_t component = 0,
                                           Tail tail = Tail::upper) {
  for (const auto& t : acc.thresholds()) {
    if (t.level == level && t.component == component && t.tail == tail) {
      if (acc.count() == 0) throw DomainError("tail probability of an empty accumulator");
      if (t.count == 0) return std::nullopt;
      return std::log(static_cast<double>(t.count) / static_cast<double>(acc.count()));
    }
  }
  throw DomainError("threshold " + std::to_string(level) + " was not registered");
}

/// Empirical distribution function over a sorted copy of the sample.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw DomainError("ECDF of an empty sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
  [[nodiscard]] const std::vector<double>& sorted_values() const noexcept { return sorted_; }

  /// (#values <= x) / count; right-continuous.
  [[nodiscard]] double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  [[nodiscard]] double quantile(double u) const {
    const auto n = sorted_.size();
    auto k = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    return sorted_[k - 1];
  }

 private:
  std::vector<double> sorted_;
};

/// Kolmogorov-Smirnov distance sup_x |F_hat(x) - F(x)|, evaluated on both
/// sides of every jump of the ECDF.
template <class Cdf>
double ks_distance(const Ecdf& sample, Cdf&& cdf) {
  const auto& xs = sample.sorted_values();
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
    const double f = cdf(xs[i]);
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j + 1) / n;
    d = std::max({d, std::abs(at - f), std::abs(below - f)});
    i = j + 1;
  }
  return d;
}

/// KS distance against a known CDF without storing the sample: observations
/// are binned by F(x) on a fixed grid of `bins` equiprobable cells, and the
/// distance is taken over the cell edges. Underestimates the exact distance
/// by at most 1/bins.
class GridKs {
 public:
  explicit GridKs(std::size_t bins = 4096) : counts_(bins, 0) {}

  template <class Cdf>
  void observe(double x, Cdf&& cdf) {
    const double u = std::clamp(cdf(x), 0.0, 1.0);
    auto k = static_cast<std::size_t>(u * static_cast<double>(counts_.size()));
    if (k >= counts_.size()) k = counts_.size() - 1;
    ++counts_[k];
    ++total_;
  }

  void merge(const GridKs& other) {
    if (other.counts_.size() != counts_.size()) throw DomainError("grid sizes differ");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
  }

  [[nodiscard]] std::uint64_t count() const noexcept { return total_; }

  [[nodiscard]] double distance() const {
    if (total_ == 0) throw DomainError("KS distance of an empty sample");
    const auto bins = static_cast<double>(counts_.size());
    const auto n = static_cast<double>(total_);
    double d = 0.0;
    std::uint64_t cum = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      cum += counts_[k];
      d = std::max(d, std::abs(static_cast<double>(cum) / n - static_cast<double>(k + 1) / bins));
    }
    return d;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Reference CDFs used across experiments.
namespace cdf {

inline double normal(double x, double variance = 1.0) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance)); }
inline double exponential(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }
inline double gumbel(double x) { return std::exp(-std::exp(-x)); }
inline double uniform(double x, double a, double b) { return std::clamp((x - a) / (b - a), 0.0, 1.0); }

}  // namespace cdf

}  // namespace lpball
