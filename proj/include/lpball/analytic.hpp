#pragma once

// Closed-form constants for the p-generalized Gaussian law and l_p^n balls:
// absolute moments, covariances, CLT covariance matrices, ball volumes,
// intersection and Gumbel normalizing constants, and Gaussian orthant
// probabilities.
//
// All gamma-function evaluations go through log-gamma so that large
// arguments (Gamma(1 + n/p) with n ~ 1e6) never overflow.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "lpball/errors.hpp"
#include "lpball/exponent.hpp"

namespace lpball {

namespace detail {

inline double lgamma(double x) { return boost::math::lgamma(x); }

}  // namespace detail

/// M_p(r) = E|X|^r for X p-generalized Gaussian (uniform on [-1,1] for p = inf).
inline double moment(Exponent p, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("moment order must be finite and >= 0");
  if (p.is_infinite()) return 1.0 / (r + 1.0);
  const double pv = p.value();
  const double log_m = (r / pv) * std::log(pv) - std::log1p(r) + detail::lgamma(1.0 + (r + 1.0) / pv) -
                       detail::lgamma(1.0 + 1.0 / pv);
  return std::exp(log_m);
}

/// Moment with an extended order: M_inf(inf) = 0 by convention. A finite p
/// with an infinite order has no finite moment.
inline double moment(Exponent p, ExtendedReal r) {
  if (r.is_finite()) return moment(p, r.value());
  if (p.is_infinite()) return 0.0;
  throw DomainError("infinite moment order requires p = inf");
}

/// C_p(r, s) = M_p(r + s) - M_p(r) M_p(s) = Cov(|X|^r, |X|^s).
/// With p = inf and either order infinite the convention C = 0 applies.
inline double covariance_pair(Exponent p, ExtendedReal r, ExtendedReal s) {
  if (r.is_infinite() || s.is_infinite()) {
    if (p.is_infinite()) return 0.0;
    throw DomainError("infinite covariance order requires p = inf");
  }
  const double rv = r.value();
  const double sv = s.value();
  return moment(p, rv + sv) - moment(p, rv) * moment(p, sv);
}

/// Covariance matrix of the limiting Gaussian vector of the multivariate CLT
/// for (||Z||_{q_1}, ..., ||Z||_{q_d}), Z uniform in B_p^n.
struct CltCovariance {
  Exponent p = Exponent::infinity();
  std::vector<Exponent> qs;
  std::vector<double> entries;  // row-major d x d

  [[nodiscard]] std::size_t dim() const noexcept { return qs.size(); }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries.at(i * dim() + j); }

  [[nodiscard]] double min_eigenvalue() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }
};

namespace detail {

inline void validate_clt_exponents(Exponent p, std::span<const Exponent> qs) {
  if (qs.empty()) throw RegimeError("at least one q is required");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (qs[i].is_infinite()) throw RegimeError("the CLT requires finite q, got q = inf");
    if (qs[i] == p) {
      throw RegimeError("q = p = " + p.to_string() +
                        " is the exponential regime; use the radial statistic n(1 - ||Z||_p) instead");
    }
    if (i > 0 && !(qs[i - 1] < qs[i])) throw RegimeError("qs must be strictly increasing");
  }
}

// c_ij through the covariances C_p; used as an independent route to the
// closed gamma form.
inline double clt_entry_composition(Exponent p, double qi, double qj) {
  const double mi = moment(p, qi);
  const double mj = moment(p, qj);
  double c = covariance_pair(p, qi, qj) / (qi * qj * mi * mj);
  if (p.is_finite()) {
    const double pv = p.value();
    c += covariance_pair(p, pv, pv) / (pv * pv);
    c -= (covariance_pair(p, qi, pv) / (qi * mi) + covariance_pair(p, qj, pv) / (qj * mj)) / pv;
  }
  return c;
}

inline double clt_entry_gamma(Exponent p, double qi, double qj) {
  if (p.is_infinite()) return 1.0 / (qi + qj + 1.0);
  const double pv = p.value();
  const double log_ratio = lgamma(1.0 / pv) + lgamma((qi + qj + 1.0) / pv) - lgamma((qi + 1.0) / pv) -
                           lgamma((qj + 1.0) / pv);
  return std::expm1(log_ratio) / (qi * qj) - 1.0 / pv;
}

template <class Entry>
CltCovariance build_clt_covariance(Exponent p, std::span<const Exponent> qs, Entry entry) {
  validate_clt_exponents(p, qs);
  CltCovariance out;
  out.p = p;
  out.qs.assign(qs.begin(), qs.end());
  const std::size_t d = qs.size();
  out.entries.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double c = entry(p, qs[i].value(), qs[j].value());
      out.entries[i * d + j] = c;
      out.entries[j * d + i] = c;
    }
  }
  return out;
}

}  // namespace detail

/// Covariance matrix (c_ij) from the closed gamma-function form.
inline CltCovariance clt_covariance(Exponent p, std::span<const Exponent> qs) {
  return detail::build_clt_covariance(p, qs, detail::clt_entry_gamma);
}

/// Same matrix assembled from M_p and C_p; kept as a cross-check of the
/// gamma form.
inline CltCovariance clt_covariance_composition(Exponent p, std::span<const Exponent> qs) {
  return detail::build_clt_covariance(p, qs, detail::clt_entry_composition);
}

/// log vol_n(B_p^n) = n log(2 Gamma(1 + 1/p)) - log Gamma(1 + n/p).
inline double log_ball_volume(Exponent p, long long n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  const auto nd = static_cast<double>(n);
  if (p.is_infinite()) return nd * std::numbers::ln2;
  const double pv = p.value();
  return nd * (std::numbers::ln2 + detail::lgamma(1.0 + 1.0 / pv)) - detail::lgamma(1.0 + nd / pv);
}

struct IntersectionConstants {
  double m_pq = 0.0;        // M_p(q)^{1/q}
  double c_pn = 0.0;        // n^{1/p} vol_n(B_p^n)^{1/n}
  double c_qn = 0.0;        // n^{1/q} vol_n(B_q^n)^{1/n}
  double c_p_limit = 0.0;   // lim c_{p,n}
  double a_pqn = 0.0;       // c_pn / (m_pq c_qn)
  double a_pq_limit = 0.0;  // lim a_pqn, closed form
  double log_scale_p = 0.0;  // -log vol_n(B_p^n) / n, the D_p^n scale factor (log)
  double log_scale_q = 0.0;
};

namespace detail {

inline double scaled_volume_radius(Exponent p, long long n) {
  const auto nd = static_cast<double>(n);
  return std::exp(p.reciprocal() * std::log(nd) + log_ball_volume(p, n) / nd);
}

inline double scaled_volume_radius_limit(Exponent p) {
  if (p.is_infinite()) return 2.0;
  const double pv = p.value();
  return 2.0 * std::exp(1.0 / pv + std::log(pv) / pv + lgamma(1.0 + 1.0 / pv));
}

}  // namespace detail

/// m_{p,q}, c_{p,n}, A_{p,q,n} and their limits for the intersection
/// D_p^n cap t D_q^n of volume-normalized balls.
inline IntersectionConstants intersection_constants(Exponent p, Exponent q, long long n) {
  if (q.is_infinite()) throw RegimeError("intersection constants require q < inf");
  if (p == q) throw RegimeError("intersection constants require p != q");
  if (n < 1) throw DomainError("dimension must be >= 1");
  const double qv = q.value();
  IntersectionConstants c;
  c.m_pq = std::pow(moment(p, qv), 1.0 / qv);
  c.c_pn = detail::scaled_volume_radius(p, n);
  c.c_qn = detail::scaled_volume_radius(q, n);
  c.c_p_limit = detail::scaled_volume_radius_limit(p);
  c.a_pqn = c.c_pn / (c.m_pq * c.c_qn);
  c.log_scale_p = -log_ball_volume(p, n) / static_cast<double>(n);
  c.log_scale_q = -log_ball_volume(q, n) / static_cast<double>(n);
  if (p.is_infinite()) {
    c.a_pq_limit = std::exp(std::log((qv + 1.0) / (qv * std::numbers::e)) / qv - detail::lgamma(1.0 + 1.0 / qv));
  } else {
    const double pv = p.value();
    const double log_a = (1.0 + 1.0 / qv) * detail::lgamma(1.0 + 1.0 / pv) - detail::lgamma(1.0 + 1.0 / qv) -
                         detail::lgamma((qv + 1.0) / pv) / qv + 1.0 / pv - 1.0 / qv + std::log(pv / qv) / qv;
    c.a_pq_limit = std::exp(log_a);
  }
  return c;
}

/// Normalizing constants for the max-norm (Gumbel) limit.
///
/// With L = p log n, c_n = L^{1/p - 1} and
/// d_n = L^{1/p} + (1/p) L^{1/p-1} ((1-p) log L + p log K),
/// (max_i |Y_i| - d_n) / c_n converges to a standard Gumbel law. The offset
/// subtracted from n^{1/p} ||Z||_inf / c_n is a_n = d_n / c_n.
struct GumbelNorms {
  double c_n = 0.0;
  double d_n = 0.0;
  double a_n = 0.0;
  double k = 0.0;
};

inline GumbelNorms gumbel_norms(Exponent p, long long n) {
  if (p.is_infinite()) throw RegimeError("the Gumbel limit requires p < inf");
  if (n < 2) throw DomainError("the Gumbel normalization requires n >= 2");
  const double pv = p.value();
  const double big_l = pv * std::log(static_cast<double>(n));
  const double log_k = -std::log(pv) / pv - detail::lgamma(1.0 + 1.0 / pv);
  GumbelNorms g;
  g.k = std::exp(log_k);
  g.c_n = std::pow(big_l, 1.0 / pv - 1.0);
  const double correction = ((1.0 - pv) * std::log(big_l) + pv * log_k) / pv;
  g.d_n = std::pow(big_l, 1.0 / pv) + correction * g.c_n;
  // d_n / c_n written without the division so that p = 1 is exact.
  g.a_n = big_l + correction;
  return g;
}

/// Variance sigma_q^2 of the Gaussian limit of the centred projection length
/// vol_1(P_theta B_q^n) for theta uniform on the sphere.
inline double projection_variance(Exponent q) {
  if (q.is_finite() && (q.value() <= 1.0 || q.value() == 2.0)) {
    throw RegimeError("projection variance requires q in (1, inf], q != 2");
  }
  const double qs = q.conjugate().value();
  const double log_ratio = 0.5 * std::log(std::numbers::pi) + detail::lgamma((2.0 * qs + 1.0) / 2.0) -
                           2.0 * detail::lgamma((qs + 1.0) / 2.0);
  return std::expm1(log_ratio) / (qs * qs) - 0.5;
}

/// P(N1 <= 0, N2 <= 0) for a centred Gaussian pair with covariance
/// [[c11, c12], [c12, c22]]: 1/4 + asin(rho) / (2 pi).
inline double quadrant_probability(double c11, double c12, double c22) {
  if (!(c11 > 0.0) || !(c22 > 0.0)) throw DomainError("variances must be positive");
  const double bound = std::sqrt(c11 * c22);
  if (!(std::abs(c12) <= bound * (1.0 + 1e-12))) throw DomainError("|c12| exceeds sqrt(c11 c22)");
  const double rho = std::clamp(c12 / bound, -1.0, 1.0);
  return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
}

}  // namespace lpball
