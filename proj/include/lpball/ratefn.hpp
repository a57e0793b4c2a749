#pragma once

// Large-deviation rate functions for n^{1/p - 1/q} ||Z||_q, Z uniform in
// B_p^n, in every (p, q) regime, together with the numerical machinery they
// need: the joint cumulant generating function of (|Y|^q, |Y|^p) for a
// p-generalized Gaussian Y, and its Legendre-Fenchel transform.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "lpball/analytic.hpp"
#include "lpball/errors.hpp"
#include "lpball/exponent.hpp"
#include "lpball/quadrature.hpp"

namespace lpball {

/// Value, gradient and Hessian (h11, h12, h22) of a bivariate CGF.
struct CgfDerivatives {
  double value = 0.0;
  std::array<double, 2> gradient{};
  std::array<double, 3> hessian{};
};

/// Lambda(t1, t2) = log E exp(t1 |Y|^q + t2 |Y|^p), Y p-generalized Gaussian,
/// for 1 <= q <= p < inf. Effective domain: t2 < 1/p if q < p, t1 + t2 < 1/p
/// if q = p. For q < p the boundary ray {t2 = 1/p, t1 < 0} is also finite and
/// is accepted, since the transform can attain its supremum there.
class Cgf {
 public:
  Cgf(Exponent p, Exponent q, QuadratureOptions quadrature = {1e-300, 1e-12, 4000}) : quad_(quadrature) {
    if (p.is_infinite() || q.is_infinite()) throw RegimeError("the joint CGF needs finite p and q");
    if (q > p) throw RegimeError("the joint CGF is finite near 0 only for q <= p");
    p_ = p.value();
    q_ = q.value();
    log_norm_ = std::log(p_) / p_ + detail::lgamma(1.0 + 1.0 / p_);
  }

  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double q() const noexcept { return q_; }
  [[nodiscard]] const QuadratureOptions& quadrature() const noexcept { return quad_; }

  [[nodiscard]] bool in_domain(double t1, double t2) const noexcept {
    if (!std::isfinite(t1) || !std::isfinite(t2)) return false;
    if (q_ == p_) return t1 + t2 < 1.0 / p_;
    // On the line t2 = 1/p the integrand still decays when t1 < 0.
    return t2 < 1.0 / p_ || (t2 == 1.0 / p_ && t1 < 0.0);
  }

  /// +inf outside the effective domain.
  [[nodiscard]] ExtendedReal operator()(double t1, double t2) const {
    if (!in_domain(t1, t2)) return ExtendedReal::infinity();
    return integrate<1>(t1, t2).value;
  }

  [[nodiscard]] std::optional<CgfDerivatives> derivatives(double t1, double t2) const {
    if (!in_domain(t1, t2)) return std::nullopt;
    return integrate<6>(t1, t2);
  }

  /// (x, y) outside the interior of the convex hull of the support of
  /// (|Y|^q, |Y|^p), where the conjugate is +inf.
  [[nodiscard]] bool outside_support(double x, double y) const noexcept {
    if (!(x > 0.0) || !(y > 0.0)) return true;
    if (q_ == p_) return x != y;
    return y <= std::pow(x, p_ / q_);
  }

 private:
  // Integrates moments of s^q and s^p against exp(phi(s)), phi(s) = t1 s^q +
  // (t2 - 1/p) s^p on (0, inf), after removing the peak value of phi.
  template <std::size_t K>
  CgfDerivatives integrate(double t1, double t2) const {
    const bool same = q_ == p_;
    const double b = same ? (t1 + t2 - 1.0 / p_) : (t2 - 1.0 / p_);  // < 0
    const double a = same ? 0.0 : t1;
    auto phi = [&](double s) { return a * std::pow(s, q_) + b * std::pow(s, p_); };

    double peak = 0.0;
    if (a > 0.0 && q_ < p_) peak = std::pow(q_ * a / (-b * p_), 1.0 / (p_ - q_));
    const double phi_max = phi(peak);

    // Start from the narrower of the two decay scales so that a sharp spike
    // at the origin is not missed by the first panel.
    double upper = b < 0.0 ? std::pow(-b, -1.0 / p_) : std::numeric_limits<double>::infinity();
    if (a < 0.0) upper = std::min(upper, std::pow(-a, -1.0 / q_));
    upper = std::max(upper, 2.0 * peak);
    while (phi(upper) - phi_max > -60.0) upper *= 2.0;

    auto integrand = [&](double s) {
      std::array<double, K> out{};
      const double sq = std::pow(s, q_);
      const double sp = same ? sq : std::pow(s, p_);
      const double w = std::exp(a * sq + b * sp - phi_max);
      out[0] = w;
      if constexpr (K == 6) {
        out[1] = w * sq;
        out[2] = w * sp;
        out[3] = w * sq * sq;
        out[4] = w * sq * sp;
        out[5] = w * sp * sp;
      }
      return out;
    };

    std::array<double, K> total{};
    auto accumulate = [&](double lo, double hi) {
      if (hi <= lo) return;
      const auto r = integrate_gk<K>(integrand, lo, hi, quad_);
      for (std::size_t k = 0; k < K; ++k) total[k] += r.value[k];
    };
    accumulate(0.0, peak);
    accumulate(peak, upper);

    CgfDerivatives d;
    d.value = phi_max + std::log(total[0]) - log_norm_;
    if constexpr (K == 6) {
      const double m1 = total[1] / total[0];
      const double m2 = total[2] / total[0];
      d.gradient = {m1, m2};
      d.hessian = {total[3] / total[0] - m1 * m1, total[4] / total[0] - m1 * m2, total[5] / total[0] - m2 * m2};
    }
    return d;
  }

  double p_ = 2.0;
  double q_ = 1.0;
  double log_norm_ = 0.0;
  QuadratureOptions quad_;
};

inline ExtendedReal cgf_eval(const Cgf& c, double t1, double t2) { return c(t1, t2); }

struct ConjugateOptions {
  int max_iterations = 500;
  double divergence_level = 1e6;
  double gradient_tol = 1e-10;
  // Stop once the Newton decrement (predicted remaining gain) falls below this.
  double decrement_tol = 1e-16;
};

/// Value and first two derivatives of a function of one variable.
struct Derivatives1 {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

namespace detail {

// sup_t t z - G(t) for a one-dimensional convex G by damped Newton from
// `start`. G reports points outside its domain with a non-finite value.
template <class G>
ExtendedReal conjugate1(G&& g, double z, const ConjugateOptions& opt, double start = 0.0, double* argmax = nullptr) {
  double t = start;
  Derivatives1 d = g(t);
  double objective = t * z - d.value;
  auto finish = [&]() -> ExtendedReal {
    if (argmax) *argmax = t;
    return objective;
  };
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double grad = z - d.first;
    if (std::abs(grad) <= opt.gradient_tol * (1.0 + std::abs(z))) return finish();
    const double step = d.second > 0.0 ? grad / d.second : grad;
    if (d.second > 0.0 && step * grad <= opt.decrement_tol) return finish();
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 80; ++k, alpha *= 0.5) {
      const double cand = t + alpha * step;
      if (std::abs(cand - t) <= 1e-15 * (1.0 + std::abs(t))) break;
      const Derivatives1 dc = g(cand);
      if (!std::isfinite(dc.value)) continue;
      const double obj = cand * z - dc.value;
      if (obj >= objective + 1e-4 * alpha * step * grad || (std::abs(alpha * step * grad) < 1e-15 && obj >= objective)) {
        t = cand;
        d = dc;
        objective = obj;
        moved = true;
        break;
      }
    }
    if (objective > opt.divergence_level) return ExtendedReal::infinity();
    if (!moved) return finish();
  }
  throw NonConvergence("one-dimensional Legendre transform did not converge", objective);
}

}  // namespace detail

/// sup_t <t, (x, y)> - Lambda(t) by damped Newton from t = 0 with
/// backtracking that keeps iterates inside the effective domain.
///
/// `Lambda` must provide `derivatives(t1, t2) -> std::optional<CgfDerivatives>`
/// (nullopt outside the domain) and `outside_support(x, y)`. Returns +inf
/// when the point is outside the support hull or the objective grows past
/// `divergence_level`; throws NonConvergence when the iteration budget runs
/// out first.
template <class Lambda>
ExtendedReal conjugate2(const Lambda& cgf, double x, double y, const ConjugateOptions& opt = {},
                        std::array<double, 2>* argmax = nullptr) {
  if (cgf.outside_support(x, y)) return ExtendedReal::infinity();
  std::array<double, 2> t{0.0, 0.0};
  auto d = cgf.derivatives(t[0], t[1]);
  if (!d) throw DomainError("the origin must be inside the CGF domain");
  double objective = -d->value;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double g1 = x - d->gradient[0];
    const double g2 = y - d->gradient[1];
    const double scale = 1.0 + std::abs(x) + std::abs(y);
    if (std::hypot(g1, g2) <= opt.gradient_tol * scale) {
      if (argmax) *argmax = t;
      return std::max(objective, 0.0);
    }
    const auto [h11, h12, h22] = d->hessian;
    const double det = h11 * h22 - h12 * h12;
    std::array<double, 2> step{g1, g2};
    if (det > 1e-300 && h11 > 0.0) step = {(h22 * g1 - h12 * g2) / det, (h11 * g2 - h12 * g1) / det};
    double slope = g1 * step[0] + g2 * step[1];
    if (det > 1e-300 && h11 > 0.0 && slope > 0.0 && slope <= opt.decrement_tol) {
      if (argmax) *argmax = t;
      return std::max(objective, 0.0);
    }
    if (!(slope > 0.0)) {
      step = {g1, g2};
      slope = g1 * g1 + g2 * g2;
    }
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 80; ++k, alpha *= 0.5) {
      const std::array<double, 2> cand{t[0] + alpha * step[0], t[1] + alpha * step[1]};
      if (std::abs(cand[0] - t[0]) + std::abs(cand[1] - t[1]) <= 1e-15 * (1.0 + std::abs(t[0]) + std::abs(t[1]))) break;
      auto dc = cgf.derivatives(cand[0], cand[1]);
      if (!dc || !std::isfinite(dc->value)) continue;
      const double obj = cand[0] * x + cand[1] * y - dc->value;
      if (obj >= objective + 1e-4 * alpha * slope || (alpha * slope < 1e-15 * scale && obj >= objective)) {
        t = cand;
        d = dc;
        objective = obj;
        moved = true;
        break;
      }
    }
    if (objective > opt.divergence_level) return ExtendedReal::infinity();
    if (!moved) {
      // No ascent possible at machine precision: the iterate is optimal.
      if (argmax) *argmax = t;
      return std::max(objective, 0.0);
    }
  }
  throw NonConvergence("Legendre transform did not converge", objective);
}

namespace detail {

// sup over t1 of t1 x - Lambda(t1, t2) at fixed t2, with the derivatives of
// Lambda at the maximizer.
struct SliceSolution {
  double t1 = 0.0;
  double value = 0.0;
  CgfDerivatives at{};
};

inline SliceSolution solve_slice(const Cgf& c, double x, double t2, double start, const ConjugateOptions& opt) {
  auto g = [&](double t1) {
    Derivatives1 out;
    const auto d = c.derivatives(t1, t2);
    if (!d) {
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value = d->value;
    out.first = d->gradient[0];
    out.second = d->hessian[0];
    return out;
  };
  SliceSolution s;
  if (!c.in_domain(start, t2)) start = -1.0;
  const ExtendedReal v = conjugate1(g, x, opt, start, &s.t1);
  if (v.is_infinite()) throw NonConvergence("inner transform diverged inside the support", opt.divergence_level);
  s.value = v.value();
  s.at = *c.derivatives(s.t1, t2);
  return s;
}

}  // namespace detail

/// Lambda*(x, y) for the joint CGF.
///
/// For q < p the supremum is taken as a concave one-dimensional problem in
/// t2 over (-inf, 1/p], each value being itself a one-dimensional transform
/// in t1. The derivative in t2 is y - dLambda/dt2 at the inner maximizer, and
/// the second derivative is minus the Schur complement of the Hessian. The
/// supremum may sit on the edge t2 = 1/p, where Lambda is still finite for
/// t1 < 0. The degenerate q = p case reduces to a transform along x = y.
inline ExtendedReal legendre2(const Cgf& c, double x, double y, const ConjugateOptions& opt = {}) {
  if (c.outside_support(x, y)) return ExtendedReal::infinity();
  if (c.q() == c.p()) {
    // Lambda depends on t1 + t2 only; optimize along t1 = 0.
    struct Line {
      const Cgf* cgf;
      std::optional<CgfDerivatives> derivatives(double t1, double t2) const {
        auto d = cgf->derivatives(0.0, t1 + t2);
        if (d) {
          d->gradient = {d->gradient[1], 0.0};
          d->hessian = {d->hessian[2], 0.0, 1.0};
        }
        return d;
      }
      bool outside_support(double u, double) const { return !(u > 0.0); }
    };
    return conjugate2(Line{&c}, x, 0.0, opt);
  }

  struct Point {
    double t2;
    double value;
    double slope;
    double curvature;
    double t1;
  };
  auto evaluate = [&](double t2, double start) {
    const auto s = detail::solve_slice(c, x, t2, start, opt);
    const auto& h = s.at.hessian;
    const double schur = h[0] > 0.0 ? h[2] - h[1] * h[1] / h[0] : h[2];
    return Point{t2, t2 * y + s.value, y - s.at.gradient[1], -schur, s.t1};
  };

  const double edge = 1.0 / c.p();
  const Point at_edge = evaluate(edge, -1.0);
  if (at_edge.slope >= 0.0) return std::max(at_edge.value, 0.0);

  const double scale = 1.0 + std::abs(y);
  double hi = edge;
  double lo = -std::numeric_limits<double>::infinity();
  Point cur = evaluate(0.0, 0.0);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (std::abs(cur.slope) <= opt.gradient_tol * scale) return std::max(cur.value, 0.0);
    if (cur.curvature < 0.0 && -cur.slope * cur.slope / cur.curvature <= opt.decrement_tol) return std::max(cur.value, 0.0);
    if (cur.slope > 0.0) lo = cur.t2; else hi = cur.t2;
    if (hi - lo <= 1e-15 * (1.0 + std::abs(hi))) return std::max(cur.value, 0.0);
    double next = cur.curvature < 0.0 ? cur.t2 - cur.slope / cur.curvature : cur.t2 + (cur.slope > 0.0 ? 1.0 : -1.0);
    if (!std::isfinite(lo)) {
      next = std::max(next, cur.t2 - std::max(1.0, 2.0 * std::abs(cur.t2)));
      if (next >= hi) next = 0.5 * (cur.t2 + hi);
    } else if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    cur = evaluate(next, cur.t1);
    if (cur.value > opt.divergence_level) return ExtendedReal::infinity();
  }
  throw NonConvergence("Legendre transform did not converge", cur.value);
}

enum class Regime { p_gt_q, p_lt_q, p_eq_q, p_infty_q_finite, p_infty_q_infty };

inline const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::p_gt_q: return "p_gt_q";
    case Regime::p_lt_q: return "p_lt_q";
    case Regime::p_eq_q: return "p_eq_q";
    case Regime::p_infty_q_finite: return "p_infty_q_finite";
    case Regime::p_infty_q_infty: return "p_infty_q_infty";
  }
  return "unknown";
}

/// A rate function I with its speed n^{speed_exponent}. `zero()` is the
/// law-of-large-numbers point of the statistic the rate belongs to.
class RateFunction {
 public:
  using Evaluator = std::function<ExtendedReal(double)>;

  RateFunction(Regime regime, double speed_exponent, Exponent p, Exponent q, double zero, Evaluator eval)
      : regime_(regime), speed_exponent_(speed_exponent), p_(p), q_(q), zero_(zero), eval_(std::move(eval)) {}

  [[nodiscard]] Regime regime() const noexcept { return regime_; }
  [[nodiscard]] double speed_exponent() const noexcept { return speed_exponent_; }
  [[nodiscard]] Exponent p() const noexcept { return p_; }
  [[nodiscard]] Exponent q() const noexcept { return q_; }
  [[nodiscard]] double zero() const noexcept { return zero_; }

  [[nodiscard]] ExtendedReal operator()(double z) const { return eval_(z); }
  [[nodiscard]] ExtendedReal eval(double z) const { return eval_(z); }

 private:
  Regime regime_;
  double speed_exponent_;
  Exponent p_;
  Exponent q_;
  double zero_;
  Evaluator eval_;
};

/// n^{speed_exponent}.
inline double speed(const RateFunction& r, long long n) {
  return std::pow(static_cast<double>(n), r.speed_exponent());
}

namespace detail {

// Golden-section minimization of a unimodal function on [lo, hi]. Returns
// (argmin, min). +inf values compare above every finite value.
template <class F>
std::pair<double, ExtendedReal> golden_min(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  ExtendedReal f1 = f(x1);
  ExtendedReal f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Minimizes f over [lo, hi] starting from `start`: walks downhill with
// growing steps until the value rises, then refines the bracket by golden
// section.
template <class F>
std::pair<double, ExtendedReal> bracket_and_minimize(F&& f, double start, double lo, double hi, double step,
                                                     double tol) {
  double x0 = std::clamp(start, lo, hi);
  ExtendedReal f0 = f(x0);
  double dir = 1.0;
  double x1 = std::min(hi, x0 + step);
  ExtendedReal f1 = f(x1);
  if (f1 > f0) {
    dir = -1.0;
    x1 = std::max(lo, x0 - step);
    f1 = f(x1);
    if (f1 > f0 || x1 == x0) {
      const double a = std::max(lo, x0 - step);
      const double b = std::min(hi, x0 + step);
      auto best = golden_min(f, a, b, tol);
      return best.second <= f0 ? best : std::pair{x0, f0};
    }
  }
  // f1 <= f0: keep going in direction dir.
  double prev = x0;
  double h = step;
  for (;;) {
    h *= 2.0;
    const double x2 = std::clamp(x1 + dir * h, lo, hi);
    const ExtendedReal f2 = f(x2);
    if (f2 > f1 || x2 == x1) {
      const double a = std::min(prev, x2);
      const double b = std::max(prev, x2);
      auto best = golden_min(f, a, b, tol);
      return best.second <= f1 ? best : std::pair{x1, f1};
    }
    prev = x1;
    x1 = x2;
    f1 = f2;
  }
}

}  // namespace detail

/// Options for the nested minimization of the p > q rate function.
struct NestedRateOptions {
  double y_lo = 1e-6;
  double y_hi = 1e6;
  double tol = 1e-8;
  ConjugateOptions conjugate{};
};

/// I_2(z) = inf { Lambda*(x, y) : x^{1/q} y^{-1/p} = z } for the joint CGF,
/// computed as a one-dimensional minimization over log y with
/// x = (z y^{1/p})^q.
inline ExtendedReal ratio_rate(const Cgf& c, double z, const NestedRateOptions& opt = {}) {
  if (!(z > 0.0) || z >= 1.0) return ExtendedReal::infinity();
  const double p = c.p();
  const double q = c.q();
  auto objective = [&](double log_y) {
    const double y = std::exp(log_y);
    const double x = std::pow(z, q) * std::exp(q * log_y / p);
    return legendre2(c, x, y, opt.conjugate);
  };
  return detail::bracket_and_minimize(objective, 0.0, std::log(opt.y_lo), std::log(opt.y_hi), 0.25, opt.tol).second;
}

/// Rate function for 1 <= q < p < inf, speed n:
/// I(z) = inf_{z = z1 z2} [-log z1 + I_2(z2)] over z1 in (0, 1].
inline RateFunction rate_p_gt_q(Exponent p, Exponent q, NestedRateOptions opt = {}) {
  if (p.is_infinite() || q.is_infinite() || !(q < p)) throw RegimeError("rate_p_gt_q requires 1 <= q < p < inf");
  auto cgf = std::make_shared<const Cgf>(p, q);
  const double m = std::pow(moment(p, q.value()), 1.0 / q.value());
  auto eval = [cgf, m, opt](double z) -> ExtendedReal {
    if (!(z > 0.0) || z >= 1.0) return ExtendedReal::infinity();
    if (z >= m) return ratio_rate(*cgf, z, opt);
    // Split z = z1 z2 with w = log z1 in [log z, 0].
    auto total = [&](double w) { return ExtendedReal(-w) + ratio_rate(*cgf, z * std::exp(-w), opt); };
    const auto best = detail::golden_min(total, std::log(z), 0.0, opt.tol);
    const ExtendedReal at_one = ratio_rate(*cgf, z, opt);
    return std::min(best.second, at_one, [](const ExtendedReal& a, const ExtendedReal& b) { return a < b; });
  };
  return RateFunction(Regime::p_gt_q, 1.0, p, q, m, std::move(eval));
}

/// Rate function for 1 <= p < q < inf, speed n^{p/q}:
/// I(z) = (1/p) (z^q - M_p(q))^{p/q} for z >= M_p(q)^{1/q}.
inline RateFunction rate_p_lt_q(Exponent p, Exponent q) {
  if (p.is_infinite() || q.is_infinite() || !(p < q)) throw RegimeError("rate_p_lt_q requires 1 <= p < q < inf");
  const double pv = p.value();
  const double qv = q.value();
  const double mq = moment(p, qv);
  const double zero = std::pow(mq, 1.0 / qv);
  auto eval = [pv, qv, mq, zero](double z) -> ExtendedReal {
    if (!(z >= zero)) return ExtendedReal::infinity();
    if (z == zero) return 0.0;
    return std::pow(std::max(std::pow(z, qv) - mq, 0.0), pv / qv) / pv;
  };
  return RateFunction(Regime::p_lt_q, pv / qv, p, q, zero, std::move(eval));
}

/// Rate function of ||Z||_p itself (q = p, including p = q = inf), speed n:
/// I(z) = -log z on (0, 1].
inline RateFunction rate_p_eq_q(Exponent p) {
  auto eval = [](double z) -> ExtendedReal {
    if (!(z > 0.0) || z > 1.0) return ExtendedReal::infinity();
    return -std::log(z);
  };
  return RateFunction(p.is_infinite() ? Regime::p_infty_q_infty : Regime::p_eq_q, 1.0, p, p, 1.0, std::move(eval));
}

/// log J(t) with J(t) = (1/2) int_{-1}^{1} exp(t |s|^q) ds, plus its first two
/// derivatives.
using LogMgfUniformPower = Derivatives1;

inline LogMgfUniformPower log_mgf_uniform_power(double q, double t, const QuadratureOptions& quad = {1e-300, 1e-12, 4000}) {
  const double peak = t > 0.0 ? t : 0.0;
  auto integrand = [&](double s) {
    const double sq = std::pow(s, q);
    const double w = std::exp(t * sq - peak);
    return std::array<double, 3>{w, w * sq, w * sq * sq};
  };
  const auto r = integrate_gk<3>(integrand, 0.0, 1.0, quad);
  LogMgfUniformPower out;
  out.value = peak + std::log(r.value[0]);
  out.first = r.value[1] / r.value[0];
  out.second = r.value[2] / r.value[0] - out.first * out.first;
  return out;
}

/// Which statistic a p = inf rate function is expressed in.
enum class RateScale {
  power_mean,  // S_n = n^{-1} ||Z||_q^q = (1/n) sum |U_i|^q, zero at 1/(q+1)
  norm,        // n^{-1/q} ||Z||_q = S_n^{1/q}, zero at (1/(q+1))^{1/q}
};

/// Whether the transform is taken of log J (the cumulant generating function)
/// or of J itself.
enum class ConjugateOf { log_mgf, mgf };

struct PInftyRateOptions {
  RateScale scale = RateScale::power_mean;
  ConjugateOf conjugate_of = ConjugateOf::log_mgf;
  ConjugateOptions conjugate{};
};


/// Rate function for p = inf and 1 <= q < inf, speed n: the Legendre
/// transform of log J evaluated at the statistic (see RateScale).
///
/// `ConjugateOf::mgf` transforms J instead of log J. That variant is not a
/// rate function (it is negative at the mean) and exists for comparison only.
inline RateFunction rate_p_infty(Exponent q, PInftyRateOptions opt = {}) {
  if (q.is_infinite()) throw RegimeError("rate_p_infty requires q < inf; use rate_p_eq_q for q = inf");
  const double qv = q.value();
  const double mean = 1.0 / (qv + 1.0);
  const double zero = opt.scale == RateScale::norm ? std::pow(mean, 1.0 / qv) : mean;
  auto eval = [qv, opt](double z) -> ExtendedReal {
    if (!(z > 0.0)) return ExtendedReal::infinity();
    const double x = opt.scale == RateScale::norm ? std::pow(z, qv) : z;
    if (opt.conjugate_of == ConjugateOf::log_mgf) {
      // |U|^q lives in [0, 1]; the transform is +inf outside (0, 1).
      if (x >= 1.0) return ExtendedReal::infinity();
      return detail::conjugate1([qv](double t) { return log_mgf_uniform_power(qv, t); }, x, opt.conjugate);
    }
    auto mgf = [qv](double t) {
      const auto l = log_mgf_uniform_power(qv, t);
      LogMgfUniformPower j;
      j.value = std::exp(l.value);
      j.first = j.value * l.first;
      j.second = j.value * (l.second + l.first * l.first);
      return j;
    };
    return detail::conjugate1(mgf, x, opt.conjugate);
  };
  return RateFunction(Regime::p_infty_q_finite, 1.0, Exponent::infinity(), q, zero, std::move(eval));
}

/// Dispatches on the (p, q) regime.
inline RateFunction rate_function(Exponent p, Exponent q) {
  if (p == q) return rate_p_eq_q(p);
  if (p.is_infinite()) return rate_p_infty(q);
  if (q.is_infinite()) throw RegimeError("no rate function is provided for p < inf, q = inf");
  return q < p ? rate_p_gt_q(p, q) : rate_p_lt_q(p, q);
}

}  // namespace lpball
