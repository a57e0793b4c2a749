#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature for vector-valued
// integrands on finite intervals. The interval with the largest weighted
// error estimate is bisected until every component meets
// max(abs_tol, rel_tol * |I_k|) or the subdivision budget is exhausted.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace lpball {

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  int max_subdivisions = 2000;
};

template <std::size_t K>
struct QuadratureResult {
  std::array<double, K> value{};
  std::array<double, K> error{};
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {0.129484966168869693270611432679082,
                                                        0.279705391489276667901467771423780,
                                                        0.381830050505118944950369775488975,
                                                        0.417959183673469387755102040816327};

template <std::size_t K>
struct GkPanel {
  double a = 0.0;
  double b = 0.0;
  std::array<double, K> value{};
  std::array<double, K> error{};
  double priority = 0.0;

  friend bool operator<(const GkPanel& x, const GkPanel& y) { return x.priority < y.priority; }
};

template <std::size_t K, class F>
GkPanel<K> gk15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  GkPanel<K> panel;
  panel.a = a;
  panel.b = b;
  std::array<double, K> kronrod{};
  std::array<double, K> gauss{};
  const std::array<double, K> fc = f(centre);
  for (std::size_t k = 0; k < K; ++k) {
    kronrod[k] = kKronrodWeights[7] * fc[k];
    gauss[k] = kGaussWeights[3] * fc[k];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kGkNodes[j];
    const std::array<double, K> f1 = f(centre - dx);
    const std::array<double, K> f2 = f(centre + dx);
    for (std::size_t k = 0; k < K; ++k) {
      const double s = f1[k] + f2[k];
      kronrod[k] += kKronrodWeights[j] * s;
      if (j % 2 == 1) gauss[k] += kGaussWeights[j / 2] * s;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    panel.value[k] = kronrod[k] * half;
    panel.error[k] = std::abs((kronrod[k] - gauss[k]) * half);
  }
  return panel;
}

}  // namespace detail

/// Integrates f : double -> std::array<double, K> over [a, b].
template <std::size_t K, class F>
QuadratureResult<K> integrate_gk(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult<K> result;
  if (a == b) {
    result.converged = true;
    return result;
  }
  auto scaled_error = [](const detail::GkPanel<K>& p, const std::array<double, K>& total) {
    double worst = 0.0;
    for (std::size_t k = 0; k < K; ++k) worst = std::max(worst, p.error[k] / std::max(std::abs(total[k]), 1e-300));
    return worst;
  };

  std::priority_queue<detail::GkPanel<K>> heap;
  auto first = detail::gk15<K>(f, a, b);
  result.value = first.value;
  result.error = first.error;
  first.priority = scaled_error(first, result.value);
  heap.push(first);

  auto done = [&]() {
    for (std::size_t k = 0; k < K; ++k) {
      if (result.error[k] > std::max(opt.abs_tol, opt.rel_tol * std::abs(result.value[k]))) return false;
    }
    return true;
  };

  while (!done()) {
    if (result.subdivisions >= opt.max_subdivisions) return result;
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15<K>(f, worst.a, mid);
    auto right = detail::gk15<K>(f, mid, worst.b);
    for (std::size_t k = 0; k < K; ++k) {
      result.value[k] += left.value[k] + right.value[k] - worst.value[k];
      result.error[k] += left.error[k] + right.error[k] - worst.error[k];
    }
    left.priority = scaled_error(left, result.value);
    right.priority = scaled_error(right, result.value);
    heap.push(left);
    heap.push(right);
    ++result.subdivisions;
    // Re-sum occasionally so incremental updates cannot drift.
    if (result.subdivisions % 64 == 0) {
      auto copy = heap;
      result.value = {};
      result.error = {};
      while (!copy.empty()) {
        for (std::size_t k = 0; k < K; ++k) {
          result.value[k] += copy.top().value[k];
          result.error[k] += copy.top().error[k];
        }
        copy.pop();
      }
    }
  }
  result.converged = true;
  return result;
}

/// Scalar convenience wrapper.
template <class F>
QuadratureResult<1> integrate_gk_scalar(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  return integrate_gk<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, opt);
}

}  // namespace lpball
