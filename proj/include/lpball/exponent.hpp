#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lpball/errors.hpp"

namespace lpball {

/// An exponent p in [1, inf]. Infinity is a separate tag; every formula that
/// depends on p branches on `is_infinite()` rather than on a large float.
class Exponent {
 public:
  static Exponent finite(double value) {
    if (!(value >= 1.0) || !std::isfinite(value)) {
      throw DomainError("exponent must be a finite value >= 1, got " + std::to_string(value));
    }
    return Exponent(value, false);
  }

  static constexpr Exponent infinity() noexcept { return Exponent(0.0, true); }

  [[nodiscard]] constexpr bool is_infinite() const noexcept { return infinite_; }
  [[nodiscard]] constexpr bool is_finite() const noexcept { return !infinite_; }

  /// The numeric value. Only meaningful for finite exponents.
  [[nodiscard]] double value() const {
    if (infinite_) throw RegimeError("value() requested for the infinite exponent");
    return value_;
  }

  /// 1/p with the convention 1/inf = 0.
  [[nodiscard]] constexpr double reciprocal() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

  /// Conjugate exponent p* with 1/p + 1/p* = 1. Requires p > 1 (or p = inf).
  [[nodiscard]] Exponent conjugate() const {
    if (infinite_) return finite(1.0);
    if (value_ == 1.0) return infinity();
    return finite(value_ / (value_ - 1.0));
  }

  friend constexpr bool operator==(const Exponent& a, const Exponent& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

  friend constexpr std::partial_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
    if (a.infinite_ || b.infinite_) {
      if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
      return a.infinite_ ? std::partial_ordering::greater : std::partial_ordering::less;
    }
    return a.value_ <=> b.value_;
  }

  [[nodiscard]] std::string to_string() const {
    if (infinite_) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const Exponent& e) { return os << e.to_string(); }

 private:
  constexpr Exponent(double v, bool inf) noexcept : value_(v), infinite_(inf) {}

  double value_;
  bool infinite_;
};

/// Parses a decimal literal or the token `inf`.
inline Exponent parse_exponent(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") return Exponent::infinity();
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("cannot parse exponent '" + std::string(text) + "'");
  }
  return Exponent::finite(v);
}

/// Comma-separated list of exponents, e.g. "1,2" or "1.5,inf".
inline std::vector<Exponent> parse_exponent_list(std::string_view text) {
  std::vector<Exponent> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_exponent(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

/// A real number or +inf, with infinity carried as a tag. Used for rate
/// function values and moment orders where +inf is a legitimate answer.
class ExtendedReal {
 public:
  constexpr ExtendedReal(double v) noexcept : value_(v), infinite_(false) {}  // NOLINT(implicit)

  static constexpr ExtendedReal infinity() noexcept { return ExtendedReal(Tag{}); }

  [[nodiscard]] constexpr bool is_infinite() const noexcept { return infinite_; }
  [[nodiscard]] constexpr bool is_finite() const noexcept { return !infinite_; }

  [[nodiscard]] double value() const {
    if (infinite_) throw RegimeError("value() requested for +inf");
    return value_;
  }

  /// Finite value or `fallback` for +inf; for printing and plotting only.
  [[nodiscard]] constexpr double value_or(double fallback) const noexcept {
    return infinite_ ? fallback : value_;
  }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) noexcept {
    if (a.infinite_ || b.infinite_) {
      if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
      return a.infinite_ ? std::partial_ordering::greater : std::partial_ordering::less;
    }
    return a.value_ <=> b.value_;
  }

  friend constexpr ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) noexcept {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  struct Tag {};
  constexpr explicit ExtendedReal(Tag) noexcept : value_(0.0), infinite_(true) {}

  double value_;
  bool infinite_;
};

}  // namespace lpball
