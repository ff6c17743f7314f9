#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace heavytail {

/// Non-negative number of arbitrary magnitude.
///
/// Three representations:
///   - Exact: an integer below 2^62.
///   - LogScale: the natural log of the value, a finite double.
///   - Tower: log^{(depth)} of the value, depth >= 2, used only once the
///     natural log itself no longer fits a double.
/// Constructing an Exact from an integer at or above 2^62 promotes it to
/// LogScale. Tower values are normalized to the smallest depth that keeps
/// the stored number finite.
class Magnitude {
 public:
  enum class Kind { kExact, kLogScale, kTower };

  static constexpr std::uint64_t kPromotionThreshold = std::uint64_t{1} << 62;
  /// ln(2^62), the smallest ln a promoted value can carry.
  static const double kPromotionLn;

  Magnitude() = default;

  static Magnitude exact(std::uint64_t value);
  static Magnitude log_scale(double ln_value);
  /// Exact(round(e^ln_value)) below the promotion threshold, else LogScale.
  static Magnitude from_ln_rounded(double ln_value);
  static Magnitude tower(int depth, double value);

  Kind kind() const noexcept { return kind_; }
  bool is_exact() const noexcept { return kind_ == Kind::kExact; }
  bool is_zero() const noexcept { return kind_ == Kind::kExact && exact_ == 0; }

  std::uint64_t exact_value() const;
  /// ln of a LogScale value; ln of an Exact one; the stored iterated log of
  /// a Tower.
  double stored_log() const noexcept { return log_; }
  int tower_depth() const noexcept { return kind_ == Kind::kTower ? depth_ : 1; }

  /// Best double approximation, +inf when out of range.
  double to_double() const noexcept;

  friend std::partial_ordering operator<=>(const Magnitude& a,
                                           const Magnitude& b) noexcept;
  friend bool operator==(const Magnitude& a, const Magnitude& b) noexcept {
    return (a <=> b) == std::partial_ordering::equivalent;
  }

 private:
  Kind kind_ = Kind::kExact;
  std::uint64_t exact_ = 0;
  double log_ = -std::numeric_limits<double>::infinity();
  int depth_ = 1;
};

Magnitude mag_add(const Magnitude& a, const Magnitude& b);

/// Multiplies by a positive real, always through the log domain.
Magnitude mag_scale(const Magnitude& a, double factor);

/// Natural log; -inf for zero, +inf for Tower values.
double mag_ln(const Magnitude& a);

/// log applied `l` times. The first argument must be positive and every
/// subsequent argument must exceed 1; throws DomainError otherwise or when the
/// result is not representable as a double.
double mag_iterated_ln(const Magnitude& a, int l);

/// Like mag_iterated_ln but returns -inf instead of throwing when the value
/// is too small for `l` logarithms. Used for exceedance statistics.
double iterated_ln_or_neg_inf(const Magnitude& a, int l);

/// Decimal string for Exact values, "ln:<x>" for LogScale, and
/// "tower<d>:<x>" for Tower. Round-trippable by parse_magnitude.
std::string to_string(const Magnitude& a);
Magnitude parse_magnitude(const std::string& text);

/// {"exact": "<decimal>"} or {"ln": <float>} (Tower: {"tower": d, "value": x}).
std::string to_json(const Magnitude& a);

}  // namespace heavytail
