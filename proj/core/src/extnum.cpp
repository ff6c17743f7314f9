#include "heavytail/extnum.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "heavytail/errors.hpp"

namespace heavytail {

namespace {

// Largest x with exp(x) finite in double precision.
const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

const double Magnitude::kPromotionLn = 62.0 * std::log(2.0);

Magnitude Magnitude::exact(std::uint64_t value) {
  if (value >= kPromotionThreshold) {
    return log_scale(std::log(static_cast<double>(value)));
  }
  Magnitude m;
  m.kind_ = Kind::kExact;
  m.exact_ = value;
  m.log_ = value == 0 ? -std::numeric_limits<double>::infinity()
                      : std::log(static_cast<double>(value));
  return m;
}

Magnitude Magnitude::log_scale(double ln_value) {
  if (!std::isfinite(ln_value)) {
    fail(ErrorKind::kDomain, "LogScale magnitude needs a finite logarithm");
  }
  Magnitude m;
  m.kind_ = Kind::kLogScale;
  m.log_ = ln_value;
  return m;
}

Magnitude Magnitude::from_ln_rounded(double ln_value) {
  if (ln_value == -std::numeric_limits<double>::infinity()) return exact(0);
  if (ln_value < kPromotionLn) {
    const double v = std::nearbyint(std::exp(ln_value));
    if (v < static_cast<double>(kPromotionThreshold)) {
      return exact(static_cast<std::uint64_t>(v));
    }
  }
  return log_scale(ln_value);
}

Magnitude Magnitude::tower(int depth, double value) {
  if (depth < 1 || !std::isfinite(value)) {
    fail(ErrorKind::kDomain, "tower magnitude needs depth >= 1 and a finite value");
  }
  while (depth > 1 && value < kMaxExpArg) {
    value = std::exp(value);
    --depth;
  }
  if (depth == 1) return log_scale(value);
  Magnitude m;
  m.kind_ = Kind::kTower;
  m.log_ = value;
  m.depth_ = depth;
  return m;
}

std::uint64_t Magnitude::exact_value() const {
  if (kind_ != Kind::kExact) {
    fail(ErrorKind::kDomain, "magnitude is not held exactly");
  }
  return exact_;
}

double Magnitude::to_double() const noexcept {
  switch (kind_) {
    case Kind::kExact:
      return static_cast<double>(exact_);
    case Kind::kLogScale:
      return std::exp(log_);
    case Kind::kTower:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

std::partial_ordering operator<=>(const Magnitude& a,
                                  const Magnitude& b) noexcept {
  using K = Magnitude::Kind;
  if (a.kind_ == K::kExact && b.kind_ == K::kExact) {
    return a.exact_ <=> b.exact_;
  }
  if (a.kind_ == K::kTower || b.kind_ == K::kTower) {
    if (a.kind_ != K::kTower) return std::partial_ordering::less;
    if (b.kind_ != K::kTower) return std::partial_ordering::greater;
    if (a.depth_ != b.depth_) return a.depth_ <=> b.depth_;
    return a.log_ <=> b.log_;
  }
  return a.log_ <=> b.log_;
}

Magnitude mag_add(const Magnitude& a, const Magnitude& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_exact() && b.is_exact()) {
    // Both operands are below 2^62, so the sum fits in 64 bits.
    return Magnitude::exact(a.exact_value() + b.exact_value());
  }
  if (a.kind() == Magnitude::Kind::kTower ||
      b.kind() == Magnitude::Kind::kTower) {
    return (a <=> b) == std::partial_ordering::less ? b : a;
  }
  const double x = a.stored_log();
  const double y = b.stored_log();
  const double hi = std::max(x, y);
  return Magnitude::log_scale(hi + std::log1p(std::exp(-std::fabs(x - y))));
}

Magnitude mag_scale(const Magnitude& a, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    fail(ErrorKind::kDomain, "magnitude scale factor must be positive and finite");
  }
  if (a.is_zero() || a.kind() == Magnitude::Kind::kTower) return a;
  return Magnitude::log_scale(a.stored_log() + std::log(factor));
}

double mag_ln(const Magnitude& a) {
  if (a.kind() == Magnitude::Kind::kTower) {
    return std::numeric_limits<double>::infinity();
  }
  return a.stored_log();
}

namespace {

enum class IterOutcome { kOk, kTooSmall, kTooLarge };

IterOutcome iterate_ln(const Magnitude& a, int l, double& out) {
  if (l < 1) return IterOutcome::kTooSmall;
  if (a.is_zero()) return IterOutcome::kTooSmall;
  double cur = 0.0;
  int applied = 0;
  if (a.kind() == Magnitude::Kind::kTower) {
    if (l < a.tower_depth()) return IterOutcome::kTooLarge;
    cur = a.stored_log();
    applied = a.tower_depth();
  } else {
    cur = a.stored_log();
    applied = 1;
  }
  for (; applied < l; ++applied) {
    if (!(cur > 1.0)) return IterOutcome::kTooSmall;
    cur = std::log(cur);
  }
  out = cur;
  return IterOutcome::kOk;
}

}  // namespace

double mag_iterated_ln(const Magnitude& a, int l) {
  double out = 0.0;
  switch (iterate_ln(a, l, out)) {
    case IterOutcome::kOk:
      return out;
    case IterOutcome::kTooSmall:
      fail(ErrorKind::kDomain,
           "iterated log leaves the domain: an intermediate value is <= 1");
    case IterOutcome::kTooLarge:
      fail(ErrorKind::kDomain, "iterated log is not representable as a double");
  }
  return out;
}

double iterated_ln_or_neg_inf(const Magnitude& a, int l) {
  double out = 0.0;
  switch (iterate_ln(a, l, out)) {
    case IterOutcome::kOk:
      return out;
    case IterOutcome::kTooSmall:
      return -std::numeric_limits<double>::infinity();
    case IterOutcome::kTooLarge:
      return std::numeric_limits<double>::infinity();
  }
  return out;
}

std::string to_string(const Magnitude& a) {
  switch (a.kind()) {
    case Magnitude::Kind::kExact:
      return std::to_string(a.exact_value());
    case Magnitude::Kind::kLogScale:
      return "ln:" + format_double(a.stored_log());
    case Magnitude::Kind::kTower:
      return "tower" + std::to_string(a.tower_depth()) + ":" +
             format_double(a.stored_log());
  }
  return {};
}

Magnitude parse_magnitude(const std::string& text) {
  try {
    if (text.rfind("ln:", 0) == 0) {
      return Magnitude::log_scale(std::stod(text.substr(3)));
    }
    if (text.rfind("tower", 0) == 0) {
      const auto colon = text.find(':');
      if (colon == std::string::npos) throw std::invalid_argument(text);
      return Magnitude::tower(std::stoi(text.substr(5, colon - 5)),
                              std::stod(text.substr(colon + 1)));
    }
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return Magnitude::exact(v);
  } catch (const std::logic_error&) {
    fail(ErrorKind::kDomain, "cannot parse magnitude '" + text + "'");
  }
}

std::string to_json(const Magnitude& a) {
  switch (a.kind()) {
    case Magnitude::Kind::kExact:
      return "{\"exact\": \"" + std::to_string(a.exact_value()) + "\"}";
    case Magnitude::Kind::kLogScale:
      return "{\"ln\": " + format_double(a.stored_log()) + "}";
    case Magnitude::Kind::kTower:
      return "{\"tower\": " + std::to_string(a.tower_depth()) +
             ", \"value\": " + format_double(a.stored_log()) + "}";
  }
  return {};
}

}  // namespace heavytail
