#pragma once

#include <cstdint>

#include "heavytail/env_model.hpp"
#include "heavytail/extnum.hpp"

namespace heavytail {

/// (ln m)^{-alpha} L(ln m), the first-generation tail. Needs ln m > 1.
double predicted_tail_z1(const EnvironmentSpec& spec, const Magnitude& m);

/// alpha^{-alpha} y^{-alpha} L(y) with y = log^{(l)} m, l >= 2. Needs y > 1.
double predicted_tail_zl(const EnvironmentSpec& spec, int l, double y);

/// alpha^{-alpha} m^{-alpha} L(m), the tail of
/// log^{(n-1)}[(T_n - n - 2 sum_{i<=0} U_i)/2] at level m. Needs m > 1.
double predicted_tail_tn(const EnvironmentSpec& spec, int n, double m);

/// The two pieces of P(Z_1 >= m) = E[(1 - A)^m].
struct Z1TailParts {
  double sub_threshold = 0.0;  // V < eta, integrated against G
  double tail = 0.0;           // V > eta, the regularly varying part
  double total() const { return sub_threshold + tail; }
};

/// E[(1 - A)^m] split into its G-part and tail part. `ln_m` may be -inf
/// (m = 0). The tail part integrates (1 + e^{-v})^{-m} against the density of
/// V in the v coordinate, splitting at v = ln m where the integrand switches
/// from e^{-m e^{-v}} behaviour to the bare density.
Z1TailParts z1_tail_parts(const EnvironmentSpec& spec, double ln_m,
                          double rel_tol);

/// P(Z_1 >= m) to relative tolerance rel_tol in [1e-12, 1e-4].
double z1_tail_quadrature(const EnvironmentSpec& spec, const Magnitude& m,
                          double rel_tol = 1e-10);

/// The tail part computed in the u = log(1 + e^{-v}) coordinate, as the
/// Laplace transform int e^{-m u} d R(-log(e^u - 1)). Shares no integrand
/// code with the v-coordinate route.
double z1_tail_part_uform(const EnvironmentSpec& spec, double ln_m,
                          double rel_tol);

struct BoundReport {
  double lhs = 0.0;    // P(X_1 + ... + X_n >= x), exact
  double naive = 0.0;  // n q^x
  bool condition_met = false;
  double corrected_factor = 0.0;  // 1 - delta / (2 (1 - delta))
  double printed_factor = 0.0;    // 1 / (1 - delta)
  bool holds_corrected = false;   // lhs >= naive * corrected_factor
  bool holds_printed = false;     // lhs >= naive * printed_factor
};

/// Lower bound for sums of n i.i.d. geometrics with P(X >= k) = q^k, valid
/// once x >= (log 1/q)^{-1} (log n - log(delta / (1 - delta))).
BoundReport nagaev_bound_check(std::uint64_t n, double q, std::uint64_t x,
                               double delta);

/// Smallest integer x satisfying the condition of nagaev_bound_check.
std::uint64_t nagaev_min_x(std::uint64_t n, double q, double delta);

/// exp applied l times. Never rounds to an integer: the result carries the
/// real logarithm (LogScale, or Tower once that overflows).
Magnitude exp_iterated(double x, int l);

/// log applied l times; inverse of exp_iterated.
double log_iterated(const Magnitude& m, int l);

}  // namespace heavytail
