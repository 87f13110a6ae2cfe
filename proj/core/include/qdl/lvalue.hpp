#pragma once

#include "qdl/arith.hpp"
#include "qdl/specfun.hpp"
#include "qdl/weights.hpp"

namespace qdl {

// Parameters for the smoothed central-value expansion
//   L(1/2+a, chi_{8d}) = sum_n chi_{8d}(n) n^{-1/2-a} V_a(n/sqrt(d))
//                      + X_a sum_n chi_{8d}(n) n^{-1/2+a} V_{-a}(n/sqrt(d)).
// The V-argument scale is n/sqrt(d); the conductor-8 part lives inside the
// (8/pi)^{s/2} factor of the gamma ratio.
struct AfeParams {
  GSpec gspec = GSpec::gauss();
  ContourSpec contour = v_default_contour();
  // Fixed truncation: N = ceil(multiplier * sqrt(d) * log(2 + d)) per sum.
  // Only used when tail_bound_target is zero. The V profile decays like
  // exp(-(log x)^2 / 4), not exponentially, so this schedule leaves tails
  // around 1e-3 at small d; it exists for cheap survey runs.
  double truncation_multiplier = 12.0;
  // When positive, N is instead chosen per sum (mirror sum weighted by
  // |X_a|) so the character-sum tail bound below is at most this value.
  // This is the default mechanism; oracle-grade accuracy needs it.
  double tail_bound_target = 1e-8;
};

struct AfeResult {
  cplx value{};
  // Rigorous bound on the dropped n > N tails of both sums combined:
  // per sum, 2 * sqrt(8d) * log(8d) * N^{-1/2-min(Re b,0)} * Venv(N/sqrt(d))
  // by Polya-Vinogradov plus partial summation against the V envelope
  // (b is the n-exponent shift of that sum). The true tail is usually far
  // smaller because the terms also oscillate, so treat this as a ceiling.
  double tail_bound = 0.0;
  long long nterms = 0;  // total terms scanned across both sums
};

// Full-control evaluation. vplus must be a cache of V_alpha and vminus of
// V_{-alpha}, both built with params.gspec; tables must cover the truncation
// point. Throws std::invalid_argument when a cache or table is too small for
// the required range, std::runtime_error when tail_bound_target is positive
// but unreachable within the cache domain.
AfeResult l_afe_full(long long d, cplx alpha, const AfeParams& params,
                     const SieveTables& tables, const VCache& vplus,
                     const VCache& vminus);

// Convenience wrapper: builds the sieve and both V caches internally (sized
// to the truncation schedule, enlarging as needed for a tail target).
// Requires d odd squarefree positive and |alpha| <= 1/4.
cplx l_afe(long long d, cplx alpha, const AfeParams& params = AfeParams{});

// Independent oracle via the conductor-q expansion into Hurwitz zetas,
//   L(s, chi_{8d}) = q^{-s} sum_{a=1}^{q} chi_{8d}(a) zeta(s, a/q),  q = 8d.
// Exact finite rearrangement, no truncation in n. Requires Re s >= 0.4,
// |s - 1| >= 1e-6, and q <= 1e5 (the cost is q/2 Hurwitz evaluations).
cplx l_oracle(long long d, cplx s);

}  // namespace qdl
