#pragma once

#include <complex>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/specfun.hpp"

namespace qdl {

// Evaluation strategy shared by the identity pairs in this module: `closed`
// evaluates the product/ratio form, `brute` the defining sum, truncated inside
// its absolute-convergence region.
enum class SeriesMode { brute, closed };

// Value plus the truncation bound the evaluator guarantees for it. The bound
// is 0 when the evaluation is exact up to rounding (finite products, finite
// sums). Brute evaluators combine rigorous geometric tails where available
// with a dyadic-decay model calibrated on the final octave of computed terms;
// the model constants are documented at each evaluator.
struct SeriesValue {
  cplx value{0.0, 0.0};
  double tail_bound = 0.0;
};

// Fills g[m] = G_k(m) for every odd m <= mmax in one multiplicative sieve
// pass (O(mmax) after the prime-power table); even-indexed slots are left
// untouched. g must be sized mmax+1 or larger, tables.limit >= mmax, and
// mmax <= 1e5. This is the bulk evaluator behind the brute double sums.
void gauss_table_odd(long long k, long long mmax, const SieveTables& tables,
                     std::vector<double>& g);

// B_alpha(l): the Euler-product correction attached to an odd squarefree
// twist l, defined through
//   zeta_2(1+2alpha) B_alpha(l) = sum_{n odd} n^{-1-2alpha} prod_{p|nl} (1+1/p)^{-1}.
// Modes:
//   series: the defining sum with the prod over p|n factor expanded by
//           Moebius convolution, so the odd-n zeta completes exactly against
//           the zeta_2(1+2alpha) normalization; requires Re alpha > 0 (the
//           region where the defining sum converges absolutely).
//   euler2: prod_{p|l}(1+1/p)^{-1} prod_{p not | 2l}(1 - p^{-2-2alpha}(1+1/p)^{-1})
//   euler3: zeta_2(2) (phi(l)/l) prod_{p not | 2l}(1 - p^{-2} - p^{-2-2alpha} + p^{-3-2alpha})
// Euler modes require Re alpha >= -0.3; their prime cutoff keeps the product
// tail below 1e-10. Throws std::domain_error outside the mode's region and
// std::invalid_argument for invalid l.
enum class BAlphaMode { series, euler2, euler3 };
cplx b_alpha(long long l, cplx alpha, BAlphaMode mode);

// C(w, theta) for w = +theta (w_sign = +1) or w = -theta (w_sign = -1), where
// theta abbreviates the combined shift. Defining sum:
//   sum_{(c,2l)=1} c^{-(2+w-theta)} sum_{a|c, a>Y} mu(a)
//     sum_{r|c} mu(r) r^{-(1+theta+w)} sum_{n odd} n^{-(1+2w)} prod_{p|lrn}(1+1/p)^{-1}.
// Closed forms (a runs over odd squarefree, coprime to l, a > Y):
//   w = +theta: zeta_2(2) (phi(l)/l) sum_a mu(a) a^{-2}
//                 zeta_{2a}(1+2theta) / zeta_{2al}(2+2theta)
//   w = -theta: zeta_2(1-2theta) prod_{p|l}(1+1/p)^{-1}
//                 sum_a mu(a) a^{-(2-2theta)} prod_{p|a}(1+1/p)^{-1}
//               (the per-prime product form, with the p not | 2l factors
//               (1 - p^{-(2-2theta)}) cancelled exactly against
//               zeta_{2l}(2-2theta); the p|a vs p-coprime case split is what
//               c_local_factor exposes for testing).
// Brute mode requires Re w >= 1.1 and Re(2+w-theta) >= 1.9.
SeriesValue c_series_full(int w_sign, cplx alpha_plus_s, long long l, double y_cut,
                          SeriesMode mode);
cplx c_series(int w_sign, cplx alpha_plus_s, long long l, double y_cut,
              SeriesMode mode);

// The local factor of the C(w, theta) rearrangement at one prime p not
// dividing 2l: the (r, j) double sum
//   sum_{r=0,1} sum_{j>=0} (-1)^r p^{-r(1+theta+w)} (gcd(a,p^r)/p^r)^{2+w-theta}
//     p^{-j(1+2w)} [(1+1/p)^{-1} when j+r > 0]
// multiplied by (1 - p^{-1-2w}), which removes the geometric normalization so
// the result can be compared against the per-prime case-split factors.
// Requires Re(1+2w) > 0.05 for the geometric j-sum.
cplx c_local_factor(long long p, bool p_divides_a, cplx w, cplx alpha_plus_s);

// Local Euler factor at an odd prime p of the double Dirichlet series over
// (k2, n) of G_{k1 k2^2}(n)/n, for p coprime to the twist:
//   H_p = (1 - p^{-1-2w})(1 - chi p^{-1/2-v-w})
//         / ((1 - p^{-v})(1 - p^{-v-2w})(1 - chi p^{-1/2-w}))
// with chi = kronecker(k1, p) (so the chi = 0 collapse covers p | k1).
cplx h_p_factor(long long k1, long long p, cplx v, cplx w);

// Twist-prime correction factor:
//   J_p = p^w [ -(1-p^{-v-2w})(1 - chi p^{-1/2-w}) + (1-p^{-1-2w})(1 - chi p^{-1/2-v-w}) ]
//         / ((1-p^{-v})(1-p^{-v-2w})(1 - chi p^{-1/2-w}))
// which also equals p^w (-(1-p^{-v})^{-1} + H_p). Throws std::domain_error
// when a denominator factor vanishes.
cplx j_p(long long k1, long long p, cplx v, cplx w);

// J_p by its defining double sum
//   sum_{j>=0} sum_{r>=0} G_{k1 p^{2j}}(p^{r+1}) / p^{r+1+jv+rw},
// truncated with rigorous geometric tail bounds (reported). Requires
// Re v >= 1, Re w >= 1.
SeriesValue j_p_brute(long long k1, long long p, cplx v, cplx w);

// H(k1, l; v, w) = sum_{k2>=1} sum_{n>=1, gcd(n,2a)=1} G_{k1 k2^2}(l n)/(l n)
//                    k2^{-v} n^{-w}
// for squarefree k1 != 0, odd squarefree l, odd a coprime to l. Closed form:
//   zeta_l(v) zeta_{2al}(v+2w) L_{2al}(1/2+w, chi_{k1})
//   / (zeta_{2al}(1+2w) L_{2al}(1/2+v+w, chi_{k1})) * prod_{p|l} J_p(k1; v, w)
// where the subscript lists the moduli whose Euler factors are removed and
// chi_{k1}(n) = kronecker(k1, n). Closed mode requires Re w >= 0.7 (the
// truncated L-series precondition); brute mode requires Re v >= 2 and
// Re w >= 1.2.
SeriesValue h_series_full(long long k1, long long l, long long a, cplx v, cplx w,
                          SeriesMode mode);
cplx h_series(long long k1, long long l, long long a, cplx v, cplx w,
              SeriesMode mode);

// Brute H with a parity filter and optional alternating sign on k2; powers
// the signed variant below and the even/odd split tests.
enum class K2Filter { all, even_only, odd_only };
SeriesValue h_series_brute_filtered(long long k1, long long l, long long a,
                                    cplx v, cplx w, K2Filter filter,
                                    bool alternate_sign);

// H_{-1}(k1, l; v, w): the same double sum with an extra (-1)^{k2}. Equals
// (2^{1-v} - 1) H(k1, l; v, w); the closed evaluator returns exactly that
// product, the brute variant sums with the sign.
SeriesValue h_minus1_full(long long k1, long long l, long long a, cplx v, cplx w,
                          SeriesMode mode);
cplx h_minus1(long long k1, long long l, long long a, cplx v, cplx w);

// A_{epsilon,l}(u, w) = sum_{n, gcd(n,2a)=1} sum_{k>=1} (-1)^k
//                         G_{epsilon k}(l n)/(l n) k^{-u} n^{-w},
// epsilon = +-1. Closed form: write k = k1 k2^2 with k1 squarefree; the k2/n
// double sum per k1 is H(epsilon k1, l; 2u, w), picking up (2^{1-2u} - 1)
// for odd k1 from the alternating sign:
//   zeta_l(2u) zeta_{2al}(2u+2w) / zeta_{2al}(1+2w) *
//   sum*_{k1} |k1|^{-u} [k1 odd: (2^{1-2u}-1)]
//     L_{2al}(1/2+w, chi_{eps k1}) / L_{2al}(1/2+2u+w, chi_{eps k1})
//     prod_{p|l} J_p(eps k1; 2u, w).
// The squarefree k1 sum is truncated at 10^4; for l = 1 and l = an odd prime
// the neutral part of the tail (character ratio replaced by its limit 1) is
// completed with zeta and L values split over k1 parity and kronecker(k1, p)
// classes, and the oscillating remainder enters the reported bound. Brute
// mode requires Re u >= 1.5 and Re w >= 1.2; closed mode Re u >= 1.2,
// Re w >= 0.7.
SeriesValue a_series_full(int epsilon, long long l, long long a, cplx u, cplx w,
                          SeriesMode mode);
cplx a_series(int epsilon, long long l, long long a, cplx u, cplx w,
              SeriesMode mode);

// One k1 term of the closed A-series (without the zeta prefactor shared by
// all terms, which multiplies the whole sum): |k1|^{-u} times the odd-k1
// factor, the L-ratio and the twist-prime product. Used by the closed sum
// and by the pole-isolation tests, which need the k1 = 1 term alone.
cplx a_series_k1_term(int epsilon, long long l, long long a, long long k1,
                      cplx u, cplx w);

// The zeta prefactor of the closed A-series:
//   zeta_l(2u) zeta_{2al}(2u+2w) / zeta_{2al}(1+2w).
cplx a_series_prefactor(long long l, long long a, cplx u, cplx w);

}  // namespace qdl
