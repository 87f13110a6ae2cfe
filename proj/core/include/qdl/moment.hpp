#pragma once

#include <string>
#include <vector>

#include "qdl/lvalue.hpp"
#include "qdl/specfun.hpp"
#include "qdl/weights.hpp"

namespace qdl {

// Weight with an attached complex power: x -> x^{power} w(x). Its Mellin
// transform is the base transform shifted by the power. The alpha <-> -alpha
// transport of the moment identities turns plain bumps into such tilted
// weights, so every closed-form evaluator below accepts one; the implicit
// conversion keeps plain SmoothWeight call sites unchanged.
struct TiltedWeight {
  SmoothWeight base;
  cplx power{0.0, 0.0};

  TiltedWeight(const SmoothWeight& w, cplx p = cplx{0.0, 0.0})
      : base(w), power(p) {}

  cplx mellin(cplx z) const { return mellin_phi(base, z + power); }
};

// Parameter box for one brute-force moment evaluation: the scale X, the
// shift/twist pair, the smooth weight and the expansion controls for the
// per-discriminant central values.
struct MomentRequest {
  double X = 1024.0;
  ShiftTwist st{};
  SmoothWeight weight = SmoothWeight::bump12();
  AfeParams afe{};

  // Throws std::invalid_argument unless X >= 16, the shift/twist box and
  // weight validate, and |alpha| <= 1/4 (the expansion's domain), and
  // std::length_error when the weight support pushes the discriminant window
  // beyond the 4e6 sieve cap.
  void validate() const;
};

struct BruteMoment {
  cplx value{0.0, 0.0};
  // Sum over contributing discriminants of the reported expansion tail
  // bounds, weighted by |Phi(d/X)|: a ceiling on the truncation error of
  // `value`. Quadrature and interpolation noise are orders below it.
  double err_budget = 0.0;
  long long terms = 0;  // discriminants with a nonzero character factor
};

// Weighted family sum over odd squarefree d in the support window
// [x0 X, x1 X]: sum of chi_{8d}(l) L(1/2+alpha, chi_{8d}) Phi(d/X), the
// central value coming from the smoothed two-sided expansion. Discriminants
// are processed in ascending order with compensated accumulation and a fixed
// reduction order, so the result is identical for every worker count.
BruteMoment brute_moment_full(const MomentRequest& req, int workers = 0);
cplx brute_moment(const MomentRequest& req, int workers = 0);

// Closed two-addend main term,
//   X Phi~(1)/(2 zeta_2(2)) l^{-1/2-alpha} zeta_2(1+2alpha) B_alpha(l)
//   + X^{1-alpha} Phi~(1-alpha) gamma_alpha/(2 zeta_2(2)) l^{-1/2+alpha}
//     zeta_2(1-2alpha) B_{-alpha}(l),
// where Phi~ is the (tilted) weight's Mellin transform. The two addends have
// simple poles at alpha = 0 that cancel in the sum; evaluation requires
// |alpha| >= 1e-4 for conditioning and throws std::domain_error below that
// (use main_term_alpha0 instead).
cplx main_term(double X, const ShiftTwist& st, const TiltedWeight& weight);

// Analytic continuation of main_term to alpha = 0: the symmetric average
// (main_term(delta) + main_term(-delta))/2 at delta = 1e-3, Richardson-refined
// against delta/2 so the even delta^2 error cancels. The result is
// X times a polynomial of degree one in log X.
cplx main_term_alpha0(double X, long long l, const SmoothWeight& weight);

// Contour used by the main-term pieces: abscissa magnitude 0.05, initial
// height 16, trapezoid step 0.008. Each piece takes the abscissa's magnitude
// and fixes its own sign; the height grows automatically until the outermost
// octave of the line contributes <= 1e-10.
inline ContourSpec moment_default_contour() { return ContourSpec{0.05, 16.0, 0.008}; }

// The four contour pieces whose sum telescopes to the first main-term addend.
// All four share one analytic kernel
//   F(s) = Phi~(1+s/2) (G(s)/s) g_alpha(s) X^{s/2} l^{-s}
//          zeta_2(1+2alpha+2s) B_{alpha+s}(l)
// split two ways: by the side of the line (Re s = +|eps| for the first pair,
// -|eps| for the second, which enters with an overall minus sign) and by the
// squarefree-support index a (a <= Y versus a > Y, the latter completed in
// closed form). Together the four equal the residue of F at s = 0.
//
// Preconditions shared by the pieces: alpha != 0 (the smoothing factor G is
// the forced-zero kind built from alpha, which keeps the interior zeta pole
// off the contour), |Im alpha| <= 25, | |Re alpha| - |abscissa| | >= 1e-3
// (the zeta pole at s = -alpha must not sit on a line), 0 < |abscissa| <=
// 0.2, 0 <= Y <= 2e4, X > 0. Violations throw std::domain_error or
// std::invalid_argument.
cplx term_MN_k0(double X, const ShiftTwist& st, const TiltedWeight& weight,
                double Y, const ContourSpec& contour = moment_default_contour());
cplx term_MR1(double X, const ShiftTwist& st, const TiltedWeight& weight,
              double Y, const ContourSpec& contour = moment_default_contour());
cplx term_MmN_k1(double X, const ShiftTwist& st, const TiltedWeight& weight,
                 double Y, const ContourSpec& contour = moment_default_contour());
cplx term_MmR2(double X, const ShiftTwist& st, const TiltedWeight& weight,
               double Y, const ContourSpec& contour = moment_default_contour());

// term_MmR2 before the s -> -s reflection and the gamma-ratio reduction: the
// same quantity evaluated on the positive line with the reflected kernel
//   Phi~(1-s/2) X^{-s/2} l^{s} a^{-2alpha+2s} g_{-alpha}(s)
//   zeta_2(1+2alpha-2s) gamma_{-alpha+s} gamma_alpha.
// Exists to validate the reduction identity; agrees with term_MmR2 to
// quadrature accuracy.
cplx term_MmR2_unreduced(double X, const ShiftTwist& st,
                         const TiltedWeight& weight, double Y,
                         const ContourSpec& contour = moment_default_contour());

struct CancellationCheck {
  cplx mn_k0{}, mr1{}, mmn_k1{}, mmr2{};  // the four pieces
  cplx lhs{};  // their sum
  cplx rhs{};  // the closed residue the sum must equal
};

// Evaluates the four pieces and the closed residue target
//   X Phi~(1)/(2 zeta_2(2)) l^{-1/2-alpha} zeta_2(1+2alpha) B_alpha(l),
// i.e. the first main-term addend. |lhs - rhs| / |rhs| measures how well the
// independently quadratured pieces telescope.
CancellationCheck check_cancellation(double X, const ShiftTwist& st,
                                     const SmoothWeight& weight, double Y,
                                     const ContourSpec& contour = moment_default_contour());

// The mirror image under the alpha <-> -alpha transport (negate alpha, tilt
// the weight by -alpha, scale by gamma_alpha X^{-alpha}): the four transported
// pieces now telescope to the second main-term addend, which is returned as
// rhs. check_cancellation(...).rhs + check_cancellation_mirrored(...).rhs
// equals main_term(...) identically.
CancellationCheck check_cancellation_mirrored(double X, const ShiftTwist& st,
                                              const SmoothWeight& weight, double Y,
                                              const ContourSpec& contour = moment_default_contour());

struct ResidualRow {
  double X = 0.0;
  cplx brute{};
  cplx main{};
  cplx residual{};  // brute - main, exactly
  double err_budget = 0.0;
};

struct ResidualTable {
  cplx alpha{0.0, 0.0};
  long long l = 1;
  std::string weight_name;
  long long seed = 0;
  std::vector<ResidualRow> rows;  // ascending X
};

// Brute-minus-main across a grid of scales. The per-discriminant central
// values are computed once and reused for every X whose window contains the
// discriminant (each is weight-independent until Phi(d/X) is applied at
// aggregation time); reuse_lvalues = false recomputes them per X instead,
// as a cache-correctness check. The main column uses main_term, switching to
// the alpha = 0 averaging path when |alpha| < 1e-4. Grid values must be
// ascending, distinct and >= 16.
ResidualTable residual_scan(const std::vector<double>& grid, const ShiftTwist& st,
                            const SmoothWeight& weight, const AfeParams& afe,
                            int workers = 0, bool reuse_lvalues = true);

struct ExponentFit {
  double slope = 0.0;      // least-squares slope of log|residual| vs log X
  double std_err = 0.0;    // standard error of the slope
  double robust_slope = 0.0;  // median of all pairwise slopes
};

// Power-law fit of the residual column. Requires >= 5 rows, strictly
// increasing X and nonzero residuals; throws std::invalid_argument otherwise.
ExponentFit fit_exponent(const ResidualTable& table);

// Error-exponent iteration f_{k+1} = (f_k + 1/2)/2 from feeding the moment
// bound back into its own derivation; returns the n+1 values f_0..f_n.
// Requires f0 in [1/2, 1] and 0 <= n <= 64.
std::vector<double> recursion_schedule(double f0, int n);

}  // namespace qdl
