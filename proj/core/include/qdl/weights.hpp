#pragma once

#include <string>
#include <vector>

#include "qdl/specfun.hpp"

namespace qdl {

// Smooth nonnegative bump supported on [x0, x1], vanishing to all orders at
// the endpoints: x -> exp(-1/((x - x0)(x1 - x))). The Mellin transform of such
// a weight is entire and decays rapidly on vertical lines.
struct SmoothWeight {
  double x0 = 1.0;
  double x1 = 2.0;

  double operator()(double x) const;
  std::string name() const;  // "bump12" for the default support, else "bump[a,b]"

  static SmoothWeight bump12() { return SmoothWeight{1.0, 2.0}; }
  // Throws std::invalid_argument unless 0 < x0 < x1.
  void validate() const;
};

// Truncated vertical line Re s = abscissa, |Im s| <= height, uniform
// quadrature spacing `step`.
struct ContourSpec {
  double abscissa = 1.0;
  double height = 9.0;
  double step = 0.05;

  // Throws std::invalid_argument unless height > 0 and 0 < step <= height/50.
  void validate() const;
  int half_count() const;  // number of positive nodes; t_j = j*step, |j| <= half_count
};

// Mellin transform of the weight: integral of w(x) x^{s-1} over the support,
// by panel-doubling Gauss-Legendre quadrature to absolute error
// <= 1e-12 * max(1, |result|). Entire in s.
cplx mellin_phi(const SmoothWeight& w, cplx s);

// Mellin transform along an arithmetic progression of arguments
// base + i*j*dt for j = jmin..jmax (inclusive), sharing one set of quadrature
// nodes; out[j - jmin] = mellin_phi(w, base + i*j*dt) up to quadrature error.
std::vector<cplx> mellin_phi_line(const SmoothWeight& w, cplx base, double dt,
                                  int jmin, int jmax);

// Default contour for the AFE kernel integral (abscissa 1, matching the
// defining representation; the gaussian factor makes |integrand| < 1e-34 at
// the truncation height).
inline ContourSpec v_default_contour() { return ContourSpec{1.0, 9.0, 0.05}; }

// AFE kernel V_alpha(x): (1/2 pi i) times the integral over the contour of
// G(s)/s * g_alpha(s) * x^{-s} ds.
//
// For x >= 1/2 the integral is evaluated on the given abscissa (which must be
// positive). For x < 1/2 the contour is shifted to Re s = -0.1 and the
// residue at s = 0 (equal to G(0) g_alpha(0) = 1) is added; on the positive
// abscissa the integrand grows like x^{-abscissa} and the shifted form keeps
// the absolute rounding floor near machine precision. Absolute error <= 1e-9
// for x in [1e-6, 1e6] and |alpha| <= 0.25. Rejects x <= 0.
cplx v_alpha(double x, cplx alpha, const GSpec& gspec,
             const ContourSpec& contour = v_default_contour());

// Log-spaced cubic-interpolation table of V_alpha on [1e-6, xmax].
class VCache {
 public:
  // Interpolated V_alpha(x). Falls back to direct quadrature below the first
  // grid point; returns 0 beyond xmax (callers truncate sums before xmax).
  cplx eval(double x) const;

  // Non-increasing envelope: max over grid points >= x of |V|; used by
  // truncation logic to bound dropped tails. For x > xmax returns the
  // last-node envelope value.
  double tail_envelope(double x) const;

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  cplx alpha() const { return alpha_; }

 private:
  friend VCache build_v_cache(cplx alpha, const GSpec& gspec, double xmax,
                              int per_decade, const ContourSpec& contour);
  cplx alpha_;
  GSpec gspec_;
  ContourSpec contour_;
  double xmin_ = 1e-6, xmax_ = 1.0;
  double log_xmin_ = 0.0, inv_dlog_ = 1.0;  // uniform grid in log x
  std::vector<cplx> values_;
  std::vector<double> envelope_;  // suffix max of |values_|
};

VCache build_v_cache(cplx alpha, const GSpec& gspec, double xmax,
                     int per_decade = 400,
                     const ContourSpec& contour = v_default_contour());

}  // namespace qdl
