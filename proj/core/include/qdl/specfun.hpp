#pragma once

#include <complex>
#include <vector>

namespace qdl {

using cplx = std::complex<double>;

// Complex gamma function (Lanczos approximation with reflection).
// Relative error <= 1e-12 for |s| <= 100. Throws std::domain_error at the
// poles s = 0, -1, -2, ...
cplx cgamma(cplx s);

// Riemann zeta via Euler-Maclaurin summation. Relative error <= 1e-10 for
// |Im s| <= 100, Re s >= -2. Throws std::domain_error at s = 1.
cplx zeta(cplx s);

// zeta(s) * prod_{p in excluded} (1 - p^{-s}): zeta with the Euler factors at
// the given (distinct prime) moduli removed.
cplx zeta_excl(cplx s, const std::vector<long long>& excluded);

// Hurwitz zeta(s, a) for a in (0, 1], Euler-Maclaurin. Relative error
// <= 1e-10 for Re s >= 0.4, |Im s| <= 100. Throws std::domain_error at s = 1.
cplx hurwitz(cplx s, double a);

// Truncated Dirichlet L-series sum_{n >= 1, gcd(n, excluded) = 1}
// kronecker(k1, n) n^{-s} in the absolute-convergence regime only: requires
// Re s >= 1.2 (throws std::domain_error below). The truncation length is
// chosen from the Polya-Vinogradov bound so the dropped tail is <= tol.
// k1 must be squarefree and nonzero; k1 = 1 is routed through zeta_excl.
cplx real_char_l(cplx s, long long k1, const std::vector<long long>& excluded,
                 double tol = 1e-9);

// g_alpha(s) = (8/pi)^{s/2} Gamma((1/2 + alpha + s)/2) / Gamma((1/2 + alpha)/2).
cplx g_alpha(cplx s, cplx alpha);

// Choice of the entire, even smoothing factor G used inside the V integrand.
//   gaussian:    G(s) = exp(gauss_scale * s^2)   (gauss_scale defaults to 1)
//   remark_zero: G(s) = e^{s^2} (s^2 - alpha^2)((s - 1/2)^2 - alpha^2)
//                       ((s + 1/2)^2 - alpha^2) / (-alpha^2 (1/4 - alpha^2)^2),
//                normalized so G(0) = 1, with forced zeros at s = +-alpha and
//                s = +-1/2 +- alpha (these zeros cancel the zeta pole in the
//                moment main-term contours). Requires alpha != 0.
struct GSpec {
  enum class Kind { gaussian, remark_zero };
  Kind kind = Kind::gaussian;
  cplx alpha{0.0, 0.0};
  double gauss_scale = 1.0;

  static GSpec gauss(double scale = 1.0) {
    GSpec g;
    g.kind = Kind::gaussian;
    g.gauss_scale = scale;
    return g;
  }
  static GSpec remark_zero(cplx alpha) {
    GSpec g;
    g.kind = Kind::remark_zero;
    g.alpha = alpha;
    return g;
  }
};

cplx big_g(cplx s, const GSpec& spec);

// gamma_alpha = (8/pi)^{-alpha} Gamma((1/2 - alpha)/2) / Gamma((1/2 + alpha)/2)
cplx gamma_alpha(cplx alpha);

// X_alpha(d) = (8d/pi)^{-alpha} Gamma((1/2 - alpha)/2) / Gamma((1/2 + alpha)/2)
//            = gamma_alpha(alpha) * d^{-alpha}
cplx x_alpha_factor(long long d, cplx alpha);

// Shift/twist parameter box shared by the moment machinery: alpha within
// |Re alpha| <= 0.25, |Im alpha| <= 50 and l odd squarefree positive.
struct ShiftTwist {
  cplx alpha{0.0, 0.0};
  long long l = 1;

  // Throws std::invalid_argument outside the supported box.
  void validate() const;
};

}  // namespace qdl
