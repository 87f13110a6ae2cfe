#pragma once

#include <functional>

#include "qdl/specfun.hpp"
#include "qdl/weights.hpp"

namespace qdl {

// Quadratic Gauss-type sum to odd modulus n:
//   G_k(n) = ((1-i)/2 + (-1|n)(1+i)/2) * sum_{a mod n} (a|n) e^{2 pi i a k / n}.
// The normalization makes the value real for every k, n.
struct GaussSumValue {
  long long k = 0;
  long long n = 1;
  cplx value{1.0, 0.0};
  enum class Method { brute, closed } method = Method::closed;
};

// Direct O(n) evaluation of the defining sum. Requires n odd positive,
// n <= 1e5. (A per-modulus character/root table is cached thread-locally, so
// sweeping k at fixed n costs O(n) per value, not O(n log n).)
cplx gauss_brute(long long k, long long n);

// Closed form: multiplicative over prime powers p^beta || n with
// alpha = v_p(k) (alpha = infinity when k = 0):
//   0                          beta <= alpha, beta odd
//   phi(p^beta)                beta <= alpha, beta even
//   -p^alpha                   beta = alpha + 1 even
//   (k p^{-alpha} | p) p^alpha sqrt(p)   beta = alpha + 1 odd
//   0                          beta >= alpha + 2
// Value is always real. Requires n odd positive (factored by trial division).
cplx gauss_closed(long long k, long long n);

GaussSumValue gauss_sum(long long k, long long n,
                        GaussSumValue::Method method =
                            GaussSumValue::Method::closed);

// Fourier-type transform: integral of (cos(2 pi x y) + sin(2 pi x y)) F(x) dx
// over [x0, x1], panel-doubling Gauss-Legendre, absolute error <= 1e-10.
double fhat(const std::function<double(double)>& f, double x0, double x1,
            double y);
double fhat(const SmoothWeight& w, double y);

struct PoissonResult {
  double lhs = 0.0;        // sum over odd d of (d|n) F(d/Z)
  double rhs = 0.0;        // (Z/2n)(2|n) sum_{|k| <= kmax} (-1)^k G_k(n) fhat(kZ/2n)
  long long kmax = 0;
  double tail_bound = 0.0; // bound on the dropped |k| > kmax contribution
};

// Verifies the quadratic-character Poisson identity at modulus n and scale Z.
// Throws std::runtime_error if the k-tail beyond kmax cannot be bounded by
// 1e-8 (checked internally by extending one doubling window).
PoissonResult poisson_check(long long n, double Z, const SmoothWeight& F,
                            long long kmax);

}  // namespace qdl
