#include "qdl/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qdl/arith.hpp"

namespace qdl {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(cplx s) {
  return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

// Lanczos coefficients, g = 7, n = 9.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

cplx cgamma_core(cplx z) {
  if (z.real() < 0.5) {
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return kPi / (std::sin(kPi * z) * cgamma_core(1.0 - z));
  }
  z -= 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  cplx t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

// B_{2j} for 2j = 2..40 (exact rationals rounded to double; they enter only
// as small correction coefficients, so double precision is ample).
constexpr double kBern2j[20] = {
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
    854513.0 / 138,
    -236364091.0 / 2730,
    8553103.0 / 6,
    -23749461029.0 / 870,
    8615841276005.0 / 14322,
    -7709321041217.0 / 510,
    2577687858367.0 / 6,
    -2.6315271553053477373e19 / 1919190.0,
    2929993913841559.0 / 6,
    -2.61082718496449122051e20 / 13530.0};

// kBern2j[j-1] / (2j)! precomputed at first use.
const double* bern_over_fact() {
  static double table[20];
  static bool init = [] {
    double fact = 1.0;  // (2j)!
    for (int j = 1; j <= 20; ++j) {
      fact *= (2.0 * j - 1.0) * (2.0 * j);
      table[j - 1] = kBern2j[j - 1] / fact;
    }
    return true;
  }();
  (void)init;
  return table;
}

constexpr int kEmOrder = 15;  // number of Bernoulli correction terms

int em_cutoff(cplx s) {
  double t = std::abs(s.imag());
  double n = std::max(18.0, 1.3 * t + 10.0);
  return static_cast<int>(n);
}

// Euler-Maclaurin Hurwitz zeta core, a in (0, 1]; also used for zeta via
// a = 1. No precondition checks here.
cplx hurwitz_core(cplx s, double a) {
  const int N = em_cutoff(s);
  const double* bf = bern_over_fact();

  if (s.imag() == 0.0) {
    // real fast path (the lvalue oracle calls this ~1e7 times per sweep)
    double sr = s.real();
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += std::pow(n + a, -sr);
    double na = N + a;
    double lg = std::log(na);
    double np = std::exp(-sr * lg);       // (N+a)^{-s}
    acc += np * na / (sr - 1.0) + 0.5 * np;
    double poch = sr;                     // rising factorial s (s+1) ...
    double npw = np / na;                 // (N+a)^{-s-1}
    double inv2 = 1.0 / (na * na);
    for (int j = 1; j <= kEmOrder; ++j) {
      acc += bf[j - 1] * poch * npw;
      poch *= (sr + 2.0 * j - 1.0) * (sr + 2.0 * j);
      npw *= inv2;
    }
    return acc;
  }

  cplx acc = 0.0;
  for (int n = 0; n < N; ++n) acc += std::exp(-s * std::log(n + a));
  double na = N + a;
  double lg = std::log(na);
  cplx np = std::exp(-s * lg);
  acc += np * na / (s - 1.0) + 0.5 * np;
  cplx poch = s;
  cplx npw = np / na;
  double inv2 = 1.0 / (na * na);
  for (int j = 1; j <= kEmOrder; ++j) {
    acc += bf[j - 1] * poch * npw;
    poch *= (s + (2.0 * j - 1.0)) * (s + (2.0 * j));
    npw *= inv2;
  }
  return acc;
}

}  // namespace

cplx cgamma(cplx s) {
  if (is_nonpositive_integer(s))
    throw std::domain_error("cgamma: pole at non-positive integer s");
  return cgamma_core(s);
}

cplx zeta(cplx s) {
  if (s == cplx(1.0, 0.0)) throw std::domain_error("zeta: pole at s = 1");
  return hurwitz_core(s, 1.0);
}

cplx zeta_excl(cplx s, const std::vector<long long>& excluded) {
  cplx z = zeta(s);
  for (long long p : excluded) z *= 1.0 - std::exp(-s * std::log(static_cast<double>(p)));
  return z;
}

cplx hurwitz(cplx s, double a) {
  if (s == cplx(1.0, 0.0)) throw std::domain_error("hurwitz: pole at s = 1");
  if (!(a > 0.0 && a <= 1.0))
    throw std::invalid_argument("hurwitz: a must lie in (0, 1]");
  return hurwitz_core(s, a);
}

cplx real_char_l(cplx s, long long k1, const std::vector<long long>& excluded,
                 double tol) {
  const double sigma = s.real();
  if (sigma < 1.2)
    throw std::domain_error("real_char_l: requires Re s >= 1.2 (got " +
                            std::to_string(sigma) + ")");
  if (k1 == 0 || !is_squarefree_ll(std::abs(k1)))
    throw std::invalid_argument("real_char_l: k1 must be squarefree and nonzero");
  if (k1 == 1) return zeta_excl(s, excluded);

  // Polya-Vinogradov: partial sums of the character (restricted to residues
  // coprime to the excluded primes via Moebius expansion) are bounded by
  // 2^{|excluded|} sqrt(q) ln q with q = 4|k1|; partial summation then bounds
  // the tail beyond M by twice that times M^{-sigma}.
  const double q = 4.0 * static_cast<double>(std::llabs(k1));
  double pv = std::sqrt(q) * std::log(q);
  for (size_t i = 0; i < excluded.size(); ++i) pv *= 2.0;
  double m = std::pow(2.0 * pv / tol, 1.0 / sigma);
  long long M = static_cast<long long>(std::ceil(std::max(m, 8.0)));

  const bool real_s = s.imag() == 0.0;
  cplx acc = 0.0;
  double racc = 0.0;
  for (long long n = 1; n <= M; ++n) {
    bool skip = false;
    for (long long p : excluded)
      if (n % p == 0) {
        skip = true;
        break;
      }
    if (skip) continue;
    int chi = kronecker(k1, n);
    if (chi == 0) continue;
    if (real_s)
      racc += chi * std::pow(static_cast<double>(n), -sigma);
    else
      acc += static_cast<double>(chi) *
             std::exp(-s * std::log(static_cast<double>(n)));
  }
  return real_s ? cplx(racc, 0.0) : acc;
}

cplx g_alpha(cplx s, cplx alpha) {
  return std::pow(8.0 / kPi, s / 2.0) * cgamma((0.5 + alpha + s) / 2.0) /
         cgamma((0.5 + alpha) / 2.0);
}

cplx big_g(cplx s, const GSpec& spec) {
  if (spec.kind == GSpec::Kind::gaussian)
    return std::exp(spec.gauss_scale * s * s);
  const cplx a2 = spec.alpha * spec.alpha;
  if (a2 == cplx(0.0, 0.0))
    throw std::invalid_argument("big_g: remark_zero requires alpha != 0");
  const cplx s2 = s * s;
  const cplx q = 0.25 - a2;
  // Even entire function with G(0) = 1 and zeros at +-alpha, +-1/2 +- alpha.
  return std::exp(s2) * (s2 - a2) * ((s - 0.5) * (s - 0.5) - a2) *
         ((s + 0.5) * (s + 0.5) - a2) / (-a2 * q * q);
}

cplx gamma_alpha(cplx alpha) {
  return std::pow(8.0 / kPi, -alpha) * cgamma((0.5 - alpha) / 2.0) /
         cgamma((0.5 + alpha) / 2.0);
}

cplx x_alpha_factor(long long d, cplx alpha) {
  if (d <= 0) throw std::invalid_argument("x_alpha_factor: d must be positive");
  return gamma_alpha(alpha) *
         std::exp(-alpha * std::log(static_cast<double>(d)));
}

void ShiftTwist::validate() const {
  if (std::abs(alpha.real()) > 0.25 || std::abs(alpha.imag()) > 50.0)
    throw std::invalid_argument(
        "ShiftTwist: alpha outside |Re| <= 0.25, |Im| <= 50");
  if (l <= 0 || (l & 1) == 0 || !is_squarefree_ll(l))
    throw std::invalid_argument("ShiftTwist: l must be odd squarefree positive");
}

}  // namespace qdl
