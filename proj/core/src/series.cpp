#include "qdl/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/gauss.hpp"

namespace qdl {

namespace {

// Shared factor tables for the squarefree enumerations; the closed C-series
// sums run to 2e6, everything else needs far less.
const SieveTables& big_tables() {
  static const SieveTables tables = build_sieves(2'100'000);
  return tables;
}

const std::vector<long long>& euler_primes() {
  static const std::vector<long long> primes = primes_upto(2'000'000);
  return primes;
}

void validate_l(long long l) {
  if (l < 1 || l % 2 == 0 || !is_squarefree_ll(l))
    throw std::invalid_argument("twist l must be odd, squarefree and positive");
}

void validate_a(long long a, long long l) {
  if (a < 1 || a % 2 == 0)
    throw std::invalid_argument("a must be odd and positive");
  if (std::gcd(a, l) != 1)
    throw std::invalid_argument("a must be coprime to the twist l");
}

void validate_k1(long long k1) {
  if (k1 == 0 || std::llabs(k1) > 1'000'000'000LL ||
      !is_squarefree_ll(std::llabs(k1)))
    throw std::invalid_argument("k1 must be squarefree, nonzero and moderate");
}

void require_odd_prime(long long p) {
  bool ok = p >= 3 && p % 2 == 1;
  for (long long q = 3; ok && q * q <= p; q += 2) ok = p % q != 0;
  if (!ok) throw std::invalid_argument("p must be an odd prime");
}

// n^{-e} for integer n >= 1.
cplx ninv(long long n, cplx e) {
  return std::exp(-e * std::log(static_cast<double>(n)));
}

// p^{-e} sharing one log.
cplx pinv(double logp, cplx e) { return std::exp(-e * logp); }

std::vector<long long> merged_excluded(long long a, long long l) {
  std::vector<long long> excl{2};
  for (long long p : prime_factors(a)) excl.push_back(p);
  for (long long p : prime_factors(l)) excl.push_back(p);
  std::sort(excl.begin(), excl.end());
  excl.erase(std::unique(excl.begin(), excl.end()), excl.end());
  return excl;
}

// ---------------------------------------------------------------------------
// Normalized Gauss-sum sieve: G_k(m) is multiplicative in odd m for fixed k
// and real-valued, so one pass over prime powers plus a smallest-prime-factor
// walk fills every odd modulus up to mmax in O(mmax).

struct OddPrimePowers {
  std::vector<long long> prime;
  std::vector<int> exponent;
  std::vector<long long> value;
  std::vector<double> sqrt_p;
};

const OddPrimePowers& odd_prime_powers() {
  static const OddPrimePowers pp = [] {
    OddPrimePowers r;
    const long long limit = 100000;
    for (long long p : primes_upto(limit)) {
      if (p == 2) continue;
      const double sp = std::sqrt(static_cast<double>(p));
      long long q = p;
      int e = 1;
      while (q <= limit) {
        r.prime.push_back(p);
        r.exponent.push_back(e);
        r.value.push_back(q);
        r.sqrt_p.push_back(sp);
        if (q > limit / p) break;
        q *= p;
        ++e;
      }
    }
    return r;
  }();
  return pp;
}

// G_k(p^e) by the prime-power case table, for odd p and k != 0.
double gauss_prime_power(long long k, long long p, int e, long long pe,
                         double sqrt_p) {
  int vp = 0;
  long long kk = k;
  while (kk % p == 0) {
    kk /= p;
    ++vp;
  }
  if (e <= vp) return (e % 2 == 0) ? static_cast<double>(pe - pe / p) : 0.0;
  if (e == vp + 1) {
    if (e % 2 == 0) return -static_cast<double>(pe / p);
    return kronecker(kk, p) * static_cast<double>(pe / p) * sqrt_p;
  }
  return 0.0;
}

// Fills g[m] = G_k(m) for odd m <= mmax (even slots are left untouched).
// gpp is scratch indexed by prime-power value; both vectors must be sized
// mmax+1 or larger.
void gauss_fill_odd(long long k, long long mmax, const SieveTables& tables,
                    std::vector<double>& gpp, std::vector<double>& g) {
  const OddPrimePowers& pp = odd_prime_powers();
  for (std::size_t i = 0; i < pp.value.size(); ++i) {
    if (pp.value[i] > mmax) continue;
    gpp[pp.value[i]] =
        gauss_prime_power(k, pp.prime[i], pp.exponent[i], pp.value[i], pp.sqrt_p[i]);
  }
  g[1] = 1.0;
  for (long long m = 3; m <= mmax; m += 2) {
    const long long p = tables.spf[m];
    long long rest = m / p;
    long long q = p;
    while (rest % p == 0) {
      rest /= p;
      q *= p;
    }
    g[m] = (rest == 1) ? gpp[q] : g[rest] * gpp[q];
  }
}

}  // namespace

void gauss_table_odd(long long k, long long mmax, const SieveTables& tables,
                     std::vector<double>& g) {
  if (k == 0 || mmax < 1 || mmax > 100000 ||
      tables.limit < mmax || static_cast<long long>(g.size()) <= mmax)
    throw std::invalid_argument("gauss_table_odd: bad arguments");
  thread_local std::vector<double> gpp(100001, 0.0);
  gauss_fill_odd(k, mmax, tables, gpp, g);
}

namespace {

// Marks 1 exactly at the odd n <= nmax coprime to a.
std::vector<char> coprime_mask(long long a, long long nmax) {
  std::vector<char> ok(static_cast<std::size_t>(nmax) + 1, 1);
  ok[0] = 0;
  for (long long n = 2; n <= nmax; n += 2) ok[n] = 0;
  for (long long p : prime_factors(a))
    for (long long n = p; n <= nmax; n += p) ok[n] = 0;
  return ok;
}

// ---------------------------------------------------------------------------
// Twist-prime local factors.

cplx j_p_chi(double chi, long long p, cplx v, cplx w) {
  const double logp = std::log(static_cast<double>(p));
  const cplx d1 = 1.0 - pinv(logp, v);
  const cplx d2 = 1.0 - pinv(logp, v + 2.0 * w);
  const cplx d3 = 1.0 - chi * pinv(logp, 0.5 + w);
  if (std::abs(d1) < 1e-12 || std::abs(d2) < 1e-12 || std::abs(d3) < 1e-12)
    throw std::domain_error("twist-prime factor: denominator vanishes");
  const cplx num =
      -(d2 * d3) + (1.0 - pinv(logp, 1.0 + 2.0 * w)) * (1.0 - chi * pinv(logp, 0.5 + v + w));
  return std::exp(w * logp) * num / (d1 * d2 * d3);
}

}  // namespace

// ---------------------------------------------------------------------------
// B_alpha(l)

cplx b_alpha(long long l, cplx alpha, BAlphaMode mode) {
  validate_l(l);
  const std::vector<long long> lp = prime_factors(l);
  double head = 1.0;
  for (long long p : lp) head /= 1.0 + 1.0 / static_cast<double>(p);

  if (mode == BAlphaMode::series) {
    if (alpha.real() <= 0.0)
      throw std::domain_error("series mode needs Re alpha > 0");
    // Defining sum over odd n, reorganized exactly: the factor
    // prod_{p|n, p not | l}(1+1/p)^{-1} expands as sum over squarefree d | n
    // of prod_{p|d}(-1/(p+1)); the complementary odd sum is the zeta that
    // cancels the normalization, leaving sum over odd squarefree d coprime
    // to l of prod_{p|d}(-1/(p+1)) d^{-1-2alpha}.
    const SieveTables& tables = big_tables();
    const long long dmax = 300000;
    const cplx z = 1.0 + 2.0 * alpha;
    cplx sum = 1.0;
    for (long long d : tables.odd_squarefree) {
      if (d > dmax) break;
      if (d == 1) continue;
      double coeff = 1.0;
      bool coprime = true;
      long long m = d;
      while (m > 1) {
        const long long p = tables.spf[m];
        if (l % p == 0) {
          coprime = false;
          break;
        }
        coeff *= -1.0 / static_cast<double>(p + 1);
        m /= p;
      }
      if (!coprime) continue;
      sum += coeff * ninv(d, z);
    }
    return head * sum;
  }

  if (alpha.real() < -0.3)
    throw std::domain_error("euler modes need Re alpha >= -0.3");
  const cplx z2 = 2.0 + 2.0 * alpha;
  auto divides_l = [&](long long p) {
    for (long long q : lp)
      if (q == p) return true;
    return false;
  };

  if (mode == BAlphaMode::euler2) {
    // prod_{p not | 2l}(1 - p^{-2-2alpha}(1+1/p)^{-1}), with the dominant
    // (1 - p^{-2-2alpha}) split off as 1/zeta_{2l}(2+2alpha) so the finite
    // product only carries the p^{-3-2alpha}-sized correction (tail < 1e-10
    // at the 2e6 prime cutoff for Re alpha >= -0.3).
    std::vector<long long> excl{2};
    excl.insert(excl.end(), lp.begin(), lp.end());
    cplx prod = head / zeta_excl(z2, excl);
    for (long long p : euler_primes()) {
      if (p == 2 || divides_l(p)) continue;
      const cplx ap = ninv(p, z2);
      prod *= 1.0 + ap / (static_cast<double>(p + 1) * (1.0 - ap));
    }
    return prod;
  }

  // euler3: zeta_2(2) (phi(l)/l) prod_{p not | 2l}(1 - p^{-2} - p^{-2-2alpha}
  // + p^{-3-2alpha}), factored as (1-p^{-2})(1-p^{-2-2alpha}) times a
  // p^{-3-2alpha} correction.
  std::vector<long long> excl{2};
  excl.insert(excl.end(), lp.begin(), lp.end());
  double phi_over_l = 1.0;
  for (long long p : lp) phi_over_l *= 1.0 - 1.0 / static_cast<double>(p);
  cplx prod = zeta_excl(2.0, {2}) * phi_over_l /
              (zeta_excl(2.0, excl) * zeta_excl(z2, excl));
  for (long long p : euler_primes()) {
    if (p == 2 || divides_l(p)) continue;
    const double pd = static_cast<double>(p);
    const cplx ap = ninv(p, z2);
    prod *= 1.0 + ap * (1.0 - 1.0 / pd) /
                      (pd * (1.0 - 1.0 / (pd * pd)) * (1.0 - ap));
  }
  return prod;
}

// ---------------------------------------------------------------------------
// C(w, theta)

namespace {

SeriesValue c_closed(int w_sign, cplx theta, long long l, double y_cut) {
  const SieveTables& tables = big_tables();
  const long long acut = 2'000'000;
  const std::vector<long long> lp = prime_factors(l);
  auto coprime_to_l = [&](long long a) {
    for (long long p : lp)
      if (a % p == 0) return false;
    return true;
  };

  if (w_sign > 0) {
    // zeta_2(2) (phi(l)/l) sum_a mu(a) a^{-2} zeta_{2a}(1+2theta)/zeta_{2al}(2+2theta)
    if (std::abs(2.0 * theta) < 1e-8)
      throw std::domain_error("closed C(+): 1+2theta hits the zeta pole");
    if (theta.real() <= -0.45)
      throw std::domain_error("closed C(+): Re theta too negative");
    const cplx z1 = 1.0 + 2.0 * theta;
    const cplx z2 = 2.0 + 2.0 * theta;
    cplx zbase = zeta(z1) * (1.0 - ninv(2, z1)) / (zeta(z2) * (1.0 - ninv(2, z2)));
    for (long long p : lp) zbase /= 1.0 - ninv(p, z2);

    // Per-prime powers for the a-factorizations, indexed through the shared
    // prime list.
    const std::vector<long long>& primes = euler_primes();
    std::vector<int> pidx(static_cast<std::size_t>(acut) + 1, -1);
    for (std::size_t i = 0; i < primes.size(); ++i)
      if (primes[i] <= acut) pidx[primes[i]] = static_cast<int>(i);
    std::vector<cplx> f1(primes.size()), f2(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
      f1[i] = 1.0 - ninv(primes[i], z1);
      f2[i] = 1.0 - ninv(primes[i], z2);
    }

    double phi_over_l = 1.0;
    for (long long p : lp)
      phi_over_l *= 1.0 - 1.0 / static_cast<double>(p);
    const cplx outer = zeta_excl(2.0, {2}) * phi_over_l * zbase;

    cplx sum = 0.0;
    double max_ratio = 1.0;
    for (long long a : tables.odd_squarefree) {
      if (a > acut) break;
      if (a <= y_cut || !coprime_to_l(a)) continue;
      cplx prod = 1.0;
      long long m = a;
      while (m > 1) {
        const long long p = tables.spf[m];
        prod *= f1[pidx[p]] / f2[pidx[p]];
        m /= p;
      }
      max_ratio = std::max(max_ratio, std::abs(prod));
      const double mu = tables.moebius[a];
      sum += mu * prod / static_cast<double>(a * a);
    }
    const double bound =
        std::abs(outer) * max_ratio / static_cast<double>(acut);
    return {outer * sum, bound};
  }

  // w = -theta: zeta_2(1-2theta) prod_{p|l}(1+1/p)^{-1}
  //   sum_a mu(a) a^{-(2-2theta)} prod_{p|a}(1+1/p)^{-1},
  // the product form after cancelling prod_{p not | 2l}(1 - p^{-(2-2theta)})
  // against zeta_{2l}(2-2theta). The per-prime case split behind the
  // cancellation is exposed separately by c_local_factor.
  if (std::abs(2.0 * theta) < 1e-8)
    throw std::domain_error("closed C(-): 1-2theta hits the zeta pole");
  if (theta.real() >= 0.45)
    throw std::domain_error("closed C(-): a-sum leaves absolute convergence");
  cplx pref = zeta_excl(1.0 - 2.0 * theta, {2});
  for (long long p : lp) pref /= 1.0 + 1.0 / static_cast<double>(p);
  const cplx za = 2.0 - 2.0 * theta;

  cplx sum = 0.0;
  for (long long a : tables.odd_squarefree) {
    if (a > acut) break;
    if (a <= y_cut || !coprime_to_l(a)) continue;
    double weight = tables.moebius[a];
    long long m = a;
    while (m > 1) {
      const long long p = tables.spf[m];
      weight /= 1.0 + 1.0 / static_cast<double>(p);
      m /= p;
    }
    sum += weight * ninv(a, za);
  }
  const double sa = za.real();
  const double bound = std::abs(pref) *
                       std::pow(static_cast<double>(acut), 1.0 - sa) / (sa - 1.0);
  return {pref * sum, bound};
}

SeriesValue c_brute(int w_sign, cplx theta, long long l, double y_cut) {
  const cplx w = (w_sign > 0) ? theta : -theta;
  const cplx zc = 2.0 + w - theta;
  const cplx zr = 1.0 + theta + w;
  const cplx zn = 1.0 + 2.0 * w;
  if (w.real() < 1.1 || zc.real() < 1.9)
    throw std::domain_error(
        "brute C needs Re w >= 1.1 and Re(2+w-theta) >= 1.9 (shifted test points)");

  const SieveTables& tables = big_tables();
  const long long ccut = (zc.real() >= 3.5) ? 4000 : 250000;
  // Inner odd-n sum: coefficients are <= 1, so the geometric-integral tail
  // N^{1-Re zn}/(Re zn - 1) is rigorous; size it to 1e-9.
  const double szn = zn.real();
  long long nn = static_cast<long long>(
      std::ceil(std::pow(1e-9 * (szn - 1.0), -1.0 / (szn - 1.0))));
  nn = std::clamp<long long>(nn, 1000, 30000);
  const double inner_tail = std::pow(static_cast<double>(nn), 1.0 - szn) / (szn - 1.0);

  const std::vector<long long> lp = prime_factors(l);
  auto coprime_to_l = [&](long long c) {
    for (long long p : lp)
      if (c % p == 0) return false;
    return true;
  };

  // f0[n] = n^{-zn} prod_{p|n}(1+1/p)^{-1} for odd n.
  std::vector<cplx> f0(static_cast<std::size_t>(nn) + 1);
  for (long long n = 1; n <= nn; n += 2) {
    double rad = 1.0;
    long long m = n;
    while (m > 1) {
      const long long p = tables.spf[m];
      rad /= 1.0 + 1.0 / static_cast<double>(p);
      while (m % p == 0) m /= p;
    }
    f0[n] = rad * ninv(n, zn);
  }

  // F(d) = sum over odd multiples of d of f0; the inner sum for one r is then
  // prod_{p|lr}(1+1/p)^{-1} sum_{d | rad(lr)} mu^2(d)/d F(d), which is the
  // exact Moebius expansion of prod_{p | gcd(n, lr)}(1+1/p).
  std::unordered_map<long long, cplx> fmemo;
  auto big_f = [&](long long d) -> cplx {
    if (d > nn) return 0.0;
    auto it = fmemo.find(d);
    if (it != fmemo.end()) return it->second;
    cplx s = 0.0;
    for (long long n = d; n <= nn; n += 2 * d) s += f0[n];
    fmemo.emplace(d, s);
    return s;
  };

  std::unordered_map<long long, cplx> rmemo;
  auto r_term = [&](long long r) -> cplx {
    auto it = rmemo.find(r);
    if (it != rmemo.end()) return it->second;
    std::vector<long long> ps = lp;
    {
      long long m = r;
      while (m > 1) {
        const long long p = tables.spf[m];
        ps.push_back(p);
        m /= p;
      }
    }
    double headw = 1.0;
    for (long long p : ps) headw /= 1.0 + 1.0 / static_cast<double>(p);
    cplx inner = 0.0;
    const std::size_t nsub = static_cast<std::size_t>(1) << ps.size();
    for (std::size_t mask = 0; mask < nsub; ++mask) {
      long long d = 1;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (mask & (static_cast<std::size_t>(1) << i)) d *= ps[i];
      inner += big_f(d) / static_cast<double>(d);
    }
    const double mu = (r == 1) ? 1.0 : tables.moebius[r];
    const cplx val = mu * ninv(r, zr) * (headw * inner);
    rmemo.emplace(r, val);
    return val;
  };

  cplx total = 0.0;
  double octave_abs = 0.0;
  double weight_abs = 0.0;
  std::vector<long long> cp;
  for (long long c = 1; c <= ccut; c += 2) {
    if (!coprime_to_l(c)) continue;
    cp.clear();
    long long m = c;
    while (m > 1) {
      const long long p = tables.spf[m];
      cp.push_back(p);
      while (m % p == 0) m /= p;
    }
    const std::size_t nsub = static_cast<std::size_t>(1) << cp.size();
    long long a_excess = 0;
    for (std::size_t mask = 0; mask < nsub; ++mask) {
      long long a = 1;
      int bits = 0;
      for (std::size_t i = 0; i < cp.size(); ++i)
        if (mask & (static_cast<std::size_t>(1) << i)) {
          a *= cp[i];
          ++bits;
        }
      if (a > y_cut) a_excess += (bits % 2 == 0) ? 1 : -1;
    }
    if (a_excess == 0) continue;
    cplx rsum = 0.0;
    for (std::size_t mask = 0; mask < nsub; ++mask) {
      long long r = 1;
      for (std::size_t i = 0; i < cp.size(); ++i)
        if (mask & (static_cast<std::size_t>(1) << i)) r *= cp[i];
      rsum += r_term(r);
    }
    const cplx term = ninv(c, zc) * static_cast<double>(a_excess) * rsum;
    total += term;
    weight_abs += std::abs(term);
    if (2 * c > ccut) octave_abs += std::abs(term);
  }

  // Dyadic c-tail model: octave sums shrink by about 2^{1.15 - Re zc}
  // (density times the c-power, with a small logarithmic allowance), safety
  // factor 2; inner truncations add 2 inner tails per unit of accumulated
  // weight.
  const double rho = std::min(0.8, std::pow(2.0, 1.15 - zc.real()));
  const double bound =
      2.0 * octave_abs * rho / (1.0 - rho) + 2.0 * inner_tail * (1.0 + weight_abs);
  return {total, bound};
}

}  // namespace

SeriesValue c_series_full(int w_sign, cplx alpha_plus_s, long long l, double y_cut,
                          SeriesMode mode) {
  validate_l(l);
  if (w_sign != 1 && w_sign != -1)
    throw std::invalid_argument("w_sign must be +1 or -1");
  if (!(y_cut > 0.0))
    throw std::invalid_argument("y_cut must be positive");
  return mode == SeriesMode::closed ? c_closed(w_sign, alpha_plus_s, l, y_cut)
                                    : c_brute(w_sign, alpha_plus_s, l, y_cut);
}

cplx c_series(int w_sign, cplx alpha_plus_s, long long l, double y_cut,
              SeriesMode mode) {
  return c_series_full(w_sign, alpha_plus_s, l, y_cut, mode).value;
}

cplx c_local_factor(long long p, bool p_divides_a, cplx w, cplx alpha_plus_s) {
  require_odd_prime(p);
  const cplx zn = 1.0 + 2.0 * w;
  if (zn.real() < 0.05)
    throw std::domain_error("local factor needs Re(1+2w) > 0.05");
  const double pd = static_cast<double>(p);
  const double logp = std::log(pd);
  const cplx theta = alpha_plus_s;
  const int jmax = std::clamp(
      static_cast<int>(std::ceil(16.0 * std::log(10.0) / (zn.real() * logp))), 4,
      4000);
  const double inv_weight = 1.0 / (1.0 + 1.0 / pd);
  const cplx gcd_pow =
      p_divides_a ? cplx{1.0, 0.0} : std::exp(-(2.0 + w - theta) * logp);
  cplx total = 0.0;
  for (int r = 0; r <= 1; ++r) {
    const cplx rfac = (r == 0) ? cplx{1.0, 0.0} : -pinv(logp, 1.0 + theta + w) * gcd_pow;
    for (int j = 0; j <= jmax; ++j) {
      cplx term = rfac * pinv(logp, zn * static_cast<double>(j));
      if (j + r > 0) term *= inv_weight;
      total += term;
    }
  }
  return total * (1.0 - pinv(logp, zn));
}

// ---------------------------------------------------------------------------
// H-family local factors.

cplx h_p_factor(long long k1, long long p, cplx v, cplx w) {
  validate_k1(k1);
  require_odd_prime(p);
  const double chi = kronecker(k1, p);
  const double logp = std::log(static_cast<double>(p));
  const cplx d1 = 1.0 - pinv(logp, v);
  const cplx d2 = 1.0 - pinv(logp, v + 2.0 * w);
  const cplx d3 = 1.0 - chi * pinv(logp, 0.5 + w);
  if (std::abs(d1) < 1e-12 || std::abs(d2) < 1e-12 || std::abs(d3) < 1e-12)
    throw std::domain_error("local factor: denominator vanishes");
  return (1.0 - pinv(logp, 1.0 + 2.0 * w)) *
         (1.0 - chi * pinv(logp, 0.5 + v + w)) / (d1 * d2 * d3);
}

cplx j_p(long long k1, long long p, cplx v, cplx w) {
  validate_k1(k1);
  require_odd_prime(p);
  return j_p_chi(kronecker(k1, p), p, v, w);
}

SeriesValue j_p_brute(long long k1, long long p, cplx v, cplx w) {
  validate_k1(k1);
  require_odd_prime(p);
  if (v.real() < 1.0 || w.real() < 1.0)
    throw std::domain_error("brute twist factor needs Re v >= 1 and Re w >= 1");

  int rmax = 0;
  long long q = p;
  while (q <= 100000 / p) {
    q *= p;
    ++rmax;
  }
  const double logp = std::log(static_cast<double>(p));
  int jmax = std::clamp(
      static_cast<int>(std::ceil(20.0 * std::log(10.0) / (v.real() * logp))), 2, 60);
  while (jmax > 0 &&
         static_cast<double>(std::llabs(k1)) * std::pow(static_cast<double>(p), 2.0 * jmax) >
             4.0e18)
    --jmax;

  cplx total = 0.0;
  long long kj = k1;
  for (int j = 0; j <= jmax; ++j) {
    long long pr = p;
    for (int r = 0; r <= rmax; ++r) {
      const double g = gauss_closed(kj, pr).real();
      if (g != 0.0)
        total += g / static_cast<double>(pr) *
                 pinv(logp, v * static_cast<double>(j) + w * static_cast<double>(r));
      pr *= p;
    }
    if (j < jmax) kj *= p * p;
  }
  const double sv = v.real(), sw = w.real();
  const double geo_v = 1.0 / (1.0 - std::pow(static_cast<double>(p), -sv));
  const double geo_w = 1.0 / (1.0 - std::pow(static_cast<double>(p), -sw));
  const double r_tail =
      geo_v * std::pow(static_cast<double>(p), -sw * (rmax + 1)) * geo_w;
  const double j_tail =
      geo_w * std::pow(static_cast<double>(p), -sv * (jmax + 1)) * geo_v;
  return {total, r_tail + j_tail};
}

// ---------------------------------------------------------------------------
// H(k1, l; v, w)

namespace {

cplx h_closed(long long k1, long long l, long long a, cplx v, cplx w) {
  if (w.real() < 0.7)
    throw std::domain_error("closed H needs Re w >= 0.7 (truncated L-series)");
  const std::vector<long long> lp = prime_factors(l);
  const std::vector<long long> excl = merged_excluded(a, l);
  cplx val = zeta_excl(v, lp) * zeta_excl(v + 2.0 * w, excl) *
             real_char_l(0.5 + w, k1, excl) /
             (zeta_excl(1.0 + 2.0 * w, excl) * real_char_l(0.5 + v + w, k1, excl));
  for (long long p : lp) val *= j_p(k1, p, v, w);
  return val;
}

struct BruteSums {
  cplx total{0.0, 0.0};
  double octave_k = 0.0;
  double octave_n = 0.0;
  long long k2max = 0;
  long long nmax = 0;
};

// Shared (k2, n) double-sum engine. sign_odd_k2 multiplies odd-k2 terms by
// -1 (the alternating variant).
BruteSums h_brute_engine(long long k1, long long l, long long a, cplx v, cplx w,
                         K2Filter filter, bool alternate_sign) {
  const double sv = v.real(), sw = w.real();
  const double target = 3e-7;
  // Truncation lengths come from the average |G_k(m)|/m ~ m^{-1/2}: the
  // n-direction tail beyond N is about 0.7 N^{1/2 - Re w}, the k2-direction
  // tail beyond K about K^{1 - Re v} (prefactors measured on the final
  // computed octaves; the reported bound is rebuilt from those octaves, the
  // model here only sizes the truncation).
  long long nmax = static_cast<long long>(
      std::ceil(std::pow(1.4 / target, 1.0 / (sw - 0.5))));
  nmax = std::clamp<long long>(nmax, 256, 100000 / l);
  long long k2max = static_cast<long long>(
      std::ceil(std::pow(2.0 / target, 1.0 / (sv - 1.0))));
  k2max = std::clamp<long long>(k2max, 64, 8000);

  const SieveTables& tables = big_tables();
  const long long mmax = l * nmax;
  std::vector<double> g(static_cast<std::size_t>(mmax) + 1, 0.0);
  std::vector<double> gpp(100001, 0.0);
  const std::vector<char> ok = coprime_mask(a, nmax);
  std::vector<cplx> coef(static_cast<std::size_t>(nmax) + 1);
  for (long long n = 1; n <= nmax; n += 2)
    if (ok[n]) coef[n] = ninv(n, w) / static_cast<double>(l * n);

  BruteSums out;
  out.k2max = k2max;
  out.nmax = nmax;
  for (long long k2 = 1; k2 <= k2max; ++k2) {
    if (filter == K2Filter::even_only && k2 % 2 == 1) continue;
    if (filter == K2Filter::odd_only && k2 % 2 == 0) continue;
    const long long k = k1 * k2 * k2;
    gauss_fill_odd(k, mmax, tables, gpp, g);
    cplx kfac = ninv(k2, v);
    if (alternate_sign && k2 % 2 == 1) kfac = -kfac;
    cplx inner = 0.0;
    double inner_oct = 0.0;
    for (long long n = 1; n <= nmax; n += 2) {
      if (!ok[n]) continue;
      const double gv = g[l * n];
      if (gv == 0.0) continue;
      const cplx term = gv * coef[n];
      inner += term;
      if (2 * n > nmax) inner_oct += std::abs(term);
    }
    out.total += kfac * inner;
    const double akfac = std::abs(kfac);
    out.octave_n += akfac * inner_oct;
    if (2 * k2 > k2max) out.octave_k += akfac * std::abs(inner);
  }
  return out;
}

SeriesValue h_brute_bounded(long long k1, long long l, long long a, cplx v, cplx w,
                            K2Filter filter, bool alternate_sign) {
  if (v.real() < 2.0 || w.real() < 1.2)
    throw std::domain_error("brute H needs Re v >= 2 and Re w >= 1.2");
  const BruteSums s = h_brute_engine(k1, l, a, v, w, filter, alternate_sign);
  const double rho_k = std::min(0.8, std::pow(2.0, 1.0 - v.real()));
  const double rho_n = std::min(0.8, std::pow(2.0, 0.5 - w.real()));
  const double bound = 2.0 * (s.octave_k * rho_k / (1.0 - rho_k) +
                              s.octave_n * rho_n / (1.0 - rho_n));
  return {s.total, bound};
}

}  // namespace

SeriesValue h_series_brute_filtered(long long k1, long long l, long long a,
                                    cplx v, cplx w, K2Filter filter,
                                    bool alternate_sign) {
  validate_k1(k1);
  validate_l(l);
  validate_a(a, l);
  return h_brute_bounded(k1, l, a, v, w, filter, alternate_sign);
}

SeriesValue h_series_full(long long k1, long long l, long long a, cplx v, cplx w,
                          SeriesMode mode) {
  validate_k1(k1);
  validate_l(l);
  validate_a(a, l);
  if (mode == SeriesMode::brute)
    return h_brute_bounded(k1, l, a, v, w, K2Filter::all, false);
  const cplx val = h_closed(k1, l, a, v, w);
  return {val, 5e-9 * (1.0 + std::abs(val))};
}

cplx h_series(long long k1, long long l, long long a, cplx v, cplx w,
              SeriesMode mode) {
  return h_series_full(k1, l, a, v, w, mode).value;
}

SeriesValue h_minus1_full(long long k1, long long l, long long a, cplx v, cplx w,
                          SeriesMode mode) {
  validate_k1(k1);
  validate_l(l);
  validate_a(a, l);
  if (mode == SeriesMode::brute)
    return h_brute_bounded(k1, l, a, v, w, K2Filter::all, true);
  const cplx factor = std::pow(cplx{2.0, 0.0}, 1.0 - v) - 1.0;
  const cplx val = factor * h_closed(k1, l, a, v, w);
  return {val, 5e-9 * (1.0 + std::abs(val))};
}

cplx h_minus1(long long k1, long long l, long long a, cplx v, cplx w) {
  return h_minus1_full(k1, l, a, v, w, SeriesMode::closed).value;
}

// ---------------------------------------------------------------------------
// A_{epsilon,l}(u, w)

namespace {

void validate_epsilon(int epsilon) {
  if (epsilon != 1 && epsilon != -1)
    throw std::invalid_argument("epsilon must be +1 or -1");
}

cplx a_k1_term_impl(int epsilon, long long l, long long a, long long k1, cplx u,
                    cplx w, double ltol) {
  const std::vector<long long> excl = merged_excluded(a, l);
  // The trivial character gives plain zeta ratios; evaluating them through
  // zeta_excl keeps this term usable left of the L-series convergence line,
  // which the residue extraction at w near 1/2 needs.
  const cplx lr =
      (epsilon * k1 == 1)
          ? zeta_excl(0.5 + w, excl) / zeta_excl(0.5 + 2.0 * u + w, excl)
          : real_char_l(0.5 + w, epsilon * k1, excl, ltol) /
                real_char_l(0.5 + 2.0 * u + w, epsilon * k1, excl, ltol);
  cplx jprod = 1.0;
  for (long long p : prime_factors(l)) jprod *= j_p(epsilon * k1, p, 2.0 * u, w);
  cplx term = ninv(k1, u) * lr * jprod;
  if (k1 % 2 == 1) term *= std::pow(cplx{2.0, 0.0}, 1.0 - 2.0 * u) - 1.0;
  return term;
}

// Truncated squarefree-k1 sum of the closed A-series, with the neutral part
// of the tail (character ratio replaced by its limit 1) completed through
// zeta and L values for l = 1 and prime l. The completion splits k1 by
// parity and, for prime l, by kronecker(k1, p), since the twist-prime factor
// depends on k1 only through that symbol.
SeriesValue a_closed(int epsilon, long long l, long long a, cplx u, cplx w) {
  if (u.real() < 1.2 || w.real() < 0.7)
    throw std::domain_error("closed A needs Re u >= 1.2 and Re w >= 0.7");
  const long long k1cap = 10000;
  const SieveTables& tables = big_tables();
  const std::vector<long long> excl = merged_excluded(a, l);
  const std::vector<long long> lp = prime_factors(l);
  const cplx s_num = 0.5 + w, s_den = 0.5 + 2.0 * u + w;
  const cplx odd_factor = std::pow(cplx{2.0, 0.0}, 1.0 - 2.0 * u) - 1.0;
  const double su = u.real();

  const long long lprime = (lp.size() == 1) ? lp[0] : 0;
  const bool completable = (l == 1) || (lprime != 0);

  // Class accumulators for the completion: parity x chi-class, chi = value of
  // kronecker(k1, lprime) (single class when l = 1).
  cplx cls[2][3] = {};
  auto cls_index = [&](long long k1) {
    if (lprime == 0) return 0;
    const int chi = kronecker(k1, lprime);
    return chi == 0 ? 2 : (chi == 1 ? 0 : 1);
  };

  cplx sum = 0.0;
  double err_ltol = 0.0;
  double dev_max = 0.0;
  for (long long k1 = 1; k1 <= k1cap; ++k1) {
    if (tables.moebius[k1] == 0) continue;
    // Relaxed per-k1 truncation tolerance: the k1^{-u} weight damps the
    // effect of loose L values at large k1.
    const double ltol = std::clamp(3e-9 * std::pow(static_cast<double>(k1), 1.5),
                                   3e-9, 1e-4);
    const cplx lnum = real_char_l(s_num, epsilon * k1, excl, ltol);
    const cplx lden = real_char_l(s_den, epsilon * k1, excl, ltol);
    const cplx lr = lnum / lden;
    cplx jprod = 1.0;
    for (long long p : lp) jprod *= j_p_chi(kronecker(epsilon * k1, p), p, 2.0 * u, w);
    cplx term = ninv(k1, u) * lr * jprod;
    const double wk = std::abs(ninv(k1, u)) * std::abs(jprod);
    if (k1 % 2 == 1) term *= odd_factor;
    sum += term;
    err_ltol += 3.0 * ltol * wk * std::max(1.0, std::abs(odd_factor));
    if (2 * k1 > k1cap) dev_max = std::max(dev_max, std::abs(lr - 1.0));
    cls[k1 % 2 == 0 ? 1 : 0][cls_index(k1)] += ninv(k1, u);
  }

  double comp_bound = 0.0;
  if (completable) {
    // Infinite class sums over positive squarefree k1 weighted k1^{-u}:
    //   odd, coprime:  A = zeta_{2p}(u)/zeta_{2p}(2u)   (p = lprime; {2} for l=1)
    //   odd, symbol-weighted: B = L_2(u, chi_{p*}) / zeta_{2p}(2u),
    //     p* = p or -p so that kronecker(p*, .) restricts to (.|p) on odd
    //     positive arguments; even classes are 2^{-u} times odd classes with
    //     the symbol twisted by kronecker(2, p); p | k1 contributes p^{-u} A.
    cplx inf[2][3] = {};
    if (l == 1) {
      const cplx all_sf = zeta(u) / zeta(2.0 * u);
      const cplx odd_sf = all_sf / (1.0 + ninv(2, u));
      inf[0][0] = odd_sf;
      inf[1][0] = ninv(2, u) * odd_sf;
    } else {
      const long long p = lprime;
      const long long pstar = (p % 4 == 1) ? p : -p;
      const cplx z2p = zeta_excl(2.0 * u, {2, p});
      const cplx acop = zeta_excl(u, {2, p}) / z2p;
      const cplx bsym = real_char_l(u, pstar, {2}, 1e-10) / z2p;
      const cplx odd_plus = 0.5 * (acop + bsym);
      const cplx odd_minus = 0.5 * (acop - bsym);
      const cplx odd_zero = ninv(p, u) * acop;
      inf[0][0] = odd_plus;
      inf[0][1] = odd_minus;
      inf[0][2] = odd_zero;
      const int s2 = kronecker(2, p);
      const cplx tw = ninv(2, u);
      inf[1][0] = tw * (s2 == 1 ? odd_plus : odd_minus);
      inf[1][1] = tw * (s2 == 1 ? odd_minus : odd_plus);
      inf[1][2] = tw * odd_zero;
    }
    const int nclasses = (l == 1) ? 1 : 3;
    for (int par = 0; par < 2; ++par) {
      for (int ci = 0; ci < nclasses; ++ci) {
        const cplx tail = inf[par][ci] - cls[par][ci];
        cplx jv = 1.0;
        if (lprime != 0) {
          const int chi_cls = (ci == 0) ? 1 : (ci == 1 ? -1 : 0);
          jv = j_p_chi(kronecker(epsilon, lprime) * chi_cls, lprime, 2.0 * u, w);
        }
        cplx add = tail * jv;
        if (par == 0) add *= odd_factor;
        sum += add;
        comp_bound += std::abs(tail) * std::abs(jv) *
                      (par == 0 ? std::abs(odd_factor) : 1.0) *
                      std::max(0.05, 2.0 * dev_max);
      }
    }
  } else {
    // No completion: the dropped tail keeps its neutral part; bound it by
    // the largest late-term scale times the integral tail of k1^{-u}.
    comp_bound = 4.0 * std::pow(static_cast<double>(k1cap), 1.0 - su) / (su - 1.0);
  }

  cplx pref = zeta_excl(2.0 * u, lp) * zeta_excl(2.0 * u + 2.0 * w, excl) /
              zeta_excl(1.0 + 2.0 * w, excl);
  const double bound = std::abs(pref) * (err_ltol + comp_bound);
  return {pref * sum, bound};
}

SeriesValue a_brute(int epsilon, long long l, long long a, cplx u, cplx w) {
  if (u.real() < 1.5 || w.real() < 1.2)
    throw std::domain_error("brute A needs Re u >= 1.5 and Re w >= 1.2");
  const double sw = w.real();
  const double target = 3e-7;
  long long nmax = static_cast<long long>(
      std::ceil(std::pow(1.4 / target, 1.0 / (sw - 0.5))));
  nmax = std::clamp<long long>(nmax, 256, 100000 / l);

  const SieveTables& tables = big_tables();
  const long long mmax = l * nmax;
  std::vector<double> g(static_cast<std::size_t>(mmax) + 1, 0.0);
  std::vector<double> gpp(100001, 0.0);
  const std::vector<char> ok = coprime_mask(a, nmax);
  std::vector<cplx> coef(static_cast<std::size_t>(nmax) + 1);
  for (long long n = 1; n <= nmax; n += 2)
    if (ok[n]) coef[n] = ninv(n, w) / static_cast<double>(l * n);

  // The k-direction relies on the (-1)^k sign and the near-periodicity of
  // G_k in k for cancellation well beyond the absolute k^{-Re u} rate, so the
  // sum is extended in doubling stages until the stage increment settles; the
  // reported bound is twice the last increment (geometric-decay model).
  const long long kcap = 8192;
  cplx total = 0.0;
  double octave_n = 0.0;
  cplx stage_prev = 0.0;
  double delta_last = 0.0;
  long long stage_end = 512;
  for (long long k = 1; k <= kcap; ++k) {
    const long long kk = epsilon * k;
    gauss_fill_odd(kk, mmax, tables, gpp, g);
    cplx kfac = ninv(k, u);
    if (k % 2 == 1) kfac = -kfac;
    cplx inner = 0.0;
    double inner_oct = 0.0;
    for (long long n = 1; n <= nmax; n += 2) {
      if (!ok[n]) continue;
      const double gv = g[l * n];
      if (gv == 0.0) continue;
      const cplx term = gv * coef[n];
      inner += term;
      if (2 * n > nmax) inner_oct += std::abs(term);
    }
    total += kfac * inner;
    octave_n += std::abs(kfac) * inner_oct;
    if (k == stage_end) {
      delta_last = std::abs(total - stage_prev);
      stage_prev = total;
      if (delta_last <= 0.25 * target && k >= 2048) break;
      stage_end *= 2;
    }
  }
  const double rho_n = std::min(0.8, std::pow(2.0, 0.5 - sw));
  const double bound =
      2.0 * delta_last + 2.0 * octave_n * rho_n / (1.0 - rho_n);
  return {total, bound};
}

}  // namespace

SeriesValue a_series_full(int epsilon, long long l, long long a, cplx u, cplx w,
                          SeriesMode mode) {
  validate_epsilon(epsilon);
  validate_l(l);
  validate_a(a, l);
  return mode == SeriesMode::brute ? a_brute(epsilon, l, a, u, w)
                                   : a_closed(epsilon, l, a, u, w);
}

cplx a_series(int epsilon, long long l, long long a, cplx u, cplx w,
              SeriesMode mode) {
  return a_series_full(epsilon, l, a, u, w, mode).value;
}

cplx a_series_k1_term(int epsilon, long long l, long long a, long long k1,
                      cplx u, cplx w) {
  validate_epsilon(epsilon);
  validate_l(l);
  validate_a(a, l);
  if (k1 < 1) throw std::invalid_argument("k1 must be a positive squarefree integer");
  validate_k1(k1);
  return a_k1_term_impl(epsilon, l, a, k1, u, w, 1e-10);
}

cplx a_series_prefactor(long long l, long long a, cplx u, cplx w) {
  validate_l(l);
  validate_a(a, l);
  const std::vector<long long> excl = merged_excluded(a, l);
  return zeta_excl(2.0 * u, prime_factors(l)) *
         zeta_excl(2.0 * u + 2.0 * w, excl) / zeta_excl(1.0 + 2.0 * w, excl);
}

}  // namespace qdl
