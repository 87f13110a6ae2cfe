#include "qdl/lvalue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdl {

namespace {

void validate_d(long long d, const char* who) {
  if (d <= 0 || (d & 1) == 0 || !is_squarefree_ll(d))
    throw std::invalid_argument(std::string(who) +
                                ": d must be odd, squarefree, positive");
}

long long fixed_truncation(long long d, double multiplier) {
  double n = multiplier * std::sqrt(static_cast<double>(d)) *
             std::log(2.0 + static_cast<double>(d));
  return std::max<long long>(8, static_cast<long long>(std::ceil(n)));
}

// Polya-Vinogradov tail bound for sum_{n > N} chi_{8d}(n) n^{-1/2-b} V(n/sqrt d):
// character partial sums are <= sqrt(8d) log(8d), and partial summation against
// the decreasing envelope pieces gives the factor 2.
double pv_tail_bound(long long d, double re_b, long long n_cut,
                     const VCache& cache) {
  double q = 8.0 * static_cast<double>(d);
  double pv = std::sqrt(q) * std::log(q);
  double expo = -0.5 - std::min(re_b, 0.0);
  return 2.0 * pv * std::pow(static_cast<double>(n_cut), expo) *
         cache.tail_envelope(static_cast<double>(n_cut) /
                             std::sqrt(static_cast<double>(d)));
}

// Smallest N in [64, n_max] whose tail bound is <= target, or 0 if none.
long long adaptive_truncation(long long d, double re_b, double target,
                              const VCache& cache, long long n_max) {
  if (pv_tail_bound(d, re_b, n_max, cache) > target) return 0;
  long long lo = 64, hi = lo;
  while (hi < n_max && pv_tail_bound(d, re_b, hi, cache) > target)
    hi = std::min(n_max, hi * 2);
  lo = hi / 2;
  while (lo + 1 < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (pv_tail_bound(d, re_b, mid, cache) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

AfeResult l_afe_full(long long d, cplx alpha, const AfeParams& params,
                     const SieveTables& tables, const VCache& vplus,
                     const VCache& vminus) {
  validate_d(d, "l_afe_full");
  if (std::abs(alpha) > 0.25)
    throw std::invalid_argument("l_afe_full: |alpha| must be <= 1/4");
  if (params.tail_bound_target < 0.0)
    throw std::invalid_argument("l_afe_full: tail_bound_target must be >= 0");
  params.contour.validate();

  const double sqrtd = std::sqrt(static_cast<double>(d));
  const cplx xa = x_alpha_factor(d, alpha);
  const double xa_abs = std::abs(xa);

  long long np, nm;
  if (params.tail_bound_target > 0.0) {
    double t = params.tail_bound_target;
    long long cap_p =
        static_cast<long long>(std::floor(vplus.xmax() * sqrtd));
    long long cap_m =
        static_cast<long long>(std::floor(vminus.xmax() * sqrtd));
    np = adaptive_truncation(d, alpha.real(), 0.5 * t, vplus, cap_p);
    nm = adaptive_truncation(d, -alpha.real(), 0.5 * t / xa_abs, vminus,
                             cap_m);
    if (np == 0 || nm == 0)
      throw std::runtime_error(
          "l_afe_full: tail_bound_target unreachable within the V cache "
          "domain; rebuild the caches with a larger xmax");
  } else {
    np = nm = fixed_truncation(d, params.truncation_multiplier);
    double cap = std::min(vplus.xmax(), vminus.xmax()) * sqrtd;
    if (static_cast<double>(np) > cap)
      throw std::invalid_argument(
          "l_afe_full: V caches do not cover the truncation point");
  }
  long long nmax = std::max(np, nm);
  if (nmax > tables.limit)
    throw std::invalid_argument(
        "l_afe_full: sieve tables do not cover the truncation point");

  static thread_local std::vector<std::int8_t> chi;
  chi8d_sieve(d, nmax, tables, chi);

  cplx acc_p = 0.0, acc_m = 0.0;
  const double inv_sqrtd = 1.0 / sqrtd;
  if (alpha == cplx(0.0) && np == nm) {
    // at the central point both sums coincide (X_0 = 1 exactly)
    for (long long n = 1; n <= np; ++n) {
      int c = chi[n];
      if (c == 0) continue;
      acc_p += static_cast<double>(c) / std::sqrt(static_cast<double>(n)) *
               vplus.eval(static_cast<double>(n) * inv_sqrtd);
    }
    acc_m = acc_p;
  } else if (alpha.imag() == 0.0) {
    // real shift: one exponential serves both sums via wp * wm = 1/n
    double a = alpha.real();
    for (long long n = 1; n <= nmax; ++n) {
      int c = chi[n];
      if (c == 0) continue;
      double wp = std::exp(-(0.5 + a) * std::log(static_cast<double>(n)));
      double x = static_cast<double>(n) * inv_sqrtd;
      if (n <= np) acc_p += static_cast<double>(c) * wp * vplus.eval(x);
      if (n <= nm)
        acc_m += static_cast<double>(c) / (static_cast<double>(n) * wp) *
                 vminus.eval(x);
    }
  } else {
    for (long long n = 1; n <= nmax; ++n) {
      int c = chi[n];
      if (c == 0) continue;
      double lnn = std::log(static_cast<double>(n));
      cplx wp = std::exp(-(0.5 + alpha) * lnn);
      double x = static_cast<double>(n) * inv_sqrtd;
      if (n <= np) acc_p += static_cast<double>(c) * wp * vplus.eval(x);
      if (n <= nm)
        acc_m += static_cast<double>(c) /
                 (static_cast<double>(n) * wp) * vminus.eval(x);
    }
  }

  AfeResult r;
  r.value = acc_p + xa * acc_m;
  r.tail_bound = pv_tail_bound(d, alpha.real(), np, vplus) +
                 xa_abs * pv_tail_bound(d, -alpha.real(), nm, vminus);
  r.nterms = np + nm;
  return r;
}

cplx l_afe(long long d, cplx alpha, const AfeParams& params) {
  validate_d(d, "l_afe");
  if (std::abs(alpha) > 0.25)
    throw std::invalid_argument("l_afe: |alpha| must be <= 1/4");

  double sqrtd = std::sqrt(static_cast<double>(d));
  long long nfix = fixed_truncation(d, params.truncation_multiplier);
  double xmax = 1.02 * static_cast<double>(nfix) / sqrtd;
  // adaptive targets need far deeper V coverage than the fixed schedule;
  // start near the typical 1e-8-target depth to avoid most retries
  if (params.tail_bound_target > 0.0) xmax = std::max(xmax, 3000.0);
  for (int attempt = 0;; ++attempt) {
    VCache vp = build_v_cache(alpha, params.gspec, xmax, 400, params.contour);
    VCache vm = build_v_cache(-alpha, params.gspec, xmax, 400, params.contour);
    long long cover = static_cast<long long>(std::floor(xmax * sqrtd));
    SieveTables tables = build_sieves(std::max(nfix, cover) + 1);
    try {
      return l_afe_full(d, alpha, params, tables, vp, vm).value;
    } catch (const std::runtime_error&) {
      // tail target unreachable at this cache size; enlarge and retry
      if (attempt >= 12) throw;
      xmax *= 2.0;
    }
  }
}

cplx l_oracle(long long d, cplx s) {
  validate_d(d, "l_oracle");
  long long q = 8 * d;
  if (q > 100000)
    throw std::invalid_argument("l_oracle: 8d must be <= 1e5");
  if (s.real() < 0.4)
    throw std::domain_error("l_oracle: Re s must be >= 0.4");
  if (std::abs(s - 1.0) < 1e-6)
    throw std::domain_error("l_oracle: s too close to the zeta pole at 1");

  cplx acc = 0.0;
  double qd = static_cast<double>(q);
  for (long long a = 1; a < q; a += 2) {
    int c = chi8d(d, a);
    if (c != 0) acc += static_cast<double>(c) * hurwitz(s, a / qd);
  }
  return std::exp(-s * std::log(qd)) * acc;
}

}  // namespace qdl
