#include "qdl/moment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qdl/arith.hpp"
#include "qdl/parallel.hpp"
#include "qdl/series.hpp"

namespace qdl {

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::vector<long long> kExcl2{2};

cplx pow_pos(double base, cplx e) { return std::exp(e * std::log(base)); }

struct Kahan {
  cplx sum{0.0, 0.0};
  cplx c{0.0, 0.0};
  void add(cplx v) {
    const cplx y = v - c;
    const cplx t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

bool contains_ll(const std::vector<long long>& v, long long p) {
  for (long long q : v)
    if (q == p) return true;
  return false;
}

// Odd squarefree support indices a <= Y coprime to l, with the per-index
// constants every contour node reuses.
struct AItem {
  long long a = 1;
  double mu = 1.0;
  double ln_a = 0.0;
  double inv_a2 = 1.0;
  double heavy = 1.0;  // prod_{p|a} (1 + 1/p)^{-1}
  std::vector<long long> primes;
};

std::vector<AItem> a_items_upto(double y, long long l) {
  std::vector<AItem> out;
  if (y < 1.0) return out;
  const long long ymax = static_cast<long long>(std::floor(y));
  for (long long a = 1; a <= ymax; a += 2) {
    if (std::gcd(a, l) != 1) continue;
    if (!is_squarefree_ll(a)) continue;
    AItem it;
    it.a = a;
    it.primes = prime_factors(a);
    it.mu = (it.primes.size() % 2 == 0) ? 1.0 : -1.0;
    it.ln_a = std::log(static_cast<double>(a));
    it.inv_a2 = 1.0 / (static_cast<double>(a) * static_cast<double>(a));
    for (long long p : it.primes) it.heavy *= static_cast<double>(p) / (p + 1.0);
    out.push_back(std::move(it));
  }
  return out;
}

// Primes (with cached logs) for the closed completion of the a > Y sums.
struct PrimeTab {
  std::vector<long long> p;
  std::vector<double> lnp;
};

const PrimeTab& completion_primes() {
  static const PrimeTab tab = [] {
    PrimeTab t;
    t.p = primes_upto(1'000'000);
    t.lnp.reserve(t.p.size());
    for (long long q : t.p) t.lnp.push_back(std::log(static_cast<double>(q)));
    return t;
  }();
  return tab;
}

// Cutoff for the completion products: the per-prime correction decays like
// p^{-1-Re(zc)}, so the dropped tail is below ~1e-10 at these cutoffs except
// in the most extreme corner of the shift box, where it degrades gracefully.
long long completion_cutoff(double re_zc) {
  if (re_zc >= 1.9) return 10'000;
  if (re_zc >= 1.7) return 40'000;
  if (re_zc >= 1.5) return 200'000;
  return 1'000'000;
}

// (1/(2 pi i)) integral of f along Re s = sigma, trapezoid with the contour's
// step. The node callback receives s and the weight Mellin value at
// mell_base + power + i j mell_dt (one shared-quadrature line evaluation per
// segment). Octave rings double the height until the newest ring contributes
// <= 1e-10 in absolute value.
cplx integrate_vertical(double sigma, const ContourSpec& contour,
                        const TiltedWeight& weight, cplx mell_base,
                        double mell_dt,
                        const std::function<cplx(cplx, cplx)>& node) {
  const double h = contour.step;
  const cplx base = mell_base + weight.power;
  auto segment = [&](int jmin, int jmax) -> cplx {
    const std::vector<cplx> mell =
        mellin_phi_line(weight.base, base, mell_dt, jmin, jmax);
    Kahan acc;
    for (int j = jmin; j <= jmax; ++j)
      acc.add(node(cplx(sigma, h * j), mell[static_cast<size_t>(j - jmin)]));
    return acc.sum;
  };
  const double scale = h / (2.0 * kPi);
  int jlo = static_cast<int>(std::llround(0.5 * contour.height / h));
  if (jlo < 1) jlo = 1;
  cplx total = segment(-jlo, jlo);
  for (;;) {
    const int jhi = 2 * jlo;
    const cplx ring = segment(jlo + 1, jhi) + segment(-jhi, -(jlo + 1));
    total += ring;
    if (std::abs(ring) * scale <= 1e-10) break;
    jlo = jhi;
    if (h * jlo > 80.0)
      throw std::runtime_error(
          "moment contour: height extension passed 80 without settling");
  }
  return total * scale;
}

// Shared per-twist constants of the contour pieces.
struct PieceCtx {
  double X = 0.0;
  cplx alpha{};
  long long l = 1;
  std::vector<long long> lp;      // odd primes of l
  std::vector<long long> excl2l;  // {2} + primes of l
  double phi_over_l = 1.0;        // prod_{p|l} (1 - 1/p)
  double lhead = 1.0;             // prod_{p|l} (1 + 1/p)^{-1}
  double ln_x = 0.0;
  double ln_l = 0.0;
  double sigma = 0.0;  // abscissa magnitude
  GSpec gspec;
  cplx z22{};    // zeta_2(2)
  cplx z2l_2{};  // zeta_{2l}(2)
  std::vector<AItem> items;
  long long pcut_plus = 0;   // completion cutoff on the right line
  long long pcut_minus = 0;  // and on the left line
};

void validate_piece(double x, const ShiftTwist& st, double y,
                    const ContourSpec& contour) {
  st.validate();
  contour.validate();
  if (!(x > 0.0)) throw std::invalid_argument("moment piece: X must be positive");
  if (st.alpha == cplx(0.0, 0.0))
    throw std::domain_error(
        "moment piece: alpha = 0 has no forced-zero smoothing factor; shift "
        "alpha off zero");
  if (std::abs(st.alpha.imag()) > 25.0)
    throw std::domain_error("moment piece: |Im alpha| must be <= 25");
  const double sig = std::abs(contour.abscissa);
  if (!(sig > 0.0) || sig > 0.2)
    throw std::invalid_argument(
        "moment piece: abscissa magnitude must lie in (0, 0.2]");
  if (std::abs(std::abs(st.alpha.real()) - sig) < 1e-3)
    throw std::domain_error(
        "moment piece: the interior zeta pole sits within 1e-3 of the "
        "integration line; move the abscissa");
  if (!(y >= 0.0) || y > 2e4)
    throw std::invalid_argument("moment piece: Y must lie in [0, 2e4]");
}

PieceCtx make_ctx(double x, const ShiftTwist& st, double y,
                  const ContourSpec& contour) {
  PieceCtx c;
  c.X = x;
  c.alpha = st.alpha;
  c.l = st.l;
  c.lp = prime_factors(st.l);
  c.excl2l = kExcl2;
  for (long long p : c.lp) c.excl2l.push_back(p);
  for (long long p : c.lp) {
    c.phi_over_l *= 1.0 - 1.0 / static_cast<double>(p);
    c.lhead *= static_cast<double>(p) / (p + 1.0);
  }
  c.ln_x = std::log(x);
  c.ln_l = std::log(static_cast<double>(st.l));
  c.sigma = std::abs(contour.abscissa);
  c.gspec = GSpec::remark_zero(st.alpha);
  c.z22 = zeta_excl(2.0, kExcl2);
  c.z2l_2 = zeta_excl(2.0, c.excl2l);
  c.items = a_items_upto(y, st.l);
  const double re2a = 2.0 * st.alpha.real();
  c.pcut_plus = completion_cutoff(2.0 + re2a + 2.0 * c.sigma);
  c.pcut_minus = completion_cutoff(2.0 + re2a - 2.0 * c.sigma);
  return c;
}

// prod over p <= cutoff, p coprime to 2l, of (1 + r_p) with
//   r_p = p^{-1-zc} (1 - 1/p) / ((1 - p^{-2})(1 - p^{-zc}))
// when diagonal_weights is true (the mu(a)/a^2 zeta-ratio family), or
//   r_p = p^{-1-zc} / ((1 + 1/p)(1 - p^{-zc}))
// otherwise (the mu(a) a^{-zc} (1+1/p)^{-1} family). Splitting these
// corrections off leaves only exact zeta factors in the completed sums.
cplx completion_product(cplx zc, const PieceCtx& c, long long cutoff,
                        bool diagonal_weights) {
  const PrimeTab& pt = completion_primes();
  cplx prod{1.0, 0.0};
  for (size_t i = 0; i < pt.p.size(); ++i) {
    const long long p = pt.p[i];
    if (p > cutoff) break;
    if (p == 2 || contains_ll(c.lp, p)) continue;
    const double pd = static_cast<double>(p);
    const cplx pzc = std::exp(-zc * pt.lnp[i]);
    cplx r;
    if (diagonal_weights) {
      r = (pzc / pd) * (1.0 - 1.0 / pd) /
          ((1.0 - 1.0 / (pd * pd)) * (1.0 - pzc));
    } else {
      r = (pzc / pd) / ((1.0 + 1.0 / pd) * (1.0 - pzc));
    }
    prod *= 1.0 + r;
  }
  return prod;
}

enum class ASide { below, above };

// The pair on Re s = +sigma: kernel
//   Phi~(1+s/2) (G/s) g_alpha X^{s/2} l^{-s},
// a-sum mu(a) a^{-2} zeta_{2a}(1+2alpha+2s) / zeta_{2al}(2+2alpha+2s),
// prefactor X (phi(l)/l) / (2 l^{1/2+alpha}).
cplx plus_pair(double x, const ShiftTwist& st, const TiltedWeight& weight,
               double y, const ContourSpec& contour, ASide side) {
  validate_piece(x, st, y, contour);
  weight.base.validate();
  const PieceCtx c = make_ctx(x, st, y, contour);
  if (side == ASide::below && c.items.empty()) return cplx{0.0, 0.0};

  auto node = [&](cplx s, cplx mell) -> cplx {
    const cplx zn = 1.0 + 2.0 * c.alpha + 2.0 * s;
    const cplx zc = zn + 1.0;
    const cplx z2zn = zeta_excl(zn, kExcl2);
    const cplx z2lzc = zeta_excl(zc, c.excl2l);
    Kahan below;
    for (const AItem& it : c.items) {
      cplx f = cplx(it.mu * it.inv_a2, 0.0);
      for (long long p : it.primes) {
        const double lnp = std::log(static_cast<double>(p));
        f *= (1.0 - std::exp(-zn * lnp)) / (1.0 - std::exp(-zc * lnp));
      }
      below.add(f);
    }
    cplx apart = below.sum * z2zn / z2lzc;
    if (side == ASide::above) {
      const cplx corr = completion_product(zc, c, c.pcut_plus, true);
      const cplx full = z2zn * corr / (c.z2l_2 * z2lzc);
      apart = full - apart;
    }
    const cplx shared = mell * (big_g(s, c.gspec) / s) * g_alpha(s, c.alpha) *
                        std::exp(0.5 * s * c.ln_x) * std::exp(-s * c.ln_l);
    return shared * apart;
  };

  const cplx base(1.0 + 0.5 * c.sigma, 0.0);
  const cplx integral = integrate_vertical(c.sigma, contour, weight, base,
                                           0.5 * contour.step, node);
  const cplx pref = 0.5 * x * c.phi_over_l *
                    std::exp(-(0.5 + c.alpha) * c.ln_l);
  return pref * integral;
}

// The pair on Re s = -sigma: kernel
//   Phi~(1+s/2) (G/s) g_alpha X^{s/2} l^{-alpha-s} zeta_2(1+2alpha+2s),
// a-sum mu(a) a^{-2-2alpha-2s} prod_{p|a}(1+1/p)^{-1},
// prefactor -X prod_{p|l}(1+1/p)^{-1} / (2 zeta_2(2) l^{1/2}).
cplx minus_pair(double x, const ShiftTwist& st, const TiltedWeight& weight,
                double y, const ContourSpec& contour, ASide side) {
  validate_piece(x, st, y, contour);
  weight.base.validate();
  const PieceCtx c = make_ctx(x, st, y, contour);
  if (side == ASide::below && c.items.empty()) return cplx{0.0, 0.0};
  const double sigma = -c.sigma;

  auto node = [&](cplx s, cplx mell) -> cplx {
    const cplx zn = 1.0 + 2.0 * c.alpha + 2.0 * s;
    const cplx zc = zn + 1.0;
    const cplx z2zn = zeta_excl(zn, kExcl2);
    Kahan below;
    for (const AItem& it : c.items)
      below.add(it.mu * it.heavy * std::exp(-zc * it.ln_a));
    cplx apart = below.sum;
    if (side == ASide::above) {
      const cplx full = completion_product(zc, c, c.pcut_minus, false) /
                        zeta_excl(zc, c.excl2l);
      apart = full - apart;
    }
    const cplx shared = mell * (big_g(s, c.gspec) / s) * g_alpha(s, c.alpha) *
                        std::exp(0.5 * s * c.ln_x) *
                        std::exp(-(c.alpha + s) * c.ln_l) * z2zn;
    return shared * apart;
  };

  const cplx base(1.0 + 0.5 * sigma, 0.0);
  const cplx integral = integrate_vertical(sigma, contour, weight, base,
                                           0.5 * contour.step, node);
  const cplx pref =
      -0.5 * x * c.lhead / (c.z22 * std::sqrt(static_cast<double>(st.l)));
  return pref * integral;
}

// First main-term addend: the closed residue the four pieces telescope to.
cplx closed_addend(double x, const ShiftTwist& st, const TiltedWeight& weight) {
  const cplx z22 = zeta_excl(2.0, kExcl2);
  const cplx zz = zeta_excl(1.0 + 2.0 * st.alpha, kExcl2);
  const cplx b = b_alpha(st.l, st.alpha, BAlphaMode::euler3);
  const cplx lpart =
      std::exp(-(0.5 + st.alpha) * std::log(static_cast<double>(st.l)));
  return 0.5 * x * weight.mellin(cplx(1.0, 0.0)) / z22 * lpart * zz * b;
}

// Averaged main term centered at `center`, for the pole-cancelling alpha -> 0
// path and for shifts too small to evaluate directly.
cplx main_term_averaged(double x, cplx center, long long l,
                        const SmoothWeight& weight) {
  auto at = [&](double d) {
    const ShiftTwist st{center + d, l};
    return main_term(x, st, TiltedWeight(weight));
  };
  const double d1 = 1e-3, d2 = 5e-4;
  const cplx s1 = 0.5 * (at(d1) + at(-d1));
  const cplx s2 = 0.5 * (at(d2) + at(-d2));
  return (4.0 * s2 - s1) / 3.0;
}

// Sieve tables plus kernel caches shared by every discriminant of a run.
struct AfeContext {
  SieveTables tables;
  VCache vplus;
  VCache vminus;
  AfeParams params;
};

AfeContext build_afe_context(cplx alpha, const AfeParams& params,
                             long long dmax) {
  long long table_limit = 1LL << 19;
  double xmax = 4096.0;
  long long dprobe = dmax;
  for (int attempt = 0;; ++attempt) {
    AfeContext ctx{build_sieves(std::max(table_limit, dmax + 1)),
                   build_v_cache(alpha, params.gspec, xmax, 400, params.contour),
                   build_v_cache(-alpha, params.gspec, xmax, 400, params.contour),
                   params};
    // Probe the largest discriminant: the truncation chooser throws when the
    // tables or the cache domain cannot reach the tail target.
    const auto& ds = ctx.tables.odd_squarefree;
    auto hi = std::upper_bound(ds.begin(), ds.end(), dprobe);
    if (hi == ds.begin()) return ctx;
    const long long d = *(hi - 1);
    try {
      l_afe_full(d, alpha, ctx.params, ctx.tables, ctx.vplus, ctx.vminus);
      return ctx;
    } catch (const std::exception&) {
      if (attempt >= 6) throw;
      table_limit *= 2;
      xmax *= 2.0;
    }
  }
}

struct BruteWindow {
  long long idx_lo = 0;  // index range into tables.odd_squarefree
  long long idx_hi = 0;
};

BruteWindow window_of(const SieveTables& tables, double x, double x0,
                      double x1) {
  const auto& ds = tables.odd_squarefree;
  const long long dmin =
      std::max<long long>(1, static_cast<long long>(std::ceil(x0 * x)));
  const long long dmax = static_cast<long long>(std::floor(x1 * x));
  BruteWindow w;
  w.idx_lo = std::lower_bound(ds.begin(), ds.end(), dmin) - ds.begin();
  w.idx_hi = std::upper_bound(ds.begin(), ds.end(), dmax) - ds.begin();
  if (w.idx_hi < w.idx_lo) w.idx_hi = w.idx_lo;
  return w;
}

void validate_scan_alpha(cplx alpha) {
  if (std::abs(alpha) > 0.25)
    throw std::invalid_argument(
        "moment: |alpha| must be <= 1/4 for the central-value expansion");
}

}  // namespace

void MomentRequest::validate() const {
  st.validate();
  weight.validate();
  if (!(X >= 16.0))
    throw std::invalid_argument("MomentRequest: X must be >= 16");
  validate_scan_alpha(st.alpha);
  if (weight.x1 * X > 4e6)
    throw std::length_error(
        "MomentRequest: weight support exceeds the 4e6 sieve cap");
}

BruteMoment brute_moment_full(const MomentRequest& req, int workers) {
  req.validate();
  const long long dmax =
      static_cast<long long>(std::floor(req.weight.x1 * req.X));
  BruteMoment out;
  if (dmax < 1) return out;
  AfeContext ctx = build_afe_context(req.st.alpha, req.afe, dmax);
  const BruteWindow w = window_of(ctx.tables, req.X, req.weight.x0, req.weight.x1);
  const long long n = w.idx_hi - w.idx_lo;
  if (n <= 0) return out;
  std::vector<cplx> vals(static_cast<size_t>(n), cplx{});
  std::vector<double> bnds(static_cast<size_t>(n), 0.0);
  std::vector<char> used(static_cast<size_t>(n), 0);
  parallel_for(
      n,
      [&](long long i) {
        const long long d = ctx.tables.odd_squarefree[w.idx_lo + i];
        const int chi = chi8d(d, req.st.l);
        if (chi == 0) return;
        const AfeResult r = l_afe_full(d, req.st.alpha, ctx.params, ctx.tables,
                                       ctx.vplus, ctx.vminus);
        const double phi = req.weight(static_cast<double>(d) / req.X);
        vals[static_cast<size_t>(i)] = static_cast<double>(chi) * phi * r.value;
        bnds[static_cast<size_t>(i)] = std::abs(phi) * r.tail_bound;
        used[static_cast<size_t>(i)] = 1;
      },
      workers);
  Kahan acc;
  for (long long i = 0; i < n; ++i) {
    acc.add(vals[static_cast<size_t>(i)]);
    out.err_budget += bnds[static_cast<size_t>(i)];
    out.terms += used[static_cast<size_t>(i)];
  }
  out.value = acc.sum;
  return out;
}

cplx brute_moment(const MomentRequest& req, int workers) {
  return brute_moment_full(req, workers).value;
}

cplx main_term(double X, const ShiftTwist& st, const TiltedWeight& weight) {
  st.validate();
  weight.base.validate();
  if (!(X > 0.0)) throw std::invalid_argument("main_term: X must be positive");
  if (std::abs(st.alpha) < 1e-4)
    throw std::domain_error(
        "main_term: |alpha| < 1e-4 is ill-conditioned near the pole pair; use "
        "main_term_alpha0");
  const ShiftTwist mirror{-st.alpha, st.l};
  const TiltedWeight tilted{weight.base, weight.power - st.alpha};
  return closed_addend(X, st, weight) +
         gamma_alpha(st.alpha) * pow_pos(X, -st.alpha) *
             closed_addend(X, mirror, tilted);
}

cplx main_term_alpha0(double X, long long l, const SmoothWeight& weight) {
  const ShiftTwist probe{cplx(1e-3, 0.0), l};
  probe.validate();
  weight.validate();
  if (!(X > 0.0))
    throw std::invalid_argument("main_term_alpha0: X must be positive");
  return main_term_averaged(X, cplx(0.0, 0.0), l, weight);
}

cplx term_MN_k0(double X, const ShiftTwist& st, const TiltedWeight& weight,
                double Y, const ContourSpec& contour) {
  return plus_pair(X, st, weight, Y, contour, ASide::below);
}

cplx term_MR1(double X, const ShiftTwist& st, const TiltedWeight& weight,
              double Y, const ContourSpec& contour) {
  return plus_pair(X, st, weight, Y, contour, ASide::above);
}

cplx term_MmN_k1(double X, const ShiftTwist& st, const TiltedWeight& weight,
                 double Y, const ContourSpec& contour) {
  return minus_pair(X, st, weight, Y, contour, ASide::below);
}

cplx term_MmR2(double X, const ShiftTwist& st, const TiltedWeight& weight,
               double Y, const ContourSpec& contour) {
  return minus_pair(X, st, weight, Y, contour, ASide::above);
}

cplx term_MmR2_unreduced(double X, const ShiftTwist& st,
                         const TiltedWeight& weight, double Y,
                         const ContourSpec& contour) {
  validate_piece(X, st, Y, contour);
  weight.base.validate();
  const PieceCtx c = make_ctx(X, st, Y, contour);
  const cplx galpha = gamma_alpha(c.alpha);

  auto node = [&](cplx s, cplx mell) -> cplx {
    const cplx zn = 1.0 + 2.0 * c.alpha - 2.0 * s;
    const cplx zc = zn + 1.0;
    const cplx z2zn = zeta_excl(zn, kExcl2);
    Kahan below;
    for (const AItem& it : c.items)
      below.add(it.mu * it.heavy * std::exp(-zc * it.ln_a));
    const cplx full = completion_product(zc, c, c.pcut_minus, false) /
                      zeta_excl(zc, c.excl2l);
    const cplx apart = full - below.sum;
    const cplx shared = mell * (big_g(s, c.gspec) / s) *
                        g_alpha(s, -c.alpha) *
                        std::exp(-0.5 * s * c.ln_x) * std::exp(s * c.ln_l) *
                        z2zn * gamma_alpha(-c.alpha + s) * galpha;
    return shared * apart;
  };

  const cplx base(1.0 - 0.5 * c.sigma, 0.0);
  const cplx integral = integrate_vertical(c.sigma, contour, weight, base,
                                           -0.5 * contour.step, node);
  const cplx pref = 0.5 * X * c.lhead / c.z22 *
                    std::exp(-(0.5 + c.alpha) * c.ln_l);
  return pref * integral;
}

CancellationCheck check_cancellation(double X, const ShiftTwist& st,
                                     const SmoothWeight& weight, double Y,
                                     const ContourSpec& contour) {
  const TiltedWeight tw(weight);
  CancellationCheck out;
  out.mn_k0 = term_MN_k0(X, st, tw, Y, contour);
  out.mr1 = term_MR1(X, st, tw, Y, contour);
  out.mmn_k1 = term_MmN_k1(X, st, tw, Y, contour);
  out.mmr2 = term_MmR2(X, st, tw, Y, contour);
  out.lhs = out.mn_k0 + out.mr1 + out.mmn_k1 + out.mmr2;
  out.rhs = closed_addend(X, st, tw);
  return out;
}

CancellationCheck check_cancellation_mirrored(double X, const ShiftTwist& st,
                                              const SmoothWeight& weight,
                                              double Y,
                                              const ContourSpec& contour) {
  const ShiftTwist mirror{-st.alpha, st.l};
  const TiltedWeight tw(weight, -st.alpha);
  const cplx scale = gamma_alpha(st.alpha) * pow_pos(X, -st.alpha);
  CancellationCheck out;
  out.mn_k0 = scale * term_MN_k0(X, mirror, tw, Y, contour);
  out.mr1 = scale * term_MR1(X, mirror, tw, Y, contour);
  out.mmn_k1 = scale * term_MmN_k1(X, mirror, tw, Y, contour);
  out.mmr2 = scale * term_MmR2(X, mirror, tw, Y, contour);
  out.lhs = out.mn_k0 + out.mr1 + out.mmn_k1 + out.mmr2;
  out.rhs = scale * closed_addend(X, mirror, tw);
  return out;
}

ResidualTable residual_scan(const std::vector<double>& grid,
                            const ShiftTwist& st, const SmoothWeight& weight,
                            const AfeParams& afe, int workers,
                            bool reuse_lvalues) {
  st.validate();
  weight.validate();
  validate_scan_alpha(st.alpha);
  if (grid.empty())
    throw std::invalid_argument("residual_scan: grid must be nonempty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 16.0))
      throw std::invalid_argument("residual_scan: grid values must be >= 16");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument(
          "residual_scan: grid must be strictly increasing");
  }
  if (weight.x1 * grid.back() > 4e6)
    throw std::length_error(
        "residual_scan: weight support exceeds the 4e6 sieve cap");

  const long long dmax =
      static_cast<long long>(std::floor(weight.x1 * grid.back()));
  AfeContext ctx = build_afe_context(st.alpha, afe, dmax);
  const auto& ds = ctx.tables.odd_squarefree;

  std::vector<BruteWindow> windows;
  windows.reserve(grid.size());
  for (double x : grid)
    windows.push_back(window_of(ctx.tables, x, weight.x0, weight.x1));

  // Discriminants needed by at least one window, relative to the union range.
  const long long base_lo = windows.front().idx_lo;
  const long long base_hi = windows.back().idx_hi;
  const long long span = std::max<long long>(0, base_hi - base_lo);
  std::vector<char> needed(static_cast<size_t>(span), 0);
  for (const BruteWindow& w : windows)
    for (long long i = w.idx_lo; i < w.idx_hi; ++i)
      needed[static_cast<size_t>(i - base_lo)] = 1;

  std::vector<cplx> lval(static_cast<size_t>(span), cplx{});
  std::vector<double> ltail(static_cast<size_t>(span), 0.0);
  std::vector<std::int8_t> lchi(static_cast<size_t>(span), 0);
  auto eval_one = [&](long long rel) {
    const long long d = ds[base_lo + rel];
    const int chi = chi8d(d, st.l);
    lchi[static_cast<size_t>(rel)] = static_cast<std::int8_t>(chi);
    if (chi == 0) return;
    const AfeResult r = l_afe_full(d, st.alpha, ctx.params, ctx.tables,
                                   ctx.vplus, ctx.vminus);
    lval[static_cast<size_t>(rel)] = r.value;
    ltail[static_cast<size_t>(rel)] = r.tail_bound;
  };
  if (reuse_lvalues) {
    parallel_for(
        span,
        [&](long long rel) {
          if (needed[static_cast<size_t>(rel)]) eval_one(rel);
        },
        workers);
  }

  ResidualTable table;
  table.alpha = st.alpha;
  table.l = st.l;
  table.weight_name = weight.name();
  table.rows.reserve(grid.size());
  const bool near_zero = std::abs(st.alpha) < 1e-4;
  const bool at_zero = st.alpha == cplx(0.0, 0.0);
  for (size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    const BruteWindow& w = windows[g];
    if (!reuse_lvalues) {
      parallel_for(
          w.idx_hi - w.idx_lo,
          [&](long long i) { eval_one(w.idx_lo + i - base_lo); },
          workers);
    }
    Kahan acc;
    double budget = 0.0;
    for (long long i = w.idx_lo; i < w.idx_hi; ++i) {
      const long long rel = i - base_lo;
      const int chi = lchi[static_cast<size_t>(rel)];
      if (chi == 0) continue;
      const double phi = weight(static_cast<double>(ds[i]) / x);
      acc.add(static_cast<double>(chi) * phi * lval[static_cast<size_t>(rel)]);
      budget += std::abs(phi) * ltail[static_cast<size_t>(rel)];
    }
    ResidualRow row;
    row.X = x;
    row.brute = acc.sum;
    if (at_zero)
      row.main = main_term_alpha0(x, st.l, weight);
    else if (near_zero)
      row.main = main_term_averaged(x, st.alpha, st.l, weight);
    else
      row.main = main_term(x, st, TiltedWeight(weight));
    row.residual = row.brute - row.main;
    row.err_budget = budget;
    table.rows.push_back(row);
  }
  return table;
}

ExponentFit fit_exponent(const ResidualTable& table) {
  const size_t n = table.rows.size();
  if (n < 5)
    throw std::invalid_argument("fit_exponent: need at least 5 rows");
  std::vector<double> xs(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    const ResidualRow& r = table.rows[i];
    if (i > 0 && !(r.X > table.rows[i - 1].X))
      throw std::invalid_argument("fit_exponent: rows must have increasing X");
    const double mag = std::abs(r.residual);
    if (!(mag > 0.0))
      throw std::invalid_argument("fit_exponent: residuals must be nonzero");
    xs[i] = std::log(r.X);
    ys[i] = std::log(mag);
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.std_err = std::sqrt(ss / (static_cast<double>(n) - 2.0) / sxx);
  std::vector<double> pairwise;
  pairwise.reserve(n * (n - 1) / 2);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      pairwise.push_back((ys[j] - ys[i]) / (xs[j] - xs[i]));
  auto mid = pairwise.begin() + pairwise.size() / 2;
  std::nth_element(pairwise.begin(), mid, pairwise.end());
  if (pairwise.size() % 2 == 1) {
    fit.robust_slope = *mid;
  } else {
    const double hi = *mid;
    const double lo = *std::max_element(pairwise.begin(), mid);
    fit.robust_slope = 0.5 * (lo + hi);
  }
  return fit;
}

std::vector<double> recursion_schedule(double f0, int n) {
  if (!(f0 >= 0.5 && f0 <= 1.0))
    throw std::domain_error("recursion_schedule: f0 must lie in [1/2, 1]");
  if (n < 0 || n > 64)
    throw std::domain_error("recursion_schedule: n must lie in [0, 64]");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n) + 1);
  out.push_back(f0);
  for (int k = 0; k < n; ++k) out.push_back(0.5 * (out.back() + 0.5));
  return out;
}

}  // namespace qdl
