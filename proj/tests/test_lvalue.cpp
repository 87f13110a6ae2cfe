#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "qdl/arith.hpp"
#include "qdl/lvalue.hpp"

using qdl::cplx;

namespace {

// Truncated Dirichlet series for d = 1 at Re s > 1, as an independent check:
// chi_8 has period 8 and mean 0, so the tail after N is O(N^{-Re s}).
cplx dirichlet_series_d1(cplx s, long long nmax) {
  cplx acc = 0.0;
  for (long long n = nmax; n >= 1; --n) {
    int c = qdl::kronecker(8, n);
    if (c != 0)
      acc += static_cast<double>(c) * std::exp(-s * std::log(static_cast<double>(n)));
  }
  return acc;
}

}  // namespace

TEST_CASE("l_oracle: anchors and frozen references") {
  // Euler-product-free check at s = 2 against plain summation
  cplx direct = dirichlet_series_d1(2.0, 300000);
  CHECK(std::abs(qdl::l_oracle(1, 2.0) - direct) <= 1e-9);

  // 30-digit central values for the conductor-8 character
  CHECK(std::abs(qdl::l_oracle(1, 0.5) - 0.373691712912547307381586950023) <=
        1e-9);
  CHECK(std::abs(qdl::l_oracle(1, 0.52) - 0.385895632648473195149678357242) <=
        1e-9);

  // character orthogonality: a full period sums to zero
  long long d = 3;
  long long acc = 0;
  for (long long a = 1; a <= 8 * d; ++a) acc += qdl::chi8d(d, a);
  CHECK(acc == 0);

  CHECK_THROWS_AS(qdl::l_oracle(9, 0.5), std::invalid_argument);   // 9 = 3^2
  CHECK_THROWS_AS(qdl::l_oracle(4, 0.5), std::invalid_argument);   // even
  CHECK_THROWS_AS(qdl::l_oracle(12501, 0.5), std::invalid_argument);  // q > 1e5
  CHECK_THROWS_AS(qdl::l_oracle(1, cplx(0.3, 0.0)), std::domain_error);
  CHECK_THROWS_AS(qdl::l_oracle(1, 1.0), std::domain_error);
}

TEST_CASE("l_afe: spec examples at small d") {
  qdl::AfeParams params;  // adaptive 1e-8 tail target

  // central value at the smallest discriminant
  cplx afe = qdl::l_afe(1, 0.0, params);
  cplx oracle = qdl::l_oracle(1, 0.5);
  CHECK(std::abs(afe - oracle) <= 1e-6);

  // independence of the regularizing kernel: a wider gaussian...
  qdl::AfeParams wide;
  wide.gspec = qdl::GSpec::gauss(2.0);
  CHECK(std::abs(qdl::l_afe(17, 0.0, params) - qdl::l_afe(17, 0.0, wide)) <=
        1e-6);
  // ...and the zero-forcing kernel, whose 1/alpha^2 normalization inflates
  // V to ~1e3 scale, costing a few digits through cancellation
  qdl::AfeParams rz;
  rz.gspec = qdl::GSpec::remark_zero(cplx(0.02, 0.0));
  CHECK(std::abs(qdl::l_afe(17, 0.02, params) - qdl::l_afe(17, 0.02, rz)) <=
        1e-5);

  // shift reflection through the X_alpha factor (adaptive truncation points
  // differ slightly between the two runs, so agreement is at tail level)
  cplx a(0.05, 0.0);
  cplx lp = qdl::l_afe(5, a, params);
  cplx lm = qdl::l_afe(5, -a, params);
  CHECK(std::abs(lp - qdl::x_alpha_factor(5, a) * lm) <=
        1e-7 * (1.0 + std::abs(lp)));
}

TEST_CASE("l_afe vs l_oracle across small discriminants") {
  auto tables = qdl::build_sieves(200000);
  qdl::AfeParams params;
  params.tail_bound_target = 2e-7;
  for (cplx alpha : {cplx(0.0, 0.0), cplx(0.02, 0.0), cplx(0.0, 0.05)}) {
    qdl::VCache vp = qdl::build_v_cache(alpha, params.gspec, 4400.0);
    qdl::VCache vm = qdl::build_v_cache(-alpha, params.gspec, 4400.0);
    cplx s = 0.5 + alpha;

    // dense sweep of small d, then a seeded sample further out
    for (long long d : tables.odd_squarefree) {
      if (d > 400) break;
      cplx afe = qdl::l_afe_full(d, alpha, params, tables, vp, vm).value;
      cplx oracle = qdl::l_oracle(d, s);
      INFO("d=" << d << " alpha=(" << alpha.real() << "," << alpha.imag()
                << ")");
      CHECK(std::abs(afe - oracle) <= 1e-6 * (1.0 + std::abs(oracle)));
    }
    std::mt19937 rng(443322);
    std::uniform_int_distribution<long long> pick(401, 2000);
    int done = 0;
    while (done < 10) {
      long long d = pick(rng) | 1;
      if (!tables.is_squarefree(d)) continue;
      cplx afe = qdl::l_afe_full(d, alpha, params, tables, vp, vm).value;
      cplx oracle = qdl::l_oracle(d, s);
      INFO("d=" << d);
      CHECK(std::abs(afe - oracle) <= 1e-6 * (1.0 + std::abs(oracle)));
      ++done;
    }
  }
}

TEST_CASE("l_afe: kernel independence across random d") {
  auto tables = qdl::build_sieves(1400000);
  // The e^{2s^2} kernel halves the log-gaussian decay exponent of V, so a
  // Polya-Vinogradov-certified 1e-6 would need ~5e6 terms per d. Its true
  // tail oscillates well below the bound, so a 1e-5 bound target leaves the
  // observed agreement comfortably inside 1e-6.
  qdl::AfeParams base;
  base.tail_bound_target = 1e-7;
  qdl::AfeParams wide;
  wide.gspec = qdl::GSpec::gauss(2.0);
  wide.tail_bound_target = 1e-5;
  qdl::VCache vp1 = qdl::build_v_cache(0.0, base.gspec, 4000.0);
  qdl::VCache vp2 = qdl::build_v_cache(0.0, wide.gspec, 14000.0);

  std::mt19937 rng(90210);
  std::uniform_int_distribution<long long> pick(1, 10000);
  int done = 0;
  while (done < 50) {
    long long d = pick(rng) | 1;
    if (!tables.is_squarefree(d)) continue;
    cplx v1 = qdl::l_afe_full(d, 0.0, base, tables, vp1, vp1).value;
    cplx v2 = qdl::l_afe_full(d, 0.0, wide, tables, vp2, vp2).value;
    INFO("d=" << d);
    CHECK(std::abs(v1 - v2) <= 1e-6);
    ++done;
  }
}

TEST_CASE("l_afe: reflection symmetry across random d") {
  // under the fixed schedule both runs scan the same terms, so the identity
  // L(d, a) = X_a L(d, -a) holds to rounding, independent of truncation
  auto tables = qdl::build_sieves(130000);
  qdl::AfeParams params;
  params.tail_bound_target = 0.0;
  cplx alpha(0.05, 0.0);
  qdl::VCache vp = qdl::build_v_cache(alpha, params.gspec, 120.0);
  qdl::VCache vm = qdl::build_v_cache(-alpha, params.gspec, 120.0);

  std::mt19937 rng(1234321);
  std::uniform_int_distribution<long long> pick(1, 10000);
  int done = 0;
  while (done < 50) {
    long long d = pick(rng) | 1;
    if (!tables.is_squarefree(d)) continue;
    cplx lp = qdl::l_afe_full(d, alpha, params, tables, vp, vm).value;
    cplx lm = qdl::l_afe_full(d, -alpha, params, tables, vm, vp).value;
    cplx diff = lp - qdl::x_alpha_factor(d, alpha) * lm;
    INFO("d=" << d);
    CHECK(std::abs(diff) <= 1e-10 * (1.0 + std::abs(lp)));
    ++done;
  }
}

TEST_CASE("l_afe: adaptive tail target") {
  auto tables = qdl::build_sieves(20000);
  qdl::AfeParams fixed;
  fixed.tail_bound_target = 0.0;
  qdl::AfeParams adaptive;
  adaptive.tail_bound_target = 1e-8;

  cplx alpha(0.02, 0.0);
  qdl::VCache vp = qdl::build_v_cache(alpha, fixed.gspec, 5000.0);
  qdl::VCache vm = qdl::build_v_cache(-alpha, fixed.gspec, 5000.0);

  auto rfix = qdl::l_afe_full(5, alpha, fixed, tables, vp, vm);
  auto rad = qdl::l_afe_full(5, alpha, adaptive, tables, vp, vm);
  CHECK(rad.tail_bound <= 1e-8);
  CHECK(rad.tail_bound < rfix.tail_bound);
  CHECK(std::abs(rad.value - qdl::l_oracle(5, 0.52)) <= 1e-7);

  // a tighter target buys more terms, never fewer
  qdl::AfeParams loose;
  loose.tail_bound_target = 1e-4;
  auto rloose = qdl::l_afe_full(5, alpha, loose, tables, vp, vm);
  CHECK(rloose.tail_bound <= 1e-4);
  CHECK(rloose.nterms <= rad.nterms);

  // an unreachable target inside a small cache domain is an error
  qdl::VCache tiny_p = qdl::build_v_cache(alpha, fixed.gspec, 20.0);
  qdl::VCache tiny_m = qdl::build_v_cache(-alpha, fixed.gspec, 20.0);
  qdl::AfeParams strict;
  strict.tail_bound_target = 1e-12;
  CHECK_THROWS_AS(
      qdl::l_afe_full(5, alpha, strict, tables, tiny_p, tiny_m),
      std::runtime_error);
}

TEST_CASE("l_afe: input validation") {
  auto tables = qdl::build_sieves(4000);
  qdl::AfeParams params;
  params.tail_bound_target = 0.0;
  qdl::VCache vp = qdl::build_v_cache(0.0, params.gspec, 80.0);

  CHECK_THROWS_AS(qdl::l_afe(4, 0.0, params), std::invalid_argument);
  CHECK_THROWS_AS(qdl::l_afe(45, 0.0, params), std::invalid_argument);  // 9 | 45
  CHECK_THROWS_AS(qdl::l_afe(-5, 0.0, params), std::invalid_argument);
  CHECK_THROWS_AS(qdl::l_afe(5, cplx(0.3, 0.0), params), std::invalid_argument);
  qdl::AfeParams neg;
  neg.tail_bound_target = -1.0;
  CHECK_THROWS_AS(qdl::l_afe(5, 0.0, neg), std::invalid_argument);

  // V cache domain shorter than the fixed truncation point
  qdl::VCache small = qdl::build_v_cache(0.0, params.gspec, 10.0);
  CHECK_THROWS_AS(qdl::l_afe_full(5, 0.0, params, tables, small, small),
                  std::invalid_argument);

  // sieve tables shorter than the truncation point
  auto short_tables = qdl::build_sieves(100);
  CHECK_THROWS_AS(qdl::l_afe_full(101, 0.0, params, short_tables, vp, vp),
                  std::invalid_argument);

  // the fixed schedule reports its (large) tail bound honestly
  auto r = qdl::l_afe_full(101, 0.0, params, tables, vp, vp);
  CHECK(r.tail_bound > 0.0);
  CHECK(r.tail_bound < 0.5);
  CHECK(r.nterms > 0);
}
