#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qdl/arith.hpp"
#include "qdl/specfun.hpp"

using qdl::cplx;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_err(cplx got, cplx want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

// Frozen high-precision reference values (30-digit independent evaluation).
struct Ref {
  cplx arg;
  cplx val;
};

}  // namespace

TEST_CASE("cgamma: anchors") {
  CHECK(rel_err(qdl::cgamma(5.0), 24.0) < 1e-13);
  CHECK(rel_err(qdl::cgamma(0.5), std::sqrt(kPi)) < 1e-13);
  cplx s(0.3, 2.0);
  CHECK(std::abs(qdl::cgamma(s + 1.0) / (s * qdl::cgamma(s)) - 1.0) < 1e-13);
  CHECK(rel_err(qdl::cgamma(0.25), 3.62560990822190831193068515587) < 1e-13);
  CHECK(rel_err(qdl::cgamma(0.75), 1.22541670246517764512909830336) < 1e-13);
  CHECK_THROWS_AS(qdl::cgamma(cplx(0.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(qdl::cgamma(cplx(-3.0, 0.0)), std::domain_error);
}

TEST_CASE("cgamma: frozen reference values across |s| <= 100") {
  const Ref refs[] = {
      {{0.3, 2.0}, {0.0574653375695880334599, -0.07498491258264613817582}},
      {{5.5, -3.25}, {12.92485557746798533156, 14.54074440334844401373}},
      {{-2.5, 0.5}, {-0.3338752035224323374033, -0.2064573079636084149183}},
      {{12.0, 40.0}, {-4.142177064217245519438e-10, -3.980657816215018221202e-9}},
      {{0.5, 80.0}, {6.178750859669665403934e-55, 2.50868323836923217167e-55}},
      {{-1.5, -7.0}, {-8.353996128951706440711e-7, 5.164694036455672113198e-8}},
  };
  for (const auto& r : refs) {
    INFO("s=" << r.arg.real() << "+" << r.arg.imag() << "i");
    CHECK(rel_err(qdl::cgamma(r.arg), r.val) < 1e-12);
  }
}

TEST_CASE("zeta: anchors and frozen references") {
  CHECK(rel_err(qdl::zeta(2.0), kPi * kPi / 6.0) < 1e-12);
  CHECK(rel_err(qdl::zeta(0.0), -0.5) < 1e-12);
  const Ref refs[] = {
      {{0.5, 0.0}, {-1.46035450880958681288949915252, 0.0}},
      {{3.0, 0.0}, {1.20205690315959428539973816151, 0.0}},
      {{1.1, 0.0}, {10.5844484649508098263864007917, 0.0}},
      {{4.0, 0.0}, {1.082323233711138191516, 0.0}},
      {{0.75, 2.0}, {0.517088721314005559707389232057, -0.338632528158869974137450800209}},
      {{-1.5, 30.0}, {-20.7719572679492122323147055952, 2.70753022475407304082702247837}},
      {{2.5, 99.0}, {1.128845410293744383899, 0.03951371103823968326995}},
      {{-2.0, 37.0}, {-73.44409455662712246099, -52.29511817847236960298}},
      {{1.2, -10.0}, {1.341096973166827462399, 0.1047606676353366374128}},
  };
  for (const auto& r : refs) {
    INFO("s=" << r.arg.real() << "+" << r.arg.imag() << "i");
    CHECK(rel_err(qdl::zeta(r.arg), r.val) < 1e-10);
  }
  CHECK_THROWS_AS(qdl::zeta(cplx(1.0, 0.0)), std::domain_error);
}

TEST_CASE("zeta_excl: Euler factor removal") {
  // zeta_2(2) = pi^2/8
  CHECK(rel_err(qdl::zeta_excl(2.0, {2}), 1.23370055013616982735431137498) < 1e-12);
  // slow oracle: direct sum over n coprime to 15 at s = 3
  double direct = 0.0;
  for (long long n = 200000; n >= 1; --n) {
    if (n % 3 == 0 || n % 5 == 0) continue;
    direct += std::pow(static_cast<double>(n), -3.0);
  }
  CHECK(rel_err(qdl::zeta_excl(3.0, {3, 5}), direct) < 1e-10);
  CHECK(rel_err(qdl::zeta_excl(3.0, {}), 1.20205690315959428539973816151) < 1e-12);
}

TEST_CASE("hurwitz: anchors, recurrence, frozen references") {
  CHECK(rel_err(qdl::hurwitz(2.0, 1.0), kPi * kPi / 6.0) < 1e-12);
  CHECK(rel_err(qdl::hurwitz(2.0, 0.5), kPi * kPi / 2.0) < 1e-12);
  // shift recurrence zeta(s,a) = a^{-s} + zeta(s,a+1), folded to stay in (0,1]:
  // zeta(3, 0.3) - 0.3^{-3} - (zeta(3, 0.65...) form) checked via two half-shifts
  cplx lhs = qdl::hurwitz(3.0, 0.3);
  double tail = 0.0;  // sum_{n>=0} (n+0.3)^{-3} minus first 50 terms, via direct sum
  for (int n = 49; n >= 0; --n) tail += std::pow(n + 0.3, -3.0);
  // remaining tail from n=50 equals hurwitz with a shifted into (0,1] times scaling:
  // sum_{n>=50}(n+0.3)^{-3} = sum_{m>=0}(m+50.3)^{-3} = 50.3^{-3} zeta-like; compare
  // instead against the defining series directly
  double series = tail;
  for (int n = 50; n < 200000; ++n) series += std::pow(n + 0.3, -3.0);
  CHECK(rel_err(lhs, series) < 1e-10);

  const struct {
    cplx s;
    double a;
    cplx val;
  } refs[] = {
      {{0.6, 0.0}, 0.3, {-0.258386921804425511862025454318, 0.0}},
      {{1.3, 5.0}, 0.7, {-0.636484168757252840666483933645, 1.44779516849435870276818228694}},
      {{0.4, 100.0}, 1.0 / 3.0, {-4.740636646361815785939, -0.7425972620696267152739}},
      {{2.2, -14.0}, 0.85, {-1.120459670744106270898, -0.8188120937899286478812}},
      {{0.5, 0.05}, 0.125, {1.216581718796299008627, 0.09619964851350689250257}},
  };
  for (const auto& r : refs) {
    INFO("s=" << r.s.real() << "+" << r.s.imag() << "i a=" << r.a);
    CHECK(rel_err(qdl::hurwitz(r.s, r.a), r.val) < 1e-10);
  }
  CHECK_THROWS_AS(qdl::hurwitz(cplx(1.0, 0.0), 0.5), std::domain_error);
  CHECK_THROWS_AS(qdl::hurwitz(cplx(2.0, 0.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(qdl::hurwitz(cplx(2.0, 0.0), 1.5), std::invalid_argument);
}

TEST_CASE("real_char_l: trivial character routes and reference values") {
  CHECK(rel_err(qdl::real_char_l(2.0, 1, {2}), qdl::zeta_excl(2.0, {2})) < 1e-14);
  CHECK(rel_err(qdl::real_char_l(3.0, 1, {}), 1.20205690315959428539973816151) < 1e-12);

  // brute partial-sum oracle for k1 = 5 at s = 2 (plain summation)
  double brute = 0.0;
  for (long long n = 300000; n >= 1; --n) {
    int chi = qdl::kronecker(5, n);
    if (chi) brute += chi * std::pow(static_cast<double>(n), -2.0);
  }
  CHECK(std::abs(qdl::real_char_l(2.0, 5, {}) - brute) < 1e-8);

  const struct {
    cplx s;
    long long k1;
    std::vector<long long> excl;
    cplx val;
  } refs[] = {
      {{2.0, 0.0}, 5, {}, {0.7062114032597409699185, 0.0}},
      {{1.5, 0.0}, -3, {2}, {0.9528586047537365827305, 0.0}},
      {{2.5, 1.0}, 13, {2, 3}, {1.004392866921920003371, 0.02663990485727221096402}},
      {{3.0, 0.0}, -7, {}, {1.093343069429533571977, 0.0}},
  };
  for (const auto& r : refs) {
    INFO("k1=" << r.k1);
    CHECK(std::abs(qdl::real_char_l(r.s, r.k1, r.excl) - r.val) < 2e-9);
  }

  CHECK_THROWS_AS(qdl::real_char_l(cplx(1.0, 5.0), 5, {}), std::domain_error);
  CHECK_THROWS_AS(qdl::real_char_l(2.0, 12, {}), std::invalid_argument);
  CHECK_THROWS_AS(qdl::real_char_l(2.0, 0, {}), std::invalid_argument);
}

TEST_CASE("real_char_l: tol parameter tightens the truncation") {
  cplx loose = qdl::real_char_l(1.5, 7, {}, 1e-5);
  cplx tight = qdl::real_char_l(1.5, 7, {}, 1e-11);
  CHECK(std::abs(loose - tight) < 1e-5);
}

TEST_CASE("g_alpha: anchors and reflection-chain identity") {
  for (cplx a : {cplx(0.0, 0.0), cplx(0.1, 0.0), cplx(0.02, 0.01), cplx(0.0, 0.3)}) {
    CHECK(std::abs(qdl::g_alpha(0.0, a) - 1.0) < 1e-14);
  }
  CHECK(rel_err(qdl::g_alpha(1.0, 0.0), 0.539352601188379356667935722356) < 1e-12);
  cplx direct = std::sqrt(8.0 / kPi) * qdl::cgamma(0.75) / qdl::cgamma(0.25);
  CHECK(rel_err(qdl::g_alpha(1.0, 0.0), direct) < 1e-13);

  // g_{-alpha}(-s) gamma_{-alpha-s} gamma_alpha = g_alpha(s)
  auto check_chain = [](cplx alpha, cplx s) {
    cplx lhs = qdl::g_alpha(-s, -alpha) * qdl::gamma_alpha(-alpha - s) *
               qdl::gamma_alpha(alpha);
    cplx rhs = qdl::g_alpha(s, alpha);
    INFO("alpha=" << alpha.real() << "+" << alpha.imag() << "i");
    CHECK(rel_err(lhs, rhs) < 1e-11);
  };
  check_chain({0.02, 0.01}, {0.3, -0.2});
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int i = 0; i < 30; ++i) check_chain({u(rng), u(rng)}, {u(rng) * 2, u(rng) * 2});
}

TEST_CASE("big_g: gaussian kinds") {
  auto g1 = qdl::GSpec::gauss();
  auto g2 = qdl::GSpec::gauss(2.0);
  cplx s(0.4, 1.1);
  CHECK(rel_err(qdl::big_g(s, g1), std::exp(s * s)) < 1e-14);
  CHECK(rel_err(qdl::big_g(s, g2), std::exp(2.0 * s * s)) < 1e-14);
  CHECK(rel_err(qdl::big_g(-s, g1), qdl::big_g(s, g1)) < 1e-14);
  CHECK(std::abs(qdl::big_g(0.0, g1) - 1.0) < 1e-15);
}

TEST_CASE("big_g: remark-zero product has the forced zeros and G(0)=1") {
  for (cplx a : {cplx(0.1, 0.0), cplx(0.04, 0.02), cplx(0.0, 0.05)}) {
    auto spec = qdl::GSpec::remark_zero(a);
    INFO("alpha=" << a.real() << "+" << a.imag() << "i");
    CHECK(std::abs(qdl::big_g(a, spec)) < 1e-14);          // s = alpha
    CHECK(std::abs(qdl::big_g(-a, spec)) < 1e-14);         // s = -alpha
    CHECK(std::abs(qdl::big_g(0.5 + a, spec)) < 1e-13);    // s = 1/2 + alpha
    CHECK(std::abs(qdl::big_g(0.5 - a, spec)) < 1e-13);
    CHECK(std::abs(qdl::big_g(-0.5 + a, spec)) < 1e-13);
    CHECK(std::abs(qdl::big_g(-0.5 - a, spec)) < 1e-13);
    CHECK(std::abs(qdl::big_g(0.0, spec) - 1.0) < 1e-13);  // normalization
    cplx s(0.4, 1.1);
    CHECK(rel_err(qdl::big_g(-s, spec), qdl::big_g(s, spec)) < 1e-13);
    // depends on alpha only through alpha^2
    auto spec_neg = qdl::GSpec::remark_zero(-a);
    CHECK(rel_err(qdl::big_g(s, spec_neg), qdl::big_g(s, spec)) < 1e-14);
  }
  CHECK_THROWS_AS(qdl::big_g(0.3, qdl::GSpec::remark_zero(0.0)),
                  std::invalid_argument);
}

TEST_CASE("x_alpha_factor and gamma_alpha") {
  CHECK(rel_err(qdl::x_alpha_factor(7, 0.0), 1.0) < 1e-14);
  CHECK(rel_err(qdl::x_alpha_factor(17, 0.03) * qdl::x_alpha_factor(17, -0.03), 1.0) <
        1e-12);
  cplx a(0.0, 0.05);
  CHECK(std::abs(qdl::gamma_alpha(a) * std::pow(33.0, -a) -
                 qdl::x_alpha_factor(33, a)) < 1e-14);
  CHECK(rel_err(qdl::gamma_alpha(a) * qdl::gamma_alpha(-a), 1.0) < 1e-12);
  CHECK_THROWS_AS(qdl::x_alpha_factor(0, 0.1), std::invalid_argument);
}

TEST_CASE("identity: gamma duplication chain (100 seeded points)") {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> re(-5.0, 5.0), im(-5.0, 5.0);
  int tested = 0;
  while (tested < 100) {
    cplx u(re(rng), im(rng));
    if (std::abs(u) > 5.0) continue;
    // stay away from poles of Gamma(u), Gamma(u/2) and zeros of Gamma((1-u)/2)^{-1}
    bool near_pole = false;
    for (int m = 0; m >= -6; --m) {
      if (std::abs(u - static_cast<double>(m)) < 0.15) near_pole = true;
      if (std::abs(u / 2.0 - static_cast<double>(m)) < 0.15) near_pole = true;
      if (std::abs((1.0 - u) / 2.0 - static_cast<double>(m)) < 0.15) near_pole = true;
    }
    if (near_pole) continue;
    cplx lhs = std::pow(kPi, -0.5) * std::pow(2.0, 1.0 - u) *
               std::cos(kPi * u / 2.0) * qdl::cgamma(u);
    cplx rhs = qdl::cgamma(u / 2.0) / qdl::cgamma((1.0 - u) / 2.0);
    INFO("u=" << u.real() << "+" << u.imag() << "i");
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    ++tested;
  }
}

TEST_CASE("identity: cos + sin as sqrt(2) cos(pi/4 - theta) (100 seeded points)") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> re(-3.0, 3.0);
  int tested = 0;
  while (tested < 100) {
    cplx th(re(rng), re(rng));
    if (std::abs(th) > 3.0) continue;
    cplx lhs = std::cos(th) + std::sin(th);
    cplx rhs = std::sqrt(2.0) * std::cos(kPi / 4.0 - th);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    ++tested;
  }
}

TEST_CASE("identity: completed-zeta functional equation form (50 seeded points)") {
  std::mt19937 rng(777001);
  std::uniform_real_distribution<double> re(0.1, 0.4), im(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    cplx z(re(rng), im(rng));
    cplx lhs = std::pow(kPi, -z) * qdl::cgamma(z) * qdl::zeta(2.0 * z);
    cplx rhs = std::pow(kPi, -0.5 + z) * qdl::cgamma(0.5 - z) * qdl::zeta(1.0 - 2.0 * z);
    INFO("z=" << z.real() << "+" << z.imag() << "i");
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("identity: (2^{1-z}-1) zeta(1-z) = 2^{1-z} zeta_2(1-z) (50 seeded points)") {
  std::mt19937 rng(900913);
  std::uniform_real_distribution<double> re(-1.0, 3.0), im(-40.0, 40.0);
  for (int i = 0; i < 50; ++i) {
    cplx z(re(rng), im(rng));
    if (std::abs(z) < 0.05 || std::abs(z - 1.0) < 1e-6) continue;  // zeta pole guards
    cplx lhs = (std::pow(2.0, 1.0 - z) - 1.0) * qdl::zeta(1.0 - z);
    cplx rhs = std::pow(2.0, 1.0 - z) * qdl::zeta_excl(1.0 - z, {2});
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("ShiftTwist: box validation") {
  qdl::ShiftTwist ok{{0.04, 0.02}, 15};
  CHECK_NOTHROW(ok.validate());
  qdl::ShiftTwist bad_alpha{{0.3, 0.0}, 1};
  CHECK_THROWS_AS(bad_alpha.validate(), std::invalid_argument);
  qdl::ShiftTwist bad_im{{0.0, 60.0}, 1};
  CHECK_THROWS_AS(bad_im.validate(), std::invalid_argument);
  qdl::ShiftTwist bad_l{{0.0, 0.0}, 9};
  CHECK_THROWS_AS(bad_l.validate(), std::invalid_argument);
  qdl::ShiftTwist even_l{{0.0, 0.0}, 2};
  CHECK_THROWS_AS(even_l.validate(), std::invalid_argument);
}
