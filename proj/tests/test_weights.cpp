#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qdl/weights.hpp"

using qdl::cplx;

namespace {

// Independent midpoint-rule Mellin oracle: the bump vanishes to all orders at
// the endpoints, so the rule converges superpolynomially.
cplx mellin_midpoint(const qdl::SmoothWeight& w, cplx s, int n, double uexp = 0.0) {
  double h = (w.x1 - w.x0) / n;
  cplx acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = w.x0 + (i + 0.5) * h;
    double f = w(x);
    if (f != 0.0)
      acc += f * std::pow(x, uexp) * std::exp((s - 1.0) * std::log(x));
  }
  return acc * h;
}

}  // namespace

TEST_CASE("SmoothWeight: bump values and support") {
  auto w = qdl::SmoothWeight::bump12();
  CHECK(w(1.0) == 0.0);
  CHECK(w(2.0) == 0.0);
  CHECK(w(0.5) == 0.0);
  CHECK(w(2.5) == 0.0);
  CHECK(w(1.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
  for (double x = 1.01; x < 2.0; x += 0.07) CHECK(w(x) > 0.0);
  CHECK(w.name() == "bump12");
  qdl::SmoothWeight bad{2.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ContourSpec validation") {
  qdl::ContourSpec ok{1.0, 9.0, 0.05};
  CHECK_NOTHROW(ok.validate());
  qdl::ContourSpec coarse{1.0, 9.0, 0.5};  // step > height/50
  CHECK_THROWS_AS(coarse.validate(), std::invalid_argument);
  qdl::ContourSpec neg{1.0, -1.0, 0.01};
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("mellin_phi: frozen references and quadrature oracle") {
  auto w = qdl::SmoothWeight::bump12();
  // 30-digit independent evaluations
  CHECK(std::abs(qdl::mellin_phi(w, 1.0) - 0.00702985840660965623924127053035) < 1e-13);
  CHECK(std::abs(qdl::mellin_phi(w, 2.0) - 0.0105447876099144843588619057955) < 1e-13);
  cplx ref(0.00823913816955318359775173452276, 0.00240350187065394414175757282771);
  CHECK(std::abs(qdl::mellin_phi(w, cplx(1.5, 0.7)) - ref) < 1e-13);

  // midpoint-refined oracle at double resolution
  cplx mid = mellin_midpoint(w, 1.0, 8192);
  cplx mid2 = mellin_midpoint(w, 1.0, 16384);
  CHECK(std::abs(mid - mid2) < 1e-13);  // oracle self-consistency
  CHECK(std::abs(qdl::mellin_phi(w, 1.0) - mid2) < 1e-12);
}

TEST_CASE("mellin_phi: shifted-weight rule") {
  // Mellin of x^u Phi(x) at s equals the plain transform at s + u.
  auto w = qdl::SmoothWeight::bump12();
  double u = 0.2;
  cplx s(1.3, 1.0);
  cplx shifted = mellin_midpoint(w, s, 16384, u);
  CHECK(std::abs(shifted - qdl::mellin_phi(w, s + u)) < 1e-12);
}

TEST_CASE("mellin_phi: |transform| decreases along vertical lines, |t| <= 40") {
  auto w = qdl::SmoothWeight::bump12();
  for (double sigma : {0.5, 1.0, 2.0}) {
    double prev = std::abs(qdl::mellin_phi(w, cplx(sigma, 0.0)));
    for (double t = 0.5; t <= 40.0; t += 0.5) {
      double cur = std::abs(qdl::mellin_phi(w, cplx(sigma, t)));
      INFO("sigma=" << sigma << " t=" << t);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("mellin_phi_line matches pointwise evaluation") {
  auto w = qdl::SmoothWeight::bump12();
  cplx base(1.025, 0.0);
  double dt = 0.004;
  auto line = qdl::mellin_phi_line(w, base, dt, -40, 40);
  REQUIRE(line.size() == 81);
  for (int j = -40; j <= 40; j += 8) {
    cplx want = qdl::mellin_phi(w, base + cplx(0.0, j * dt));
    CHECK(std::abs(line[j + 40] - want) < 1e-13);
  }
}

TEST_CASE("v_alpha: frozen profile at alpha = 0, gaussian G") {
  const struct {
    double x, v;
  } profile[] = {
      {1e-6, 0.998878582038}, {0.001, 0.964538732068}, {0.5, 0.382837524388},
      {1.0, 0.258234839369},  {2.0, 0.153968451958},   {3.0, 0.106670037719},
      {5.0, 0.0623923727501}, {8.0, 0.0352554464384},  {10.0, 0.0261657668541},
      {12.0, 0.0202362317972}, {15.0, 0.0145313542962}, {100.0, 0.000398229523649},
  };
  auto g = qdl::GSpec::gauss();
  for (const auto& p : profile) {
    cplx v = qdl::v_alpha(p.x, 0.0, g);
    INFO("x=" << p.x);
    CHECK(std::abs(v - p.v) < 1e-9);
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("v_alpha: small-x limit and measured decay profile") {
  auto g = qdl::GSpec::gauss();
  // limit value 1 from the residue at s = 0; measured deviation at 1e-6 is
  // 1.12e-3 (the left-shifted contour converges like x^{0.1})
  CHECK(std::abs(qdl::v_alpha(1e-6, 0.0, g) - 1.0) < 1.5e-3);
  // decay is log-gaussian (exp(-(log x)^2/4)-class), measured envelope:
  CHECK(std::abs(qdl::v_alpha(100.0, 0.0, g)) < 5e-4);
  CHECK(std::abs(qdl::v_alpha(600.0, 0.0, g)) < 4e-6);
  CHECK(std::abs(qdl::v_alpha(1500.0, 0.0, g)) < 2e-7);
  CHECK(std::abs(qdl::v_alpha(3000.0, 0.0, g)) < 2e-8);
  CHECK_THROWS_AS(qdl::v_alpha(0.0, 0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(qdl::v_alpha(-1.0, 0.0, g), std::invalid_argument);
}

TEST_CASE("v_alpha: contour independence") {
  qdl::ContourSpec c1{1.0, 9.0, 0.05};
  qdl::ContourSpec c2{2.0, 9.0, 0.04};
  auto g = qdl::GSpec::gauss();
  CHECK(std::abs(qdl::v_alpha(1.0, 0.02, g, c1) - qdl::v_alpha(1.0, 0.02, g, c2)) <
        1e-9);
  // also with the remark-zero kernel and complex shift
  auto rz = qdl::GSpec::remark_zero(cplx(0.04, 0.02));
  cplx a(0.04, 0.02);
  CHECK(std::abs(qdl::v_alpha(2.0, a, rz, c1) - qdl::v_alpha(2.0, a, rz, c2)) < 1e-9);
  CHECK(std::abs(qdl::v_alpha(0.3, a, rz, c1) - qdl::v_alpha(0.3, a, rz, c2)) < 1e-12);
}

TEST_CASE("build_v_cache: interpolation accuracy and monotone tail") {
  auto g = qdl::GSpec::gauss();
  auto cache = qdl::build_v_cache(0.02, g, 120.0);
  CHECK(std::abs(cache.eval(1.0) - qdl::v_alpha(1.0, 0.02, g)) < 1e-8);
  CHECK(std::abs(cache.eval(120.0) - qdl::v_alpha(120.0, 0.02, g)) < 1e-8);
  std::mt19937 rng(60601);
  std::uniform_real_distribution<double> lg(std::log(1e-6), std::log(120.0));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double x = std::exp(lg(rng));
    worst = std::max(worst,
                     std::abs(cache.eval(x) - qdl::v_alpha(x, 0.02, g)));
  }
  CHECK(worst < 1e-8);
  // cached |V| non-increasing for x >= 10 at real alpha
  double prev = std::abs(cache.eval(10.0));
  for (double x = 10.5; x <= 120.0; x += 0.5) {
    double cur = std::abs(cache.eval(x));
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
  // envelope dominates later values
  for (double x : {0.5, 3.0, 20.0, 80.0}) {
    CHECK(cache.tail_envelope(x) >= std::abs(cache.eval(x)) - 1e-15);
    CHECK(cache.tail_envelope(x) >= std::abs(cache.eval(2 * x)) - 1e-15);
  }
  CHECK(cache.eval(500.0) == cplx(0.0, 0.0));  // beyond xmax
}
