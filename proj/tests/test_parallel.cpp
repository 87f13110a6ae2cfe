#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "qdl/parallel.hpp"

using qdl::cplx;

TEST_CASE("parallel_sum: bit-identical across worker counts") {
  const long long n = 200000;
  auto f = [](long long i) {
    double m = std::pow(1.001, -static_cast<double>(i % 777));
    return cplx(m * std::cos(0.1 * i), m * std::sin(0.07 * i));
  };
  cplx one = qdl::parallel_sum(n, f, 1);
  cplx four = qdl::parallel_sum(n, f, 4);
  cplx eight = qdl::parallel_sum(n, f, 8);
  CHECK(one.real() == four.real());
  CHECK(one.imag() == four.imag());
  CHECK(one.real() == eight.real());
  CHECK(one.imag() == eight.imag());
}

TEST_CASE("parallel_sum: compensated accuracy on a cancelling series") {
  const long long n = 1000000;
  auto f = [](long long i) {
    double x = (i & 1) ? -1.0 : 1.0;
    return cplx(x / static_cast<double>(i + 1), 0.0);
  };
  long double ref = 0.0L;
  for (long long i = n - 1; i >= 0; --i) {
    long double x = (i & 1) ? -1.0L : 1.0L;
    ref += x / static_cast<long double>(i + 1);
  }
  cplx got = qdl::parallel_sum(n, f, 4);
  CHECK(std::abs(got.real() - static_cast<double>(ref)) <= 1e-14);
  CHECK(got.imag() == 0.0);
}

TEST_CASE("parallel_sum: empty and tiny ranges") {
  auto f = [](long long i) { return cplx(static_cast<double>(i), 0.0); };
  CHECK(qdl::parallel_sum(0, f, 4) == cplx(0.0));
  CHECK(qdl::parallel_sum(-3, f, 4) == cplx(0.0));
  CHECK(qdl::parallel_sum(3, f, 8).real() == 3.0);  // 0 + 1 + 2
}

TEST_CASE("parallel_for: each slot written exactly once") {
  const long long n = 50000;
  std::vector<long long> out(n, -1);
  qdl::parallel_for(n, [&](long long i) { out[i] = i * i; }, 8);
  for (long long i = 0; i < n; ++i) REQUIRE(out[i] == i * i);
}

TEST_CASE("parallel primitives propagate exceptions") {
  auto bad = [](long long i) -> cplx {
    if (i == 5000) throw std::runtime_error("boom");
    return cplx(0.0);
  };
  CHECK_THROWS_AS(qdl::parallel_sum(10000, bad, 4), std::runtime_error);
  CHECK_THROWS_AS(
      qdl::parallel_for(
          10000, [](long long i) { if (i == 123) throw std::domain_error("x"); },
          4),
      std::domain_error);
}

TEST_CASE("default_workers: environment override") {
  setenv("QDLMOM_WORKERS", "3", 1);
  CHECK(qdl::default_workers() == 3);
  setenv("QDLMOM_WORKERS", "9999", 1);
  CHECK(qdl::default_workers() == 256);  // clamped
  setenv("QDLMOM_WORKERS", "0", 1);
  CHECK(qdl::default_workers() >= 1);  // invalid, falls back
  setenv("QDLMOM_WORKERS", "garbage", 1);
  CHECK(qdl::default_workers() >= 1);
  unsetenv("QDLMOM_WORKERS");
  CHECK(qdl::default_workers() >= 1);
}
