#include "qdl/arith.hpp"

#include <bit>
#include <stdexcept>
#include <string>
#include <utility>

namespace qdl {

namespace {

// Jacobi symbol (a|n) for odd positive n, any a. Binary algorithm:
// strip twos with the (2|n) rule, flip by quadratic reciprocity, reduce.
int jacobi_odd(long long a, long long n) {
  int sign = 1;
  a %= n;
  if (a < 0) a += n;
  while (a != 0) {
    int v = std::countr_zero(static_cast<unsigned long long>(a));
    a >>= v;
    if (v & 1) {
      long long r = n & 7;
      if (r == 3 || r == 5) sign = -sign;
    }
    if ((a & 3) == 3 && (n & 3) == 3) sign = -sign;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? sign : 0;
}

}  // namespace

int kronecker(long long a, long long n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int sign = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) sign = -sign;  // (a|-1) = -1 for a < 0
  }
  if (((a | n) & 1) == 0) return 0;  // both even
  int v = std::countr_zero(static_cast<unsigned long long>(n));
  n >>= v;
  if (v & 1) {
    // (a|2) by a mod 8: +1 for a = +-1, -1 for a = +-3; a is odd here
    // because the both-even case already returned 0.
    long long r = ((a % 8) + 8) % 8;
    if (r == 3 || r == 5) sign = -sign;
  }
  return sign * jacobi_odd(a, n);
}

int chi8d(long long d, long long n) {
  if (d <= 0 || (d & 1) == 0 || !is_squarefree_ll(d))
    throw std::invalid_argument("chi8d: d must be positive, odd and squarefree (got " +
                                std::to_string(d) + ")");
  if ((n & 1) == 0) return 0;
  return kronecker(8 * d, n);
}

SieveTables build_sieves(long long limit) {
  if (limit < 1) throw std::invalid_argument("build_sieves: limit must be >= 1");
  constexpr long long kCap = 1LL << 28;  // ~268M entries, a few GiB of tables
  if (limit > kCap) throw std::length_error("build_sieves: limit exceeds internal cap");

  SieveTables t;
  t.limit = limit;
  t.moebius.assign(limit + 1, 0);
  t.totient.assign(limit + 1, 0);
  t.spf.assign(limit + 1, 0);

  std::vector<std::int32_t> primes;
  primes.reserve(limit > 16 ? static_cast<size_t>(limit / 8) : 8);

  t.moebius[1] = 1;
  t.totient[1] = 1;
  t.spf[1] = 1;
  for (long long i = 2; i <= limit; ++i) {
    if (t.spf[i] == 0) {
      t.spf[i] = static_cast<std::int32_t>(i);
      t.moebius[i] = -1;
      t.totient[i] = i - 1;
      primes.push_back(static_cast<std::int32_t>(i));
    }
    for (std::int32_t p : primes) {
      if (p > t.spf[i] || i * p > limit) break;
      long long ip = i * p;
      t.spf[ip] = p;
      if (p == t.spf[i]) {
        t.moebius[ip] = 0;
        t.totient[ip] = t.totient[i] * p;
        break;
      }
      t.moebius[ip] = static_cast<std::int8_t>(-t.moebius[i]);
      t.totient[ip] = t.totient[i] * (p - 1);
    }
  }

  for (long long n = 1; n <= limit; n += 2)
    if (t.moebius[n] != 0) t.odd_squarefree.push_back(n);
  return t;
}

bool is_squarefree_ll(long long n) {
  if (n <= 0) return false;
  if (n % 4 == 0) return false;
  while ((n & 1) == 0) n >>= 1;
  for (long long p = 3; p * p <= n; p += 2) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return false;
    }
  }
  return true;
}

std::vector<long long> prime_factors(long long n, const SieveTables* tables) {
  if (n < 1) throw std::invalid_argument("prime_factors: n must be >= 1");
  std::vector<long long> out;
  if (tables && n <= tables->limit) {
    while (n > 1) {
      long long p = tables->spf[n];
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
    return out;
  }
  for (long long p = 2; p * p <= n; p = (p == 2 ? 3 : p + 2)) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::vector<long long> primes_upto(long long limit) {
  std::vector<long long> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (long long i = 2; i <= limit; ++i) {
    if (!composite[i]) {
      primes.push_back(i);
      for (long long j = i * i; j <= limit; j += i) composite[j] = true;
    }
  }
  return primes;
}

void chi8d_sieve(long long d, long long nmax, const SieveTables& tables,
                 std::vector<std::int8_t>& out) {
  if (nmax > tables.limit)
    throw std::invalid_argument("chi8d_sieve: nmax exceeds sieve limit");
  if (d <= 0 || (d & 1) == 0 || !is_squarefree_ll(d))
    throw std::invalid_argument("chi8d_sieve: d must be positive, odd and squarefree");
  out.assign(nmax + 1, 0);
  if (nmax >= 1) out[1] = 1;
  // chi is completely multiplicative, so chi(n) = chi(spf) * chi(n / spf);
  // the Kronecker kernel runs only once per odd prime.
  for (long long n = 3; n <= nmax; n += 2) {
    long long p = tables.spf[n];
    if (p == n)
      out[n] = static_cast<std::int8_t>(kronecker(8 * d, n));
    else
      out[n] = static_cast<std::int8_t>(out[p] * out[n / p]);
  }
}

}  // namespace qdl
