#pragma once

#include <cstdint>
#include <vector>

namespace qdl {

// Kronecker symbol (a|n), extended to all integers: multiplicative in both
// arguments, (a|2) driven by a mod 8, (a|-1) = sign handling, (a|0) = [a = +-1].
// Computed by the binary-shift algorithm, no factorization.
int kronecker(long long a, long long n);

// chi_{8d}(n) = kronecker(8d, n): the even primitive real character of
// conductor 8d. Requires d positive, odd and squarefree; throws
// std::invalid_argument otherwise. Returns 0 for even n.
int chi8d(long long d, long long n);

// Dense multiplicative-function tables over 1..limit. Immutable after build;
// safe to share across threads.
struct SieveTables {
  long long limit = 0;
  std::vector<std::int8_t> moebius;        // moebius[n], index 0 unused
  std::vector<std::int64_t> totient;       // totient[n]
  std::vector<std::int32_t> spf;           // smallest prime factor, spf[1] = 1
  std::vector<long long> odd_squarefree;   // ascending odd squarefree n <= limit

  bool is_squarefree(long long n) const { return moebius[n] != 0; }
};

// Linear sieve in O(limit). Throws std::invalid_argument for limit < 1 and
// std::length_error above an internal cap (guards against absurd allocations).
SieveTables build_sieves(long long limit);

// Trial-division squarefreeness test for one-off validation (no tables).
bool is_squarefree_ll(long long n);

// Distinct prime factors of n >= 1 in ascending order. Uses tables.spf when
// n <= tables->limit, trial division otherwise.
std::vector<long long> prime_factors(long long n, const SieveTables* tables = nullptr);

// All primes <= limit, ascending.
std::vector<long long> primes_upto(long long limit);

// Fills out[0..nmax] with chi_{8d}(n) via a multiplicative sieve; equivalent to
// calling chi8d(d, n) for each n but O(1) amortized per entry. Requires
// tables.limit >= nmax.
void chi8d_sieve(long long d, long long nmax, const SieveTables& tables,
                 std::vector<std::int8_t>& out);

}  // namespace qdl
