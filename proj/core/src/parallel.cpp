#include "qdl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qdl {

namespace {

constexpr long long kBlock = 4096;

struct KahanPair {
  double re = 0.0, im = 0.0;
  double cre = 0.0, cim = 0.0;

  void add(cplx x) {
    double y = x.real() - cre;
    double t = re + y;
    cre = (t - re) - y;
    re = t;
    y = x.imag() - cim;
    t = im + y;
    cim = (t - im) - y;
    im = t;
  }
  cplx value() const { return {re, im}; }
};

// Shared chunk-pulling loop: body(j) processes work unit j.
template <typename Body>
void run_workers(long long units, int workers,
                 const Body& body) {
  if (workers <= 0) workers = default_workers();
  if (units <= 0) return;
  if (workers > units) workers = static_cast<int>(units);

  std::atomic<long long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto drain = [&]() {
    try {
      for (;;) {
        long long j = next.fetch_add(1, std::memory_order_relaxed);
        if (j >= units) return;
        body(j);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(units, std::memory_order_relaxed);  // stop other workers
    }
  };

  if (workers == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("QDLMOM_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<int>(v > 256 ? 256 : v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

cplx parallel_sum(long long n, const std::function<cplx(long long)>& f,
                  int workers) {
  if (n <= 0) return 0.0;
  long long nblocks = (n + kBlock - 1) / kBlock;
  std::vector<cplx> partial(nblocks);

  run_workers(nblocks, workers, [&](long long b) {
    long long lo = b * kBlock;
    long long hi = std::min(n, lo + kBlock);
    KahanPair acc;
    for (long long i = lo; i < hi; ++i) acc.add(f(i));
    partial[b] = acc.value();
  });

  KahanPair total;
  for (long long b = 0; b < nblocks; ++b) total.add(partial[b]);
  return total.value();
}

void parallel_for(long long n, const std::function<void(long long)>& f,
                  int workers) {
  run_workers(n, workers, f);
}

}  // namespace qdl
