#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mtg {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a training run over a task subset. Depends only on the base seed
// and the set of task indices (order ignored), so training a one-task "group"
// and training that task on its own start from the same stream.
inline uint64_t derive_seed(uint64_t base, std::span<const int> tasks) {
  std::vector<int> sorted(tasks.begin(), tasks.end());
  std::sort(sorted.begin(), sorted.end());
  uint64_t h = splitmix64(base ^ 0x7461736b73656564ULL);
  for (int t : sorted) h = splitmix64(h ^ uint64_t(uint32_t(t)));
  return h;
}

// mt19937_64 with explicit output mappings. The std distribution objects are
// implementation-defined, so every draw here goes through our own arithmetic
// to keep results reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  float uniformf(float lo, float hi) { return float(uniform(double(lo), double(hi))); }

  bool bernoulli(double p) { return uniform() < p; }

  // unbiased integer in [0, n), n >= 1
  uint64_t below(uint64_t n) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do { x = next(); } while (x >= limit);
    return x % n;
  }
  int index(int n) { return int(below(uint64_t(n))); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[size_t(below(uint64_t(i)))]);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mtg
