#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace potts {

// splitmix64 finalizer. Good enough to turn structured seeds (trial index,
// iteration index, read index) into well-separated generator states.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of an independent stream from a root seed. Streams with
// different indices never collide in practice; the same (root, stream) pair
// always yields the same seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return mix64(root + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// mt19937_64 wrapper with hand-rolled draws. std::uniform_int_distribution
// is implementation-defined, which would make results differ across
// standard libraries; the multiply-shift reduction below does not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // uniform in [0, n), n >= 1
  int uniform_int(int n) {
    return static_cast<int>(static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * static_cast<std::uint64_t>(n)) >> 64));
  }

  bool coin() { return (gen_() & 1ULL) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(static_cast<int>(i)))]);
  }

  // identity permutation of size n, shuffled
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace potts
