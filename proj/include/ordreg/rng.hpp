#pragma once

#include <boost/math/distributions/normal.hpp>
#include <cstdint>
#include <random>
#include <vector>

namespace ordreg {

// Seedable generator with portable output streams. The engine is the
// standard-defined mt19937_64; uniforms and normals are derived from its raw
// bits directly (inverse CDF for normals) so draws do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    static const boost::math::normal_distribution<double> std_normal;
    return boost::math::quantile(std_normal, uniform());
  }

  // Fisher-Yates with indices from the raw stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(engine_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives independent stream seeds from a master seed (splitmix64 of the
  // master xored with a stream tag).
  static uint64_t stream_seed(uint64_t master, uint64_t stream) {
    uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ordreg
