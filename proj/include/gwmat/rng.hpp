#pragma once

// Counter-based random number generation: splitmix64 streams keyed by a
// 64-bit seed, giving bit-exact cross-platform reproducibility and cheap
// splitting into independent per-replicate substreams.

#include <cmath>
#include <cstdint>
#include <vector>

namespace gwmat {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // independent substream for replicate/task `index`
  Rng split(std::uint64_t index) const {
    return Rng(detail::splitmix64(state_ ^ (0xd1342543de82ef95ULL * (index + 1))));
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_ += kGolden); }

  // uniform on (0, 1): never exactly 0 or 1, safe inside log/probit
  double uniform() {
    return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // standard normal via Box-Muller (cached second variate)
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::vector<double> normals(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal();
    return out;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gwmat
