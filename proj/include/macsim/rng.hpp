#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "macsim/time.hpp"

namespace macsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One deterministic stream, seeded from (master seed, node, purpose).
// Draws are independent of every other stream's usage.
class RngStream {
 public:
  RngStream() : gen_(0) {}
  RngStream(std::uint64_t master_seed, NodeId node, const std::string& purpose) {
    std::uint64_t h = master_seed;
    h = splitmix64(h ^ (static_cast<std::uint64_t>(node) + 1));
    for (char c : purpose) h = splitmix64(h ^ static_cast<std::uint8_t>(c));
    gen_.seed(h);
  }

  // Uniform over [0, n). n = 0 is a hard error.
  std::uint64_t draw(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::draw: n must be >= 1");
    if (n == 1) return 0;
    // Rejection sampling keeps the result portable across standard libraries.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  double uniform01() {
    // 53-bit mantissa, uniform in [0, 1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Exponential with the given mean, in ticks (>= 1).
  Tick exponential(Tick mean) {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    const double v = -static_cast<double>(mean) * std::log(u);
    if (v < 1.0) return 1;
    return static_cast<Tick>(v);
  }

  // Uniform in [-1, 1].
  double symmetric_unit() { return uniform01() * 2.0 - 1.0; }

 private:
  std::mt19937_64 gen_;
};

// Lazily-created per-(node, purpose) streams off one master seed.
class RngSource {
 public:
  explicit RngSource(std::uint64_t master_seed) : master_seed_(master_seed) {}

  RngStream& stream(NodeId node, const std::string& purpose) {
    auto key = std::make_pair(node, purpose);
    auto it = streams_.find(key);
    if (it == streams_.end()) {
      it = streams_.emplace(key, RngStream(master_seed_, node, purpose)).first;
    }
    return it->second;
  }

  std::uint64_t master_seed() const { return master_seed_; }

 private:
  std::uint64_t master_seed_;
  std::map<std::pair<NodeId, std::string>, RngStream> streams_;
};

}  // namespace macsim
