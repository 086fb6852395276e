#ifndef GFM_COMMON_HPP
#define GFM_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfm {

// Error taxonomy mirrored by the CLI exit codes: Config -> 2, Io -> 3,
// Numeric -> 4. Shape and Logic faults are programming/contract errors and
// map to the generic failure code.
enum class ErrorKind { Config, Io, Numeric, Shape, Logic };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorKind::Config, "config: " + msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorKind::Io, "io: " + msg);
}
[[noreturn]] inline void throw_numeric(const std::string& msg) {
  throw Error(ErrorKind::Numeric, "numeric: " + msg);
}
[[noreturn]] inline void throw_shape(const std::string& msg) {
  throw Error(ErrorKind::Shape, "shape: " + msg);
}
[[noreturn]] inline void throw_logic(const std::string& msg) {
  throw Error(ErrorKind::Logic, "logic: " + msg);
}

// Deterministic RNG. All draws go through the raw 64-bit output of
// mt19937_64 so the produced doubles/integers do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), n >= 1 (Lemire multiply-shift).
  uint64_t uniform_int(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Splitmix64 finalizer; used to derive independent seeds per stream
// (e.g. one per training epoch) from a base seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gfm

#endif  // GFM_COMMON_HPP
