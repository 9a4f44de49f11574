#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace yatt {

// Error taxonomy. The CLI maps these onto exit codes: config/usage -> 1,
// data/io -> 2, numeric -> 3.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(const void* bytes, std::size_t len,
                             std::uint64_t hash = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Every stochastic step draws from a sub-seed derived from the single run
// seed and a purpose string, so adding or reordering consumers never
// perturbs unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose) {
  return splitmix64(master ^ fnv1a64(purpose));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(master, purpose) ^ splitmix64(index));
}

// Shortest round-trip-exact decimal form of a double.
inline std::string fmt_double(double x) {
  char buf[32];
  // moderate integers read better in plain form than as %g scientific
  if (x == std::floor(x) && std::fabs(x) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == x) {
    // try to shorten; %.17g is always exact but often longer than needed
    for (int prec = 1; prec < 17; ++prec) {
      char s[32];
      std::snprintf(s, sizeof(s), "%.*g", prec, x);
      std::sscanf(s, "%lf", &back);
      if (back == x) return s;
    }
  }
  return buf;
}

}  // namespace yatt
