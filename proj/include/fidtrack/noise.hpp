#pragma once

#include <cstdint>
#include <random>

namespace fidtrack {

// Reproducible standard-normal source. The engine is std::mt19937_64, which
// the standard pins down bit for bit; the normal transform is our own
// Box–Muller so the stream does not depend on the standard library vendor.
//
// Each uniform takes the top 53 bits of one engine output. Box–Muller uses
// u1 in (0, 1] and u2 in [0, 1) and yields r·cos(2πu2) first, then r·sin(2πu2).
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

  double next();

 private:
  double uniform_open_low();  // (0, 1]
  double uniform();           // [0, 1)

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fidtrack
