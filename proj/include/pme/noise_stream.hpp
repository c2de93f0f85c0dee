#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace pme {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output depends only on (key, counter); no hidden state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Brownian increments keyed by (seed, step, mode). Regenerating any increment
/// reproduces it bit-exactly, independent of evaluation order or thread.
class NoiseIncrements {
public:
    explicit NoiseIncrements(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Standard normal for (step, mode).
    double standard_normal(std::uint64_t step, std::uint64_t mode) const;

    /// dW^k for k = 0..out.size()-1 at `step`, each with variance dt.
    void fill(std::uint64_t step, double dt, std::span<double> out) const;

private:
    std::uint64_t seed_;
};

}  // namespace pme
