#pragma once

#include <array>
#include <cstdint>

namespace pilecast {

struct PerlinParams {
    double amplitude = 0.0;   // m
    double frequency = 0.35;  // 1/m
    int octaves = 3;
    std::uint64_t seed = 0;
};

// 2D gradient noise in [-1, 1], quintic fade, permutation table shuffled from
// the seed with the project's fixed Fisher-Yates (see rng.hpp).
class PerlinNoise {
public:
    explicit PerlinNoise(std::uint64_t seed);

    double noise(double x, double y) const;

    // Sum of `octaves` noise layers, each doubling frequency and halving
    // amplitude, normalized back into roughly [-1, 1].
    double fractal(double x, double y, int octaves) const;

private:
    std::array<int, 512> perm_{};
    double grad(int hash, double dx, double dy) const;
};

}  // namespace pilecast
