#include "pilecast/perlin.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "pilecast/rng.hpp"

namespace pilecast {

namespace {

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }
double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

PerlinNoise::PerlinNoise(std::uint64_t seed) {
    std::vector<int> p(256);
    std::iota(p.begin(), p.end(), 0);
    Rng rng(splitmix64(seed));
    rng.shuffle(p);
    for (int i = 0; i < 256; ++i) {
        perm_[i] = p[i];
        perm_[i + 256] = p[i];
    }
}

double PerlinNoise::grad(int hash, double dx, double dy) const {
    // 8 gradient directions on the unit circle's diagonals and axes.
    switch (hash & 7) {
        case 0: return dx + dy;
        case 1: return dx - dy;
        case 2: return -dx + dy;
        case 3: return -dx - dy;
        case 4: return dx;
        case 5: return -dx;
        case 6: return dy;
        default: return -dy;
    }
}

double PerlinNoise::noise(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int X = static_cast<int>(fx) & 255;
    const int Y = static_cast<int>(fy) & 255;
    const double dx = x - fx;
    const double dy = y - fy;
    const double u = fade(dx);
    const double v = fade(dy);

    const int aa = perm_[perm_[X] + Y];
    const int ab = perm_[perm_[X] + Y + 1];
    const int ba = perm_[perm_[X + 1] + Y];
    const int bb = perm_[perm_[X + 1] + Y + 1];

    const double n00 = grad(aa, dx, dy);
    const double n10 = grad(ba, dx - 1.0, dy);
    const double n01 = grad(ab, dx, dy - 1.0);
    const double n11 = grad(bb, dx - 1.0, dy - 1.0);

    // Normalize by sqrt(2) so single-octave output stays within [-1, 1].
    return lerp(lerp(n00, n10, u), lerp(n01, n11, u), v) * 0.7071067811865476;
}

double PerlinNoise::fractal(double x, double y, int octaves) const {
    double sum = 0.0;
    double amp = 1.0;
    double freq = 1.0;
    double norm = 0.0;
    for (int o = 0; o < octaves; ++o) {
        sum += amp * noise(x * freq + 31.0 * o, y * freq + 17.0 * o);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    return sum / norm;
}

}  // namespace pilecast
