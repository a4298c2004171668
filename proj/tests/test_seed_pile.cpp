#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "pilecast/perlin.hpp"
#include "pilecast/rng.hpp"
#include "pilecast/seed_pile.hpp"

using namespace pilecast;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent gradient-noise reference: same permutation-table convention,
// written from the textbook recipe rather than the library code path.
struct ReferencePerlin {
    std::vector<int> p;

    explicit ReferencePerlin(std::uint64_t seed) : p(512) {
        std::vector<int> base(256);
        std::iota(base.begin(), base.end(), 0);
        Rng rng(splitmix64(seed));
        rng.shuffle(base);
        for (int i = 0; i < 512; ++i) p[i] = base[i % 256];
    }

    static double fade(double t) { return ((6 * t - 15) * t + 10) * t * t * t; }

    static double grad(int h, double x, double y) {
        const double gx[8] = {1, 1, -1, -1, 1, -1, 0, 0};
        const double gy[8] = {1, -1, 1, -1, 0, 0, 1, -1};
        return gx[h & 7] * x + gy[h & 7] * y;
    }

    double at(double x, double y) const {
        const int X = static_cast<int>(std::floor(x)) & 255;
        const int Y = static_cast<int>(std::floor(y)) & 255;
        const double fx = x - std::floor(x);
        const double fy = y - std::floor(y);
        const double u = fade(fx), v = fade(fy);
        const double a = grad(p[p[X] + Y], fx, fy);
        const double b = grad(p[p[X + 1] + Y], fx - 1, fy);
        const double c = grad(p[p[X] + Y + 1], fx, fy - 1);
        const double d = grad(p[p[X + 1] + Y + 1], fx - 1, fy - 1);
        const double top = a + u * (b - a);
        const double bot = c + u * (d - c);
        return (top + v * (bot - top)) / std::sqrt(2.0);
    }
};

double max_neighbor_tan(const GlobalHeightmap& H) {
    double worst = 0.0;
    for (int iy = 0; iy < H.ny; ++iy)
        for (int ix = 0; ix < H.nx; ++ix) {
            if (ix + 1 < H.nx)
                worst = std::max(worst, std::abs(H.at(ix, iy) - H.at(ix + 1, iy)));
            if (iy + 1 < H.ny)
                worst = std::max(worst, std::abs(H.at(ix, iy) - H.at(ix, iy + 1)));
        }
    return worst / H.cell_size;
}

}  // namespace

TEST_CASE("library noise matches the reference implementation") {
    const PerlinNoise lib(7);
    const ReferencePerlin ref(7);
    for (double x = -3.3; x < 3.3; x += 0.61)
        for (double y = -2.9; y < 2.9; y += 0.47)
            CHECK(lib.noise(x, y) == doctest::Approx(ref.at(x, y)).epsilon(1e-12));
}

TEST_CASE("noise is zero on lattice points and bounded") {
    const PerlinNoise pn(3);
    CHECK(pn.noise(2.0, -5.0) == doctest::Approx(0.0));
    double worst = 0.0;
    for (double x = 0.05; x < 8.0; x += 0.173)
        for (double y = 0.05; y < 8.0; y += 0.211)
            worst = std::max(worst, std::abs(pn.fractal(x, y, 3)));
    CHECK(worst <= 1.0);
    CHECK(worst > 0.05);  // not degenerate
}

TEST_CASE("un-noised wedge matches the analytic ramp to 1e-12") {
    PerlinParams off;
    off.amplitude = 0.0;
    const double slope = 30.0;
    const double extent = 12.0;
    const GlobalHeightmap H =
        make_seed_pile(PileKind::Wedged, slope, extent, 10.0, off, 0.1);
    const double tan_s = std::tan(slope * kPi / 180.0);
    double max_h = 0.0;
    for (int iy = 0; iy < H.ny; ++iy)
        for (int ix = 0; ix < H.nx; ++ix) {
            const double x = H.world_x(ix), y = H.world_y(iy);
            const double d = std::min(0.5 * extent - std::abs(x),
                                      0.5 * 1.6 * extent - std::abs(y));
            const double expect = d > 0.0 ? tan_s * d : 0.0;
            CHECK(H.at(ix, iy) == doctest::Approx(expect).epsilon(1e-12));
            max_h = std::max(max_h, H.at(ix, iy));
        }
    // Crest height = tan(slope) * half depth.
    CHECK(max_h == doctest::Approx(tan_s * 0.5 * extent).epsilon(1e-12));
}

TEST_CASE("un-noised cone matches h(r) = tan(s)*(R - r)") {
    PerlinParams off;
    off.amplitude = 0.0;
    const GlobalHeightmap H = make_seed_pile(PileKind::Conical, 20.0, 16.0, 10.0, off, 0.1);
    const double tan_s = std::tan(20.0 * kPi / 180.0);
    for (int iy = 0; iy < H.ny; iy += 3)
        for (int ix = 0; ix < H.nx; ix += 3) {
            const double r = std::hypot(H.world_x(ix), H.world_y(iy));
            const double expect = std::max(0.0, tan_s * (8.0 - r));
            CHECK(H.at(ix, iy) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("noise perturbs the pile but leaves the apron flat") {
    PerlinParams noise;
    noise.amplitude = 0.15;
    noise.seed = 7;
    PerlinParams off;
    off.amplitude = 0.0;
    const GlobalHeightmap Hn =
        make_seed_pile(PileKind::Triangular, 30.0, 12.0, 5.0, noise, 0.1);
    const GlobalHeightmap H0 =
        make_seed_pile(PileKind::Triangular, 30.0, 12.0, 5.0, off, 0.1);
    REQUIRE(Hn.nx == H0.nx);
    double max_dev = 0.0;
    for (int iy = 0; iy < Hn.ny; ++iy)
        for (int ix = 0; ix < Hn.nx; ++ix) {
            if (H0.at(ix, iy) == 0.0) CHECK(Hn.at(ix, iy) == 0.0);
            max_dev = std::max(max_dev, std::abs(Hn.at(ix, iy) - H0.at(ix, iy)));
            CHECK(Hn.at(ix, iy) >= 0.0);
        }
    CHECK(max_dev > 0.02);
    CHECK(max_dev <= 0.20);
}

TEST_CASE("noised faces never exceed slope + 5 degrees locally") {
    PerlinParams noise;
    noise.amplitude = 0.25;
    noise.frequency = 0.6;
    noise.seed = 123;
    for (double slope : {20.0, 30.0}) {
        const GlobalHeightmap H =
            make_seed_pile(PileKind::Wedged, slope, 10.0, 5.0, noise, 0.1);
        CHECK(max_neighbor_tan(H) <= std::tan((slope + 5.0) * kPi / 180.0) + 1e-12);
    }
}

TEST_CASE("same parameters and seed give bit-identical piles") {
    PerlinParams noise;
    noise.amplitude = 0.15;
    noise.seed = 42;
    const GlobalHeightmap A = make_seed_pile(PileKind::Conical, 25.0, 10.0, 4.0, noise, 0.1);
    const GlobalHeightmap B = make_seed_pile(PileKind::Conical, 25.0, 10.0, 4.0, noise, 0.1);
    CHECK(A.heights == B.heights);
}

TEST_CASE("noised pile regression values stay fixed") {
    // Frozen from the reference run; guarded by the live noise check above.
    PerlinParams noise;
    noise.amplitude = 0.15;
    noise.frequency = 0.35;
    noise.octaves = 3;
    noise.seed = 7;
    const GlobalHeightmap H =
        make_seed_pile(PileKind::Triangular, 30.0, 12.0, 5.0, noise, 0.1);
    // GOLDEN-BEGIN seed_pile_cells
    CHECK(H.nx == 221);
    CHECK(H.ny == 221);
    CHECK(pile_volume(H) == doctest::Approx(40.7411674489498).epsilon(1e-12));
    CHECK(H.at(110, 110) == doctest::Approx(1.932405088082965).epsilon(1e-12));
    CHECK(H.at(100, 95) == doctest::Approx(1.6355674392584342).epsilon(1e-12));
    CHECK(H.at(121, 119) == doctest::Approx(1.2784226275225348).epsilon(1e-12));
    // GOLDEN-END
}

TEST_CASE("parameter validation") {
    PerlinParams off;
    off.amplitude = 0.0;
    CHECK_THROWS_AS(make_seed_pile(PileKind::Conical, 0.0, 10.0, 5.0, off, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_seed_pile(PileKind::Conical, 50.0, 10.0, 5.0, off, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_seed_pile(PileKind::Conical, 20.0, -1.0, 5.0, off, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_seed_pile(PileKind::Conical, 20.0, 10.0, 0.0, off, 0.1),
                    std::invalid_argument);
    CHECK(pile_kind_from_string("wedged") == PileKind::Wedged);
    CHECK_THROWS_AS(pile_kind_from_string("cube"), std::invalid_argument);
}
