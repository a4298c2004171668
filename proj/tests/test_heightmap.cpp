#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pilecast/heightmap.hpp"
#include "pilecast/rng.hpp"
#include "pilecast/seed_pile.hpp"

using namespace pilecast;

TEST_CASE("flat map basics") {
    const GlobalHeightmap H = make_flat_map(20, 30, 0.1, -1.0, -1.5);
    CHECK(pile_volume(H) == 0.0);
    CHECK(H.sample(-1.0, -1.5) == 0.0);
    CHECK(H.sample(0.9, 1.4) == 0.0);
    CHECK_THROWS_AS(H.sample(1.0, 0.0), std::out_of_range);
}

TEST_CASE("bilinear sampling interpolates between nodes") {
    GlobalHeightmap H = make_flat_map(3, 3, 1.0, 0.0, 0.0);
    H.at(1, 1) = 4.0;
    CHECK(H.sample(1.0, 1.0) == 4.0);
    CHECK(H.sample(0.5, 1.0) == doctest::Approx(2.0));
    CHECK(H.sample(1.0, 0.75) == doctest::Approx(3.0));
    CHECK(H.sample(0.5, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("validation rejects bad maps") {
    GlobalHeightmap H = make_flat_map(4, 4, 0.1, 0.0, 0.0);
    H.cell_size = 0.0;
    CHECK_THROWS_AS(H.validate(), std::invalid_argument);
    H.cell_size = 0.1;
    H.heights[3] = std::nan("");
    CHECK_THROWS_AS(H.validate(), std::invalid_argument);
}

TEST_CASE("cone volume matches the analytic value within 1%") {
    PerlinParams no_noise;
    no_noise.amplitude = 0.0;
    // extent is the footprint diameter: R = 10 m.
    const GlobalHeightmap H =
        make_seed_pile(PileKind::Conical, 20.0, 20.0, 10.0, no_noise, 0.1);
    const double analytic =
        M_PI * 100.0 * std::tan(20.0 * M_PI / 180.0) / 3.0;
    CHECK(pile_volume(H) == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("heightmap file round-trips bit-exactly") {
    Rng rng(99);
    GlobalHeightmap H = make_flat_map(17, 11, 0.1, -0.85, -0.55);
    for (double& h : H.heights) h = rng.uniform(-2.0, 7.0);
    const std::string path = "hm_roundtrip.hm";
    const std::uint64_t seed = 1234;
    save_heightmap(H, path, &seed);
    const GlobalHeightmap R = load_heightmap(path);
    REQUIRE(R.nx == H.nx);
    REQUIRE(R.ny == H.ny);
    CHECK(R.cell_size == H.cell_size);
    CHECK(R.origin_x == H.origin_x);
    CHECK(R.origin_y == H.origin_y);
    CHECK(R.heights == H.heights);  // exact, not approximate
    // Saving the loaded map reproduces the same bytes.
    save_heightmap(R, path + "2", &seed);
    std::ifstream a(path, std::ios::binary), b(path + "2", std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    std::remove(path.c_str());
    std::remove((path + "2").c_str());
}

TEST_CASE("malformed heightmap files are rejected") {
    CHECK_THROWS(heightmap_from_string("NOT-A-MAP 1\n"));
    CHECK_THROWS(heightmap_from_string("PILECAST-HM 1\n2 2 0.1 0 0\n0 0\n"));      // truncated
    CHECK_THROWS(heightmap_from_string("PILECAST-HM 1\n2 2 0.1 0 0\n0 0 0\n0 0\n"));  // ragged
}

TEST_CASE("hash differs on content changes") {
    GlobalHeightmap H = make_flat_map(5, 5, 0.1, 0.0, 0.0);
    const auto h0 = heightmap_hash(H);
    H.at(2, 2) = 1e-12;
    CHECK(heightmap_hash(H) != h0);
}
