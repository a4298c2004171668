#pragma once

#include <string>

#include "pilecast/heightmap.hpp"
#include "pilecast/perlin.hpp"

namespace pilecast {

enum class PileKind { Triangular, Conical, Wedged };

PileKind pile_kind_from_string(const std::string& s);
std::string to_string(PileKind k);

// Analytic seed pile centered in a world box with a flat apron around it.
//
//  triangular: equilateral-triangle footprint with side `extent`
//  conical:    disk footprint with radius extent/2
//  wedged:     rectangle footprint, depth `extent` along x, length 1.6*extent
//
// Heights are tan(slope) times the distance to the footprint boundary, capped
// at height_cap. Perlin noise perturbs the pile surface only (tapered to zero
// at the pile edge) and the result is slope-limited so no face exceeds
// slope_deg + 5 degrees locally. amplitude == 0 reproduces the analytic
// shapes exactly.
GlobalHeightmap make_seed_pile(PileKind kind, double slope_deg, double extent,
                               double height_cap, const PerlinParams& noise,
                               double cell_size, double apron = 5.0);

}  // namespace pilecast
