#pragma once

#include <array>
#include <stdexcept>

#include "pilecast/dig_frame.hpp"

namespace pilecast {

// Four-scalar local pile descriptor: slope angle, incidence angle (reported
// with the head-on = 0 convention), and longitudinal/lateral curvatures.
struct PileCharacteristics {
    double theta = 0.0;    // rad, [0, pi/2)
    double alpha = 0.0;    // rad, [0, pi]; 0 = attack along the inward normal
    double kappa_x = 0.0;  // 1/m, positive for convex piles
    double kappa_y = 0.0;  // 1/m

    std::array<double, 4> as_array() const { return {theta, alpha, kappa_x, kappa_y}; }
};

struct FlatPatchError : std::domain_error {
    FlatPatchError() : std::domain_error("incidence undefined: patch is flat") {}
};

// Average of per-node normals from finite differences (central in the
// interior, one-sided at the borders), re-normalized. z component is always
// positive for a height field.
std::array<double, 3> mean_normal(const LocalHeightmap& h);

// theta = acos(n . e_z)
double slope_angle(const std::array<double, 3>& n);

// Literal formula: alpha_raw = acos(n_perp . e_x / |n_perp|). The projected
// normal of a slope rising along +x points along -x, so a head-on attack
// yields alpha_raw = pi. Throws FlatPatchError when |n_perp| <= 1e-9.
double incidence_angle_raw(const std::array<double, 3>& n);

// Reported convention: alpha = pi - alpha_raw, so head-on = 0.
double incidence_angle(const std::array<double, 3>& n);

// OLS fit of b + c^T x + 0.5 x^T diag(-kx, -ky) x over all nodes, coordinates
// centered on the window centroid. Needs at least 5 samples.
void fit_curvature(const LocalHeightmap& h, double& kappa_x, double& kappa_y);

PileCharacteristics characterize(const LocalHeightmap& h);

}  // namespace pilecast
