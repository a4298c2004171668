#include "pilecast/characterize.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pilecast {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::array<double, 3> mean_normal(const LocalHeightmap& h) {
    if (h.I < 2 || h.J < 2)
        throw std::invalid_argument("mean_normal needs I, J >= 2");
    const double dl = h.cell_size;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (int i = 0; i <= h.I; ++i) {
        for (int j = -h.J / 2; j <= h.J / 2; ++j) {
            double gx, gy;
            if (i == 0)
                gx = (h.at(1, j) - h.at(0, j)) / dl;
            else if (i == h.I)
                gx = (h.at(h.I, j) - h.at(h.I - 1, j)) / dl;
            else
                gx = (h.at(i + 1, j) - h.at(i - 1, j)) / (2.0 * dl);
            if (j == -h.J / 2)
                gy = (h.at(i, j + 1) - h.at(i, j)) / dl;
            else if (j == h.J / 2)
                gy = (h.at(i, j) - h.at(i, j - 1)) / dl;
            else
                gy = (h.at(i, j + 1) - h.at(i, j - 1)) / (2.0 * dl);
            const double inv = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
            sx += -gx * inv;
            sy += -gy * inv;
            sz += inv;
        }
    }
    const double n = std::sqrt(sx * sx + sy * sy + sz * sz);
    return {sx / n, sy / n, sz / n};
}

double slope_angle(const std::array<double, 3>& n) {
    return std::acos(std::clamp(n[2], -1.0, 1.0));
}

double incidence_angle_raw(const std::array<double, 3>& n) {
    const double np = std::hypot(n[0], n[1]);
    if (np <= 1e-9) throw FlatPatchError{};
    return std::acos(std::clamp(n[0] / np, -1.0, 1.0));
}

double incidence_angle(const std::array<double, 3>& n) {
    return kPi - incidence_angle_raw(n);
}

void fit_curvature(const LocalHeightmap& h, double& kappa_x, double& kappa_y) {
    const int rows = h.rows() * h.cols();
    if (rows < 5) throw std::invalid_argument("fit_curvature needs >= 5 samples");
    const double dl = h.cell_size;
    const double cx = 0.5 * h.I * dl;  // centroid of the window
    Eigen::MatrixXd A(rows, 5);
    Eigen::VectorXd z(rows);
    int r = 0;
    for (int i = 0; i <= h.I; ++i) {
        for (int j = -h.J / 2; j <= h.J / 2; ++j, ++r) {
            const double x = i * dl - cx;
            const double y = j * dl;
            A(r, 0) = 1.0;
            A(r, 1) = x;
            A(r, 2) = y;
            A(r, 3) = x * x;
            A(r, 4) = y * y;
            z(r) = h.at(i, j);
        }
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(z);
    kappa_x = -2.0 * coef(3);
    kappa_y = -2.0 * coef(4);
}

PileCharacteristics characterize(const LocalHeightmap& h) {
    PileCharacteristics c;
    const auto n = mean_normal(h);
    c.theta = slope_angle(n);
    c.alpha = incidence_angle(n);  // may throw FlatPatchError
    fit_curvature(h, c.kappa_x, c.kappa_y);
    return c;
}

}  // namespace pilecast
