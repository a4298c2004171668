#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pilecast/rng.hpp"

namespace pilecast::nn {

using Matrix = Eigen::MatrixXd;  // rows = batch samples

enum class Activation { LeakyReLU, Swish };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

constexpr double kLeakySlope = 0.01;

double activate(Activation a, double x);
double activate_grad(Activation a, double x);  // at x == 0 LeakyReLU uses the negative slope

// Parameter visitor: name, values, gradient accumulator (same length).
using ParamVisitor =
    std::function<void(const std::string&, Eigen::VectorXd&, Eigen::VectorXd&)>;

// Batched image block, row-major [b][c][y][x].
struct Image {
    int b = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Image() = default;
    Image(int b_, int c_, int h_, int w_) : b(b_), c(c_), h(h_), w(w_), v(size(), 0.0) {}
    std::size_t size() const { return static_cast<std::size_t>(b) * c * h * w; }
    std::size_t idx(int bi, int ci, int y, int x) const {
        return ((static_cast<std::size_t>(bi) * c + ci) * h + y) * w + x;
    }
    double at(int bi, int ci, int y, int x) const { return v[idx(bi, ci, y, x)]; }
    double& at(int bi, int ci, int y, int x) { return v[idx(bi, ci, y, x)]; }
};

struct DenseLayer {
    Eigen::VectorXd W;  // out x in, row-major
    Eigen::VectorXd b;
    Eigen::VectorXd gW, gb;
    int in = 0, out = 0;
    Matrix x_cache;

    DenseLayer(int in_dim, int out_dim, Rng& init);
    Matrix forward(const Matrix& x, bool cache);
    Matrix backward(const Matrix& dy);
    void visit(const std::string& prefix, const ParamVisitor& f);
};

struct ActivationLayer {
    Activation kind;
    Matrix x_cache;

    explicit ActivationLayer(Activation a) : kind(a) {}
    Matrix forward(const Matrix& x, bool cache);
    Matrix backward(const Matrix& dy) const;
};

struct DropoutLayer {
    double rate;
    Matrix mask;

    explicit DropoutLayer(double r) : rate(r) {}
    // Identity when train == false. Inverted dropout when training, drawing
    // the mask from rng in row-major order.
    Matrix forward(const Matrix& x, bool train, Rng& rng);
    Matrix backward(const Matrix& dy) const;
};

struct Conv2dLayer {
    int in_ch = 0, out_ch = 0, k = 3;  // stride 1, zero padding k/2
    Eigen::VectorXd W;                 // [out][in][ky][kx]
    Eigen::VectorXd b;
    Eigen::VectorXd gW, gb;
    Image x_cache;

    Conv2dLayer(int in_channels, int out_channels, int kernel, Rng& init);
    Image forward(const Image& x, bool cache);
    Image backward(const Image& dy);
    void visit(const std::string& prefix, const ParamVisitor& f);
};

struct BatchNorm2dLayer {
    int ch = 0;
    double momentum = 0.1;
    double eps = 1e-5;
    Eigen::VectorXd gamma, beta, ggamma, gbeta;
    Eigen::VectorXd running_mean, running_var;
    // caches (training mode)
    Image xhat_cache;
    Eigen::VectorXd inv_std_cache, mean_cache;
    bool train_cache = false;

    explicit BatchNorm2dLayer(int channels);
    // Training mode normalizes with batch statistics and updates the running
    // ones; inference uses the frozen running statistics.
    Image forward(const Image& x, bool train);
    Image backward(const Image& dy);
    void visit(const std::string& prefix, const ParamVisitor& f);
};

struct MaxPool2x2Layer {
    std::vector<std::uint32_t> argmax;
    int in_h = 0, in_w = 0;

    Image forward(const Image& x);
    Image backward(const Image& dy, int b, int c) const;
};

Matrix image_to_matrix(const Image& img);  // flatten to [b] x [c*h*w]
Image matrix_to_image(const Matrix& m, int c, int h, int w);

}  // namespace pilecast::nn
