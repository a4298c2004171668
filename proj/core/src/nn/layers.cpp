#include "pilecast/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace pilecast::nn {

Activation activation_from_string(const std::string& s) {
    if (s == "leaky_relu") return Activation::LeakyReLU;
    if (s == "swish") return Activation::Swish;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
    return a == Activation::LeakyReLU ? "leaky_relu" : "swish";
}

double activate(Activation a, double x) {
    if (a == Activation::LeakyReLU) return x > 0.0 ? x : kLeakySlope * x;
    const double s = 1.0 / (1.0 + std::exp(-x));
    return x * s;
}

double activate_grad(Activation a, double x) {
    if (a == Activation::LeakyReLU) return x > 0.0 ? 1.0 : kLeakySlope;
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

namespace {

double kaiming_bound(int fan_in) { return std::sqrt(6.0 / fan_in); }

using RowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

DenseLayer::DenseLayer(int in_dim, int out_dim, Rng& init) : in(in_dim), out(out_dim) {
    W.resize(static_cast<Eigen::Index>(in) * out);
    b = Eigen::VectorXd::Zero(out);
    gW = Eigen::VectorXd::Zero(W.size());
    gb = Eigen::VectorXd::Zero(out);
    const double bound = kaiming_bound(in);
    for (Eigen::Index i = 0; i < W.size(); ++i) W(i) = init.uniform(-bound, bound);
}

Matrix DenseLayer::forward(const Matrix& x, bool cache) {
    if (x.cols() != in) throw std::invalid_argument("dense: input dimension mismatch");
    if (cache) x_cache = x;
    ConstRowMajorMap Wm(W.data(), out, in);
    Matrix y = x * Wm.transpose();
    y.rowwise() += b.transpose();
    return y;
}

Matrix DenseLayer::backward(const Matrix& dy) {
    ConstRowMajorMap Wm(W.data(), out, in);
    RowMajorMap gWm(gW.data(), out, in);
    gWm.noalias() += dy.transpose() * x_cache;
    gb.noalias() += dy.colwise().sum().transpose();
    return dy * Wm;
}

void DenseLayer::visit(const std::string& prefix, const ParamVisitor& f) {
    f(prefix + ".W", W, gW);
    f(prefix + ".b", b, gb);
}

Matrix ActivationLayer::forward(const Matrix& x, bool cache) {
    if (cache) x_cache = x;
    Matrix y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = activate(kind, y(i));
    return y;
}

Matrix ActivationLayer::backward(const Matrix& dy) const {
    Matrix dx = dy;
    for (Eigen::Index i = 0; i < dx.size(); ++i) dx(i) *= activate_grad(kind, x_cache(i));
    return dx;
}

Matrix DropoutLayer::forward(const Matrix& x, bool train, Rng& rng) {
    if (!train || rate <= 0.0) {
        mask.resize(0, 0);
        return x;
    }
    const double keep = 1.0 - rate;
    mask.resize(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            mask(r, c) = rng.uniform() >= rate ? 1.0 / keep : 0.0;
    return x.cwiseProduct(mask);
}

Matrix DropoutLayer::backward(const Matrix& dy) const {
    if (mask.size() == 0) return dy;
    return dy.cwiseProduct(mask);
}

Conv2dLayer::Conv2dLayer(int in_channels, int out_channels, int kernel, Rng& init)
    : in_ch(in_channels), out_ch(out_channels), k(kernel) {
    W.resize(static_cast<Eigen::Index>(out_ch) * in_ch * k * k);
    b = Eigen::VectorXd::Zero(out_ch);
    gW = Eigen::VectorXd::Zero(W.size());
    gb = Eigen::VectorXd::Zero(out_ch);
    const double bound = kaiming_bound(in_ch * k * k);
    for (Eigen::Index i = 0; i < W.size(); ++i) W(i) = init.uniform(-bound, bound);
}

Image Conv2dLayer::forward(const Image& x, bool cache) {
    if (x.c != in_ch) throw std::invalid_argument("conv: channel mismatch");
    if (cache) x_cache = x;
    const int pad = k / 2;
    Image y(x.b, out_ch, x.h, x.w);
    for (int bi = 0; bi < x.b; ++bi)
        for (int oc = 0; oc < out_ch; ++oc)
            for (int yy = 0; yy < x.h; ++yy)
                for (int xx = 0; xx < x.w; ++xx) {
                    double acc = b(oc);
                    for (int ic = 0; ic < in_ch; ++ic)
                        for (int ky = 0; ky < k; ++ky) {
                            const int sy = yy + ky - pad;
                            if (sy < 0 || sy >= x.h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int sx = xx + kx - pad;
                                if (sx < 0 || sx >= x.w) continue;
                                acc += W[((static_cast<std::size_t>(oc) * in_ch + ic) * k + ky) * k + kx] *
                                       x.at(bi, ic, sy, sx);
                            }
                        }
                    y.at(bi, oc, yy, xx) = acc;
                }
    return y;
}

Image Conv2dLayer::backward(const Image& dy) {
    const Image& x = x_cache;
    const int pad = k / 2;
    Image dx(x.b, x.c, x.h, x.w);
    for (int bi = 0; bi < x.b; ++bi)
        for (int oc = 0; oc < out_ch; ++oc)
            for (int yy = 0; yy < x.h; ++yy)
                for (int xx = 0; xx < x.w; ++xx) {
                    const double g = dy.at(bi, oc, yy, xx);
                    if (g == 0.0) continue;
                    gb(oc) += g;
                    for (int ic = 0; ic < in_ch; ++ic)
                        for (int ky = 0; ky < k; ++ky) {
                            const int sy = yy + ky - pad;
                            if (sy < 0 || sy >= x.h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int sx = xx + kx - pad;
                                if (sx < 0 || sx >= x.w) continue;
                                const std::size_t wi =
                                    ((static_cast<std::size_t>(oc) * in_ch + ic) * k + ky) * k + kx;
                                gW[wi] += g * x.at(bi, ic, sy, sx);
                                dx.at(bi, ic, sy, sx) += g * W[wi];
                            }
                        }
                }
    return dx;
}

void Conv2dLayer::visit(const std::string& prefix, const ParamVisitor& f) {
    f(prefix + ".W", W, gW);
    f(prefix + ".b", b, gb);
}

BatchNorm2dLayer::BatchNorm2dLayer(int channels) : ch(channels) {
    gamma = Eigen::VectorXd::Ones(ch);
    beta = Eigen::VectorXd::Zero(ch);
    ggamma = Eigen::VectorXd::Zero(ch);
    gbeta = Eigen::VectorXd::Zero(ch);
    running_mean = Eigen::VectorXd::Zero(ch);
    running_var = Eigen::VectorXd::Ones(ch);
}

Image BatchNorm2dLayer::forward(const Image& x, bool train) {
    Image y(x.b, x.c, x.h, x.w);
    train_cache = train;
    const double n = static_cast<double>(x.b) * x.h * x.w;
    if (train) {
        xhat_cache = Image(x.b, x.c, x.h, x.w);
        inv_std_cache.resize(ch);
        mean_cache.resize(ch);
        for (int c = 0; c < ch; ++c) {
            double mean = 0.0;
            for (int bi = 0; bi < x.b; ++bi)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx) mean += x.at(bi, c, yy, xx);
            mean /= n;
            double var = 0.0;
            for (int bi = 0; bi < x.b; ++bi)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx) {
                        const double d = x.at(bi, c, yy, xx) - mean;
                        var += d * d;
                    }
            var /= n;
            const double inv_std = 1.0 / std::sqrt(var + eps);
            mean_cache(c) = mean;
            inv_std_cache(c) = inv_std;
            running_mean(c) = (1.0 - momentum) * running_mean(c) + momentum * mean;
            running_var(c) = (1.0 - momentum) * running_var(c) + momentum * var;
            for (int bi = 0; bi < x.b; ++bi)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx) {
                        const double xh = (x.at(bi, c, yy, xx) - mean) * inv_std;
                        xhat_cache.at(bi, c, yy, xx) = xh;
                        y.at(bi, c, yy, xx) = gamma(c) * xh + beta(c);
                    }
        }
    } else {
        xhat_cache = Image(x.b, x.c, x.h, x.w);
        for (int c = 0; c < ch; ++c) {
            const double inv_std = 1.0 / std::sqrt(running_var(c) + eps);
            for (int bi = 0; bi < x.b; ++bi)
                for (int yy = 0; yy < x.h; ++yy)
                    for (int xx = 0; xx < x.w; ++xx) {
                        const double xh = (x.at(bi, c, yy, xx) - running_mean(c)) * inv_std;
                        xhat_cache.at(bi, c, yy, xx) = xh;
                        y.at(bi, c, yy, xx) = gamma(c) * xh + beta(c);
                    }
        }
    }
    return y;
}

Image BatchNorm2dLayer::backward(const Image& dy) {
    Image dx(dy.b, dy.c, dy.h, dy.w);
    const double n = static_cast<double>(dy.b) * dy.h * dy.w;
    for (int c = 0; c < ch; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int bi = 0; bi < dy.b; ++bi)
            for (int yy = 0; yy < dy.h; ++yy)
                for (int xx = 0; xx < dy.w; ++xx) {
                    const double g = dy.at(bi, c, yy, xx);
                    sum_dy += g;
                    sum_dy_xhat += g * xhat_cache.at(bi, c, yy, xx);
                }
        gbeta(c) += sum_dy;
        ggamma(c) += sum_dy_xhat;
        if (train_cache) {
            const double inv_std = inv_std_cache(c);
            for (int bi = 0; bi < dy.b; ++bi)
                for (int yy = 0; yy < dy.h; ++yy)
                    for (int xx = 0; xx < dy.w; ++xx) {
                        const double g = dy.at(bi, c, yy, xx);
                        const double xh = xhat_cache.at(bi, c, yy, xx);
                        dx.at(bi, c, yy, xx) =
                            gamma(c) * inv_std / n * (n * g - sum_dy - xh * sum_dy_xhat);
                    }
        } else {
            const double inv_std = 1.0 / std::sqrt(running_var(c) + eps);
            for (int bi = 0; bi < dy.b; ++bi)
                for (int yy = 0; yy < dy.h; ++yy)
                    for (int xx = 0; xx < dy.w; ++xx)
                        dx.at(bi, c, yy, xx) = dy.at(bi, c, yy, xx) * gamma(c) * inv_std;
        }
    }
    return dx;
}

void BatchNorm2dLayer::visit(const std::string& prefix, const ParamVisitor& f) {
    f(prefix + ".gamma", gamma, ggamma);
    f(prefix + ".beta", beta, gbeta);
}

Image MaxPool2x2Layer::forward(const Image& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0)
        throw std::invalid_argument("maxpool: spatial dims must be even");
    in_h = x.h;
    in_w = x.w;
    Image y(x.b, x.c, x.h / 2, x.w / 2);
    argmax.assign(y.size(), 0);
    std::size_t o = 0;
    for (int bi = 0; bi < x.b; ++bi)
        for (int c = 0; c < x.c; ++c)
            for (int yy = 0; yy < y.h; ++yy)
                for (int xx = 0; xx < y.w; ++xx, ++o) {
                    double best = x.at(bi, c, 2 * yy, 2 * xx);
                    std::uint32_t best_i = static_cast<std::uint32_t>(x.idx(bi, c, 2 * yy, 2 * xx));
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const double v = x.at(bi, c, 2 * yy + dy, 2 * xx + dx);
                            if (v > best) {
                                best = v;
                                best_i = static_cast<std::uint32_t>(
                                    x.idx(bi, c, 2 * yy + dy, 2 * xx + dx));
                            }
                        }
                    y.v[o] = best;
                    argmax[o] = best_i;
                }
    return y;
}

Image MaxPool2x2Layer::backward(const Image& dy, int b, int c) const {
    Image dx(b, c, in_h, in_w);
    for (std::size_t o = 0; o < dy.v.size(); ++o) dx.v[argmax[o]] += dy.v[o];
    return dx;
}

Matrix image_to_matrix(const Image& img) {
    const Eigen::Index feat = static_cast<Eigen::Index>(img.c) * img.h * img.w;
    Matrix m(img.b, feat);
    for (int bi = 0; bi < img.b; ++bi)
        for (Eigen::Index f = 0; f < feat; ++f)
            m(bi, f) = img.v[static_cast<std::size_t>(bi) * feat + f];
    return m;
}

Image matrix_to_image(const Matrix& m, int c, int h, int w) {
    Image img(static_cast<int>(m.rows()), c, h, w);
    const Eigen::Index feat = static_cast<Eigen::Index>(c) * h * w;
    for (Eigen::Index bi = 0; bi < m.rows(); ++bi)
        for (Eigen::Index f = 0; f < feat; ++f)
            img.v[static_cast<std::size_t>(bi) * feat + f] = m(bi, f);
    return img;
}

}  // namespace pilecast::nn
