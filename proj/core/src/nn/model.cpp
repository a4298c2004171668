#include "pilecast/nn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace pilecast::nn {

Normalizer Normalizer::fit(const Matrix& X) {
    Normalizer n;
    n.mins.resize(X.cols());
    n.maxs.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        n.mins[c] = X.col(c).minCoeff();
        n.maxs[c] = X.col(c).maxCoeff();
    }
    return n;
}

Normalizer Normalizer::fit(const Matrix& X, int shared_prefix) {
    Normalizer n = fit(X);
    if (shared_prefix > 0) {
        double lo = n.mins[0], hi = n.maxs[0];
        for (int c = 1; c < shared_prefix; ++c) {
            lo = std::min(lo, n.mins[c]);
            hi = std::max(hi, n.maxs[c]);
        }
        for (int c = 0; c < shared_prefix; ++c) {
            n.mins[c] = lo;
            n.maxs[c] = hi;
        }
    }
    return n;
}

Matrix Normalizer::apply(const Matrix& X) const {
    Matrix Y = X;
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        for (Eigen::Index r = 0; r < X.rows(); ++r) Y(r, c) = apply1(X(r, c), c);
    return Y;
}

Matrix Normalizer::invert(const Matrix& X) const {
    Matrix Y = X;
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        for (Eigen::Index r = 0; r < X.rows(); ++r) Y(r, c) = invert1(X(r, c), c);
    return Y;
}

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp: bad dims");
    if (hidden_layers < 1 || hidden_layers > 3)
        throw std::invalid_argument("mlp: hidden_layers must be 1..3");
    if (units < 8 || units > 4096 || (units & (units - 1)) != 0)
        throw std::invalid_argument("mlp: units must be a power of two in [8, 4096]");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("mlp: dropout_rate must be in [0, 1)");
}

void ConvEncoderSpec::validate() const {
    if (input_hw < 8 || layers < 1 || filters < 1 || kernel % 2 != 1 || latent < 1)
        throw std::invalid_argument("conv encoder: bad spec");
    int hw = input_hw;
    for (int l = 0; l < layers; ++l) {
        if (hw % 2 != 0) throw std::invalid_argument("conv encoder: odd spatial dim");
        hw /= 2;
    }
}

Mlp::Mlp(const MlpSpec& s, Rng& init) : spec(s) {
    spec.validate();
    int prev = spec.input_dim;
    for (int l = 0; l < spec.hidden_layers; ++l) {
        dense.emplace_back(prev, spec.units, init);
        acts.emplace_back(spec.activation);
        drops.emplace_back(spec.dropout_rate);
        prev = spec.units;
    }
    dense.emplace_back(prev, spec.output_dim, init);
}

Matrix Mlp::forward(const Matrix& x, bool train, Rng& dropout_rng) {
    Matrix h = x;
    for (int l = 0; l < spec.hidden_layers; ++l) {
        h = dense[l].forward(h, true);
        h = acts[l].forward(h, true);
        h = drops[l].forward(h, train, dropout_rng);
    }
    return dense.back().forward(h, true);
}

Matrix Mlp::backward(const Matrix& dy) {
    Matrix g = dense.back().backward(dy);
    for (int l = spec.hidden_layers - 1; l >= 0; --l) {
        g = drops[l].backward(g);
        g = acts[l].backward(g);
        g = dense[l].backward(g);
    }
    return g;
}

void Mlp::visit(const std::string& prefix, const ParamVisitor& f) {
    for (std::size_t l = 0; l < dense.size(); ++l)
        dense[l].visit(prefix + ".dense" + std::to_string(l), f);
}

ConvEncoder::ConvEncoder(const ConvEncoderSpec& s, Activation act, Rng& init)
    : spec(s),
      activation(act),
      to_latent((s.input_hw >> s.layers) * (s.input_hw >> s.layers) * s.filters, s.latent,
                init) {
    spec.validate();
    int ch = 1;
    for (int l = 0; l < spec.layers; ++l) {
        convs.emplace_back(ch, spec.filters, spec.kernel, init);
        bns.emplace_back(spec.filters);
        pools.emplace_back();
        ch = spec.filters;
    }
    out_hw = spec.input_hw >> spec.layers;
    flat_dim = out_hw * out_hw * spec.filters;
    act_caches.resize(spec.layers);
}

Matrix ConvEncoder::forward(const Image& x, bool train) {
    Image h = x;
    for (int l = 0; l < spec.layers; ++l) {
        h = convs[l].forward(h, true);
        h = bns[l].forward(h, train);
        act_caches[l] = h;
        for (double& v : h.v) v = activate(activation, v);
        h = pools[l].forward(h);
    }
    return to_latent.forward(image_to_matrix(h), true);
}

Image ConvEncoder::backward(const Matrix& dlatent) {
    Matrix dflat = to_latent.backward(dlatent);
    const int b = static_cast<int>(dflat.rows());
    Image g = matrix_to_image(dflat, spec.filters, out_hw, out_hw);
    for (int l = spec.layers - 1; l >= 0; --l) {
        g = pools[l].backward(g, b, spec.filters);
        for (std::size_t i = 0; i < g.v.size(); ++i)
            g.v[i] *= activate_grad(activation, act_caches[l].v[i]);
        g = bns[l].backward(g);
        g = convs[l].backward(g);
    }
    return g;
}

void ConvEncoder::visit(const std::string& prefix, const ParamVisitor& f) {
    for (int l = 0; l < spec.layers; ++l) {
        convs[l].visit(prefix + ".conv" + std::to_string(l), f);
        bns[l].visit(prefix + ".bn" + std::to_string(l), f);
    }
    to_latent.visit(prefix + ".latent", f);
}

void ConvEncoder::visit_state(
    const std::string& prefix,
    const std::function<void(const std::string&, Eigen::VectorXd&)>& f) {
    for (int l = 0; l < spec.layers; ++l) {
        f(prefix + ".bn" + std::to_string(l) + ".running_mean", bns[l].running_mean);
        f(prefix + ".bn" + std::to_string(l) + ".running_var", bns[l].running_var);
    }
}

void PerformanceModel::zero_grads() {
    visit_params([](const std::string&, Eigen::VectorXd&, Eigen::VectorXd& g) {
        g.setZero();
    });
}

void PerformanceModel::set_dropout_seed(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

std::vector<double> PerformanceModel::save_params() {
    std::vector<double> flat;
    visit_params([&flat](const std::string&, Eigen::VectorXd& p, Eigen::VectorXd&) {
        flat.insert(flat.end(), p.data(), p.data() + p.size());
    });
    return flat;
}

void PerformanceModel::restore_params(const std::vector<double>& flat) {
    std::size_t off = 0;
    visit_params([&](const std::string&, Eigen::VectorXd& p, Eigen::VectorXd&) {
        if (off + p.size() > flat.size()) throw std::invalid_argument("restore_params: size mismatch");
        std::copy(flat.begin() + off, flat.begin() + off + p.size(), p.data());
        off += p.size();
    });
    if (off != flat.size()) throw std::invalid_argument("restore_params: size mismatch");
}

Eigen::Matrix<double, 3, 4> PerformanceModel::action_jacobian(
    const Eigen::RowVectorXd& x_norm) {
    Eigen::Matrix<double, 3, 4> J;
    const int ao = action_offset();
    for (int out = 0; out < 3; ++out) {
        forward(x_norm, false);
        Matrix seed = Matrix::Zero(1, 3);
        seed(0, out) = 1.0;
        const Matrix gin = backward(seed);
        zero_grads();
        for (int k = 0; k < 4; ++k) J(out, k) = gin(0, ao + k);
    }
    return J;
}

std::array<double, 3> PerformanceModel::predict(const Eigen::RowVectorXd& raw_row) {
    if (raw_row.size() != input_dim())
        throw std::invalid_argument("predict: input dimension mismatch");
    Eigen::RowVectorXd x(raw_row.size());
    for (Eigen::Index k = 0; k < raw_row.size(); ++k)
        x(k) = in_norm.apply1(raw_row(k), static_cast<std::size_t>(k));
    const Matrix y = forward(x, false);
    return {out_norm.invert1(y(0, 0), 0), out_norm.invert1(y(0, 1), 1),
            out_norm.invert1(y(0, 2), 2)};
}

namespace {

Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed) {
    Rng init(seed);
    return Mlp(spec, init);
}

ConvEncoder build_encoder(const ConvEncoderSpec& spec, Activation act, std::uint64_t seed) {
    Rng init(seed);
    return ConvEncoder(spec, act, init);
}

}  // namespace

PsiLow::PsiLow(const MlpSpec& spec, std::uint64_t init_seed)
    : mlp(build_mlp(spec, init_seed)) {}

Matrix PsiLow::forward(const Matrix& X, bool train) {
    return mlp.forward(X, train, dropout_rng_);
}

Matrix PsiLow::backward(const Matrix& dY) { return mlp.backward(dY); }

void PsiLow::visit_params(const ParamVisitor& f) { mlp.visit("mlp", f); }

PsiHigh::PsiHigh(const ConvEncoderSpec& conv_spec, const MlpSpec& head_spec,
                 std::uint64_t init_seed)
    : encoder(build_encoder(conv_spec, head_spec.activation, init_seed)),
      head(build_mlp(head_spec, splitmix64(init_seed + 1))) {
    if (head_spec.input_dim != conv_spec.latent + 4)
        throw std::invalid_argument("psi_high: head input must be latent + 4");
}

Matrix PsiHigh::forward(const Matrix& X, bool train) {
    const int hw = encoder.spec.input_hw;
    const int pix = hw * hw;
    if (X.cols() != pix + 4) throw std::invalid_argument("psi_high: input dimension mismatch");
    const Image img = matrix_to_image(X.leftCols(pix), 1, hw, hw);
    const Matrix latent = encoder.forward(img, train);
    Matrix concat(X.rows(), latent.cols() + 4);
    concat << latent, X.rightCols(4);
    return head.forward(concat, train, dropout_rng_);
}

Matrix PsiHigh::backward(const Matrix& dY) {
    const Matrix dconcat = head.backward(dY);
    const int latent = encoder.spec.latent;
    const Image dimg = encoder.backward(dconcat.leftCols(latent));
    const int pix = encoder.spec.input_hw * encoder.spec.input_hw;
    Matrix din(dY.rows(), pix + 4);
    din << image_to_matrix(dimg), dconcat.rightCols(4);
    return din;
}

void PsiHigh::visit_params(const ParamVisitor& f) {
    encoder.visit("enc", f);
    head.visit("head", f);
}

void PsiHigh::visit_state(
    const std::function<void(const std::string&, Eigen::VectorXd&)>& f) {
    encoder.visit_state("enc", f);
}

Eigen::RowVectorXd local_heightmap_row(const LocalHeightmap& h, int target_hw) {
    Eigen::RowVectorXd row(target_hw * target_hw);
    for (int pi = 0; pi < target_hw; ++pi) {
        const double gi = static_cast<double>(pi) * h.I / (target_hw - 1);
        int i0 = std::min(static_cast<int>(gi), h.I - 1);
        const double u = gi - i0;
        for (int pj = 0; pj < target_hw; ++pj) {
            const double gj = static_cast<double>(pj) * h.J / (target_hw - 1);
            int j0 = std::min(static_cast<int>(gj), h.J - 1);
            const double v = gj - j0;
            const int ja = j0 - h.J / 2;
            row(pi * target_hw + pj) =
                (1.0 - u) * (1.0 - v) * h.at(i0, ja) + u * (1.0 - v) * h.at(i0 + 1, ja) +
                (1.0 - u) * v * h.at(i0, ja + 1) + u * v * h.at(i0 + 1, ja + 1);
        }
    }
    return row;
}

}  // namespace pilecast::nn
