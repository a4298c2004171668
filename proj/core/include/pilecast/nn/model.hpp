#pragma once

#include <memory>
#include <string>

#include "pilecast/dig_frame.hpp"
#include "pilecast/nn/layers.hpp"

namespace pilecast::nn {

// Per-feature affine map to [0, 1]; features with max == min map to 0.
struct Normalizer {
    std::vector<double> mins, maxs;

    static Normalizer fit(const Matrix& X);
    // First `shared_prefix` columns share one global (min, max) — used for
    // heightmap pixels so one scale applies to the whole window.
    static Normalizer fit(const Matrix& X, int shared_prefix);

    std::size_t size() const { return mins.size(); }
    double range(std::size_t k) const { return maxs[k] - mins[k]; }
    double apply1(double v, std::size_t k) const {
        const double r = maxs[k] - mins[k];
        return r > 0.0 ? (v - mins[k]) / r : 0.0;
    }
    double invert1(double v, std::size_t k) const {
        const double r = maxs[k] - mins[k];
        return r > 0.0 ? v * r + mins[k] : mins[k];
    }
    Matrix apply(const Matrix& X) const;
    Matrix invert(const Matrix& X) const;
};

struct MlpSpec {
    int input_dim = 8;
    int hidden_layers = 2;        // 1..3
    int units = 512;              // power of two in [8, 4096]
    Activation activation = Activation::Swish;
    double dropout_rate = 0.1;    // [0, 1)
    int output_dim = 3;

    void validate() const;
};

struct ConvEncoderSpec {
    int input_hw = 32;  // single-channel input grid
    int layers = 3;
    int filters = 10;
    int kernel = 3;
    int latent = 32;

    void validate() const;
};

// Dense -> activation -> dropout per hidden layer, linear output layer.
class Mlp {
public:
    Mlp(const MlpSpec& spec, Rng& init);

    Matrix forward(const Matrix& x, bool train, Rng& dropout_rng);
    Matrix backward(const Matrix& dy);
    void visit(const std::string& prefix, const ParamVisitor& f);

    MlpSpec spec;
    std::vector<DenseLayer> dense;
    std::vector<ActivationLayer> acts;
    std::vector<DropoutLayer> drops;
};

// conv -> batchnorm -> activation -> maxpool, three times, then a fully
// connected layer to the latent vector.
class ConvEncoder {
public:
    ConvEncoder(const ConvEncoderSpec& spec, Activation act, Rng& init);

    Matrix forward(const Image& x, bool train);
    Image backward(const Matrix& dlatent);
    void visit(const std::string& prefix, const ParamVisitor& f);
    void visit_state(const std::string& prefix,
                     const std::function<void(const std::string&, Eigen::VectorXd&)>& f);

    ConvEncoderSpec spec;
    Activation activation;
    std::vector<Conv2dLayer> convs;
    std::vector<BatchNorm2dLayer> bns;
    std::vector<MaxPool2x2Layer> pools;
    std::vector<Image> act_caches;  // pre-activation images
    DenseLayer to_latent;
    int flat_dim = 0;
    int out_hw = 0;
};

// Shared interface over the two performance predictors. Inputs are flat
// normalized rows: [features..., action(4)]; outputs are the three normalized
// performance targets.
class PerformanceModel {
public:
    virtual ~PerformanceModel() = default;

    virtual std::string kind() const = 0;
    virtual int input_dim() const = 0;
    virtual Activation activation() const = 0;
    int action_offset() const { return input_dim() - 4; }

    virtual Matrix forward(const Matrix& X, bool train) = 0;
    // Backpropagates dY (same shape as forward output) and returns the
    // gradient w.r.t. the input rows. Parameter gradients accumulate.
    virtual Matrix backward(const Matrix& dY) = 0;

    virtual void visit_params(const ParamVisitor& f) = 0;
    virtual void visit_state(
        const std::function<void(const std::string&, Eigen::VectorXd&)>& f) {}

    void zero_grads();
    void set_dropout_seed(std::uint64_t seed);

    std::vector<double> save_params();
    void restore_params(const std::vector<double>& flat);

    // Exact reverse-mode Jacobian of the normalized outputs w.r.t. the four
    // normalized action inputs, dropout off.
    Eigen::Matrix<double, 3, 4> action_jacobian(const Eigen::RowVectorXd& x_norm);

    // Convenience: normalize a raw row, run in eval mode, denormalize.
    std::array<double, 3> predict(const Eigen::RowVectorXd& raw_row);

    Normalizer in_norm, out_norm;

protected:
    Rng dropout_rng_{0};
};

class PsiLow : public PerformanceModel {
public:
    PsiLow(const MlpSpec& spec, std::uint64_t init_seed);

    std::string kind() const override { return "low"; }
    int input_dim() const override { return mlp.spec.input_dim; }
    Activation activation() const override { return mlp.spec.activation; }
    Matrix forward(const Matrix& X, bool train) override;
    Matrix backward(const Matrix& dY) override;
    void visit_params(const ParamVisitor& f) override;

    Mlp mlp;
};

class PsiHigh : public PerformanceModel {
public:
    PsiHigh(const ConvEncoderSpec& conv_spec, const MlpSpec& head_spec,
            std::uint64_t init_seed);

    std::string kind() const override { return "high"; }
    int input_dim() const override { return encoder.spec.input_hw * encoder.spec.input_hw + 4; }
    Activation activation() const override { return head.spec.activation; }
    Matrix forward(const Matrix& X, bool train) override;
    Matrix backward(const Matrix& dY) override;
    void visit_params(const ParamVisitor& f) override;
    void visit_state(
        const std::function<void(const std::string&, Eigen::VectorXd&)>& f) override;

    ConvEncoder encoder;
    Mlp head;
};

// Bilinear resample of the (I+1)x(J+1) node grid onto target x target pixels,
// flattened row-major (longitudinal index major).
Eigen::RowVectorXd local_heightmap_row(const LocalHeightmap& h, int target_hw);

}  // namespace pilecast::nn
