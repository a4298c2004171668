#pragma once

#include <stdexcept>

#include "pilecast/nn/model.hpp"

namespace pilecast::nn {

struct TrainConfig {
    double lr = 1e-5;  // Adam learning rate
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double val_fraction = 0.1;  // 90/10 train/validation split
    int batch_size = 64;
    int max_epochs = 500;
    int patience = 50;  // early stop on validation MSE
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_mse = 0.0;
};

struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

class Adam {
public:
    void step(PerformanceModel& model, const TrainConfig& cfg);

private:
    std::vector<Eigen::VectorXd> m_, v_;
    long t_ = 0;
};

// Minibatch MSE training with the 90/10 split drawn deterministically from
// cfg.seed. Returns per-epoch train/validation MSE; the model is left holding
// the best-validation parameters. Throws TrainingDiverged on NaN loss.
TrainResult train(PerformanceModel& model, const Matrix& X_norm, const Matrix& Y_norm,
                  const TrainConfig& cfg);

double mse(const Matrix& pred, const Matrix& target);

}  // namespace pilecast::nn
