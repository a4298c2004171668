#include "pilecast/nn/train.hpp"

#include <cmath>
#include <numeric>

namespace pilecast::nn {

void Adam::step(PerformanceModel& model, const TrainConfig& cfg) {
    ++t_;
    std::size_t slot = 0;
    const double bc1 = 1.0 - std::pow(cfg.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t_);
    model.visit_params([&](const std::string&, Eigen::VectorXd& p, Eigen::VectorXd& g) {
        if (slot >= m_.size()) {
            m_.push_back(Eigen::VectorXd::Zero(p.size()));
            v_.push_back(Eigen::VectorXd::Zero(p.size()));
        }
        Eigen::VectorXd& m = m_[slot];
        Eigen::VectorXd& v = v_[slot];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double mhat = m(i) / bc1;
            const double vhat = v(i) / bc2;
            p(i) -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        g.setZero();
        ++slot;
    });
}

double mse(const Matrix& pred, const Matrix& target) {
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

TrainResult train(PerformanceModel& model, const Matrix& X, const Matrix& Y,
                  const TrainConfig& cfg) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) throw std::invalid_argument("train: need at least 2 samples");
    if (Y.rows() != n) throw std::invalid_argument("train: X/Y row mismatch");

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng split_rng(substream_seed(cfg.seed, "split"));
    split_rng.shuffle(idx);
    const int n_val = std::max(1, static_cast<int>(std::llround(cfg.val_fraction * n)));
    const int n_train = n - n_val;
    if (n_train < 1) throw std::invalid_argument("train: split leaves no training samples");

    Matrix Xtr(n_train, X.cols()), Ytr(n_train, Y.cols());
    Matrix Xval(n_val, X.cols()), Yval(n_val, Y.cols());
    for (int i = 0; i < n_train; ++i) {
        Xtr.row(i) = X.row(idx[i]);
        Ytr.row(i) = Y.row(idx[i]);
    }
    for (int i = 0; i < n_val; ++i) {
        Xval.row(i) = X.row(idx[n_train + i]);
        Yval.row(i) = Y.row(idx[n_train + i]);
    }

    model.set_dropout_seed(substream_seed(cfg.seed, "dropout"));
    Rng shuffle_rng(substream_seed(cfg.seed, "shuffle"));
    Adam adam;

    TrainResult res;
    std::vector<double> best_params = model.save_params();
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    std::vector<int> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double train_loss_sum = 0.0;
        int batches = 0;
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            const int b = std::min(cfg.batch_size, n_train - start);
            Matrix xb(b, X.cols()), yb(b, Y.cols());
            for (int i = 0; i < b; ++i) {
                xb.row(i) = Xtr.row(order[start + i]);
                yb.row(i) = Ytr.row(order[start + i]);
            }
            const Matrix pred = model.forward(xb, true);
            const double loss = mse(pred, yb);
            if (!std::isfinite(loss))
                throw TrainingDiverged("NaN/inf loss at epoch " + std::to_string(epoch) +
                                       ", batch " + std::to_string(batches) +
                                       " (lr=" + std::to_string(cfg.lr) + ")");
            train_loss_sum += loss;
            ++batches;
            const Matrix dY = 2.0 * (pred - yb) / static_cast<double>(pred.size());
            model.backward(dY);
            adam.step(model, cfg);
        }
        EpochStats st;
        st.train_mse = train_loss_sum / std::max(1, batches);
        st.val_mse = mse(model.forward(Xval, false), Yval);
        res.history.push_back(st);

        if (st.val_mse < best_val) {
            best_val = st.val_mse;
            best_epoch = epoch;
            best_params = model.save_params();
        } else if (epoch - best_epoch >= cfg.patience) {
            break;
        }
    }

    model.restore_params(best_params);
    res.best_epoch = best_epoch;
    res.best_val_mse = best_val;
    return res;
}

}  // namespace pilecast::nn
