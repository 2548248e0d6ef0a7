#include "ibci/network.hpp"

#include "ibci/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ibci {

void NetworkSpec::validate() const {
    if (widths.size() < 2)
        throw std::invalid_argument("NetworkSpec: need at least input and output widths");
    for (Eigen::Index w : widths)
        if (w < 1) throw std::invalid_argument("NetworkSpec: widths must be >= 1");
}

NetworkSpec Mlp::spec() const {
    NetworkSpec s;
    if (weights.empty()) return s;
    s.widths.push_back(weights.front().rows());
    for (const auto& w : weights) s.widths.push_back(w.cols());
    return s;
}

void Mlp::validate() const {
    if (weights.empty() || weights.size() != biases.size())
        throw std::invalid_argument("Mlp: empty or mismatched weights/biases");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (biases[i].size() != weights[i].cols())
            throw std::invalid_argument("Mlp: bias length mismatch at layer " +
                                        std::to_string(i + 1));
        if (i > 0 && weights[i].rows() != weights[i - 1].cols())
            throw std::invalid_argument("Mlp: shape chain broken at layer " +
                                        std::to_string(i + 1));
        if (!weights[i].allFinite() || !biases[i].allFinite())
            throw std::invalid_argument("Mlp: non-finite parameter at layer " +
                                        std::to_string(i + 1));
    }
}

std::vector<Eigen::MatrixXd> forward(const Mlp& mlp, const Eigen::MatrixXd& x) {
    if (mlp.weights.empty()) throw std::invalid_argument("forward: empty network");
    if (x.cols() != mlp.weights.front().rows())
        throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                    " features, layer 1 expects " +
                                    std::to_string(mlp.weights.front().rows()));

    const std::size_t depth = mlp.depth();
    std::vector<Eigen::MatrixXd> acts(depth);
    const Eigen::MatrixXd* prev = &x;
    for (std::size_t i = 0; i < depth; ++i) {
        acts[i].noalias() = *prev * mlp.weights[i];
        acts[i].rowwise() += mlp.biases[i].transpose();
        if (i + 1 < depth) acts[i] = acts[i].cwiseMax(0.0);  // ReLU; logits stay linear
        prev = &acts[i];
    }
    return acts;
}

namespace {

// Row-wise softmax probabilities, max-subtracted for stability.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp();
    const Eigen::VectorXd row_sums = p.rowwise().sum();
    return p.array().colwise() / row_sums.array();
}

}  // namespace

double loss_and_grads(const Mlp& mlp, const Eigen::MatrixXd& batch_x,
                      const Eigen::VectorXi& batch_y, Gradients& grads) {
    const Eigen::Index b = batch_x.rows();
    if (b == 0) throw std::invalid_argument("loss_and_grads: empty batch");
    if (batch_y.size() != b)
        throw std::invalid_argument("loss_and_grads: batch label count mismatch");

    const std::size_t depth = mlp.depth();
    const std::vector<Eigen::MatrixXd> acts = forward(mlp, batch_x);
    const Eigen::MatrixXd& logits = acts.back();

    // Stabilized loss: -log softmax = log(sum exp(shifted)) - shifted[label].
    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    const Eigen::MatrixXd shifted = logits.colwise() - row_max;
    const Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i)
        loss += log_norm[i] - shifted(i, batch_y[i]);
    loss /= static_cast<double>(b);
    if (!std::isfinite(loss))
        throw std::runtime_error("loss_and_grads: non-finite loss");

    grads.weights.resize(depth);
    grads.biases.resize(depth);

    // d(loss)/d(logits) = (softmax - onehot) / b
    Eigen::MatrixXd delta = softmax_rows(logits);
    for (Eigen::Index i = 0; i < b; ++i) delta(i, batch_y[i]) -= 1.0;
    delta /= static_cast<double>(b);

    for (std::size_t i = depth; i-- > 0;) {
        const Eigen::MatrixXd& input = i == 0 ? batch_x : acts[i - 1];
        grads.weights[i].noalias() = input.transpose() * delta;
        grads.biases[i] = delta.colwise().sum();
        if (i > 0) {
            Eigen::MatrixXd upstream;
            upstream.noalias() = delta * mlp.weights[i].transpose();
            // ReLU gate: pre-activation > 0 iff stored activation > 0.
            delta = (acts[i - 1].array() > 0.0).select(upstream, 0.0);
        }
    }
    return loss;
}

std::vector<std::size_t> epoch_permutation(std::size_t m, std::uint64_t shuffle_seed,
                                           int epoch) {
    Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    return rng.permutation(m);
}

Metrics train(Mlp& mlp, const Dataset& train_ds, const Dataset& test_ds,
              const TrainConfig& cfg) {
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("train: learning rate < 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (train_ds.dim() != test_ds.dim() || train_ds.n_classes != test_ds.n_classes)
        throw std::invalid_argument("train: train/test datasets are incompatible");

    const auto m = static_cast<std::size_t>(train_ds.size());
    Metrics metrics;
    metrics.test_error.reserve(static_cast<std::size_t>(cfg.epochs));
    metrics.train_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    Gradients grads;
    Eigen::MatrixXd batch_x;
    Eigen::VectorXi batch_y;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order =
            epoch_permutation(m, cfg.shuffle_seed, epoch);

        double loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < m; start += static_cast<std::size_t>(cfg.batch_size)) {
            const auto bsz = static_cast<Eigen::Index>(
                std::min(static_cast<std::size_t>(cfg.batch_size), m - start));
            batch_x.resize(bsz, train_ds.dim());
            batch_y.resize(bsz);
            for (Eigen::Index r = 0; r < bsz; ++r) {
                const std::size_t src = order[start + static_cast<std::size_t>(r)];
                batch_x.row(r) = train_ds.features.row(static_cast<Eigen::Index>(src));
                batch_y[r] = train_ds.labels[static_cast<Eigen::Index>(src)];
            }

            ++batch_index;
            double loss;
            try {
                loss = loss_and_grads(mlp, batch_x, batch_y, grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index) + ": " +
                                         e.what());
            }
            loss_sum += loss * static_cast<double>(bsz);

            for (std::size_t i = 0; i < mlp.depth(); ++i) {
                mlp.weights[i].noalias() -= cfg.learning_rate * grads.weights[i];
                mlp.biases[i].noalias() -= cfg.learning_rate * grads.biases[i];
            }
        }

        metrics.train_loss.push_back(loss_sum / static_cast<double>(m));
        metrics.test_error.push_back(evaluate(mlp, test_ds));
    }

    metrics.min_error = metrics.test_error.front();
    metrics.argmin_epoch = 1;
    for (std::size_t e = 1; e < metrics.test_error.size(); ++e) {
        if (metrics.test_error[e] < metrics.min_error) {  // strict: earliest epoch wins
            metrics.min_error = metrics.test_error[e];
            metrics.argmin_epoch = static_cast<int>(e + 1);
        }
    }
    return metrics;
}

double evaluate(const Mlp& mlp, const Dataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    const Eigen::MatrixXd logits = forward(mlp, ds.features).back();

    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index pred = 0;
        double best = logits(i, 0);
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(i, c) > best) {  // strict: ties keep the lowest class
                best = logits(i, c);
                pred = c;
            }
        }
        if (pred != static_cast<Eigen::Index>(ds.labels[i])) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(ds.size());
}

}  // namespace ibci
