#pragma once

// Minimal MLP: ReLU hidden layers, identity logits, softmax cross-entropy,
// plain mini-batch SGD. Deliberately free of momentum, weight decay and
// batch-level parallelism so that a (weights, data, seeds) triple maps to
// bit-identical results.

#include "ibci/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ibci {

struct NetworkSpec {
    // widths = [d_0, d_1, ..., d_D]; d_0 = input dim, d_D = class count.
    std::vector<Eigen::Index> widths;

    std::size_t depth() const { return widths.empty() ? 0 : widths.size() - 1; }
    void validate() const;  // throws unless depth >= 1 and all widths >= 1
};

struct Mlp {
    std::vector<Eigen::MatrixXd> weights;  // W_i: d_{i-1} x d_i
    std::vector<Eigen::VectorXd> biases;   // b_i: d_i

    std::size_t depth() const { return weights.size(); }
    NetworkSpec spec() const;
    void validate() const;  // shape chaining + finiteness
};

struct TrainConfig {
    double learning_rate = 0.1;
    Eigen::Index batch_size = 100;
    int epochs = 200;
    std::uint64_t shuffle_seed = 0;
};

struct Metrics {
    std::vector<double> test_error;  // % per epoch
    std::vector<double> train_loss;  // mean loss per epoch
    double min_error = 0.0;
    int argmin_epoch = 0;  // 1-based, earliest epoch attaining min_error
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Activations of every layer on x: result[i] = Z_{i+1} for hidden layers,
// result.back() = logits.
std::vector<Eigen::MatrixXd> forward(const Mlp& mlp, const Eigen::MatrixXd& x);

// Mean softmax cross-entropy over the batch plus parameter gradients via
// backprop. Softmax is max-stabilized. Throws on a non-finite loss.
double loss_and_grads(const Mlp& mlp, const Eigen::MatrixXd& batch_x,
                      const Eigen::VectorXi& batch_y, Gradients& grads);

// The seeded row order used for epoch e (1-based). Exposed so the
// every-sample-once property is testable in isolation.
std::vector<std::size_t> epoch_permutation(std::size_t m, std::uint64_t shuffle_seed,
                                           int epoch);

// Mini-batch SGD over cfg.epochs with per-epoch reshuffling and per-epoch
// test evaluation. Mutates mlp in place. Throws a runtime error naming the
// epoch and batch if the loss or parameters stop being finite.
Metrics train(Mlp& mlp, const Dataset& train_ds, const Dataset& test_ds,
              const TrainConfig& cfg);

// Error rate in percent; argmax ties resolve to the lowest class index.
double evaluate(const Mlp& mlp, const Dataset& ds);

}  // namespace ibci
