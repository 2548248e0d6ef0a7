#pragma once

// Baseline initializers plus the data-driven campaign initializer.
//
// Every initializer is a pure function of (spec, data, strategy, seed).
// Per-layer randomness is drawn from derive_seed(seed, layer_index), so a
// deeper network never perturbs the draws of its earlier layers, and all
// strategies sharing a run seed consume identical candidate banks.

#include "ibci/campaign.hpp"
#include "ibci/dataset.hpp"
#include "ibci/network.hpp"
#include "ibci/scoring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ibci {

enum class StrategyKind { kVanilla, kLsuv, kIbci, kTieOnly, kIimOnly };

struct InitStrategy {
    StrategyKind kind = StrategyKind::kVanilla;
    BaseInit base = BaseInit::kXavier;

    // Campaign parameters (ibci / tie_only / iim_only).
    int k = 3;
    // Per-layer mixing weights; empty means the default linear ramp from
    // 0.9 at the first layer down to 0.1 at the output. tie_only and
    // iim_only ignore it (they are ibci with alpha fixed at 0 and 1).
    AlphaSchedule alpha;
    Eigen::Index scoring_subset = 10000;
    bool equalize_norms = true;
    TieCentering tie_centering = TieCentering::kPerClass;
    bool tie_class_size_norm = false;
    bool score_preactivation = false;
    double tau = 1e-6;

    // LSUV parameters.
    double lsuv_tol = 0.01;
    int lsuv_max_iter = 10;
};

// Short id used in CSV rows and file names, e.g. "ibci-xavier-k3".
std::string strategy_id(const InitStrategy& s);
// Full descriptor recorded in weight dumps (includes alpha and subset).
std::string strategy_descriptor(const InitStrategy& s);

// fan_in x fan_out matrix, entries i.i.d. uniform on
// [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
Eigen::MatrixXd xavier_init(Eigen::Index fan_in, Eigen::Index fan_out,
                            std::uint64_t seed);

// fan_in x fan_out matrix, entries i.i.d. Gaussian with variance 2/fan_in.
Eigen::MatrixXd he_init(Eigen::Index fan_in, Eigen::Index fan_out,
                        std::uint64_t seed);

// Base initializer applied layer by layer, zero biases.
Mlp vanilla_init(const NetworkSpec& spec, BaseInit base, std::uint64_t seed);

struct LsuvReport {
    std::vector<double> variances;   // final pre-activation variance per layer
    std::vector<int> rescales;       // scalings applied per layer
};

// Layer-sequentially scales each layer's weights by 1/sqrt(variance of its
// pre-activation over ds) until |variance - 1| <= tol or max_iter scalings,
// then propagates through the layer's activation. Throws a runtime error
// naming the layer when a layer's output variance is zero.
LsuvReport lsuv_rescale(Mlp& mlp, const Dataset& ds, double tol = 0.01,
                        int max_iter = 10);

// The neuron campaign initializer. For each layer, generates a k-times
// overcomplete candidate bank, scores candidate activations on a scoring
// subset of ds (ReLU for hidden layers, raw logits for the output layer,
// unless score_preactivation), combines the criteria with the layer's
// alpha, and keeps the campaign winners. Requires strategy.kind to be one
// of ibci/tie_only/iim_only and spec.widths[0] == ds.dim().
Mlp ibci_init(const NetworkSpec& spec, const Dataset& ds,
              const InitStrategy& strategy, std::uint64_t seed);

// Dispatches on strategy.kind; the single entry point used by the bench
// runner and the CLI.
Mlp init_network(const NetworkSpec& spec, const Dataset& ds,
                 const InitStrategy& strategy, std::uint64_t seed);

// Weight dump: little-endian binary with a small header (widths, strategy
// descriptor, run seed) followed by the raw float64 parameters, so an
// `init` artifact feeds `train` reproducibly.
struct WeightDump {
    Mlp mlp;
    std::string strategy;
    std::uint64_t seed = 0;
};

void save_weights(const std::string& path, const Mlp& mlp,
                  const std::string& strategy_desc, std::uint64_t seed);
WeightDump load_weights(const std::string& path);

}  // namespace ibci
