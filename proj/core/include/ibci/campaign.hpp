#pragma once

// Overcomplete candidate banks and the greedy neuron campaign.
//
// The campaign picks d_out columns out of a k-times overcomplete bank one
// at a time. Each round scales every remaining candidate's score by the
// fraction of its weight vector lying outside the span of the neurons
// already chosen (the norm ratio of its null-space residual), then takes
// the argmax. Residuals are maintained incrementally: after choosing a
// column, its normalized residual joins the orthonormal basis and is
// projected out of every remaining residual.

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ibci {

enum class BaseInit { kXavier, kHe };

struct CandidateSet {
    Eigen::MatrixXd weights;  // fan_in x K, K = k * d_out
    // Column norm targeted by the equalize-norms policy (the mean norm of
    // the raw draws). Informational when equalization is off.
    double common_norm = 0.0;
};

// Selection state, exposed for inspection. `basis` holds the current
// orthonormal block (cleared on a rank-exhaustion reset), `residuals` the
// null-space projections of every bank column, `ratio_history` row t the
// residual/original norm ratio of each candidate at iteration t (selected
// candidates carry -1).
struct CampaignState {
    std::vector<Eigen::VectorXd> basis;
    Eigen::MatrixXd residuals;
    std::vector<Eigen::Index> selected;
    int block_resets = 0;
    Eigen::MatrixXd ratio_history;
};

// Draws K = k*d_out candidate columns from the base initializer for a
// (fan_in -> d_out) layer, deterministically in seed. With equalize_norms
// (default) every column is rescaled to the mean sampled norm so that no
// candidate wins on norm alone. The first d_out columns of the raw draw
// coincide with the plain base initializer's matrix for the same seed.
CandidateSet generate_candidates(BaseInit base, Eigen::Index fan_in,
                                 Eigen::Index d_out, int k, std::uint64_t seed,
                                 bool equalize_norms = true);

// Runs the greedy selection: d_out rounds of argmax over
// scores[i] * ||residual_i|| / ||column_i|| among unselected candidates with
// ratio >= tau, ties to the lowest index. Scores must be nonnegative (the
// combine_scores contract). When every remaining ratio falls below tau the
// projection block is reset (residuals restored to the original columns)
// and selection continues; this only happens when d_out exceeds the rank
// the bank can supply. Returns the fan_in x d_out matrix of selected
// columns in selection order.
Eigen::MatrixXd campaign_select(const CandidateSet& cands,
                                const Eigen::VectorXd& scores,
                                Eigen::Index d_out, double tau = 1e-6,
                                CampaignState* state_out = nullptr);

}  // namespace ibci
