#include "ibci/campaign.hpp"

#include "ibci/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ibci {

namespace detail {

// Fills columns of `w` with i.i.d. draws from the base distribution scaled
// for a (fan_in -> d_out) layer. Column-major draw order, one candidate at
// a time, so prefixes of the stream are stable under wider banks.
void draw_base_columns(BaseInit base, Eigen::Index fan_in, Eigen::Index d_out,
                       Eigen::MatrixXd& w, Rng& rng) {
    if (base == BaseInit::kXavier) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + d_out));
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < fan_in; ++r)
                w(r, c) = rng.uniform(-bound, bound);
    } else {
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < fan_in; ++r)
                w(r, c) = sd * rng.normal();
    }
}

}  // namespace detail

CandidateSet generate_candidates(BaseInit base, Eigen::Index fan_in,
                                 Eigen::Index d_out, int k, std::uint64_t seed,
                                 bool equalize_norms) {
    if (fan_in < 1 || d_out < 1)
        throw std::invalid_argument("generate_candidates: dimensions must be >= 1");
    if (k < 1) throw std::invalid_argument("generate_candidates: k must be >= 1");

    CandidateSet cands;
    cands.weights.resize(fan_in, static_cast<Eigen::Index>(k) * d_out);
    Rng rng(seed);
    detail::draw_base_columns(base, fan_in, d_out, cands.weights, rng);

    const Eigen::VectorXd norms = cands.weights.colwise().norm();
    for (Eigen::Index c = 0; c < norms.size(); ++c)
        if (norms[c] <= 0.0)
            throw std::runtime_error("generate_candidates: zero-norm candidate column " +
                                     std::to_string(c));
    cands.common_norm = norms.mean();
    if (equalize_norms)
        for (Eigen::Index c = 0; c < norms.size(); ++c)
            cands.weights.col(c) *= cands.common_norm / norms[c];
    return cands;
}

Eigen::MatrixXd campaign_select(const CandidateSet& cands,
                                const Eigen::VectorXd& scores,
                                Eigen::Index d_out, double tau,
                                CampaignState* state_out) {
    const Eigen::Index fan_in = cands.weights.rows();
    const Eigen::Index K = cands.weights.cols();
    if (scores.size() != K)
        throw std::invalid_argument("campaign_select: scores length " +
                                    std::to_string(scores.size()) + " != bank size " +
                                    std::to_string(K));
    if (d_out < 1 || d_out > K)
        throw std::invalid_argument("campaign_select: d_out must be in [1, K]");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("campaign_select: tau must be in (0, 1)");
    if (scores.minCoeff() < 0.0)
        throw std::invalid_argument("campaign_select: scores must be nonnegative");

    const Eigen::MatrixXd& bank = cands.weights;
    const Eigen::VectorXd col_norms = bank.colwise().norm();

    CampaignState state;
    state.residuals = bank;  // empty basis: first round is a pure score argmax
    state.selected.reserve(static_cast<std::size_t>(d_out));
    if (state_out) state.ratio_history.setConstant(d_out, K, -1.0);

    Eigen::MatrixXd selected_cols(fan_in, d_out);
    std::vector<bool> taken(static_cast<std::size_t>(K), false);

    for (Eigen::Index t = 0; t < d_out; ++t) {
        Eigen::Index best = -1;
        double best_value = -1.0;
        double best_res_norm = 0.0;

        const auto scan = [&]() {
            best = -1;
            best_value = -1.0;
            for (Eigen::Index i = 0; i < K; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                if (col_norms[i] <= 0.0) continue;
                const double res_norm = state.residuals.col(i).norm();
                const double ratio = res_norm / col_norms[i];
                if (state_out) state.ratio_history(t, i) = ratio;
                if (ratio < tau) continue;
                const double value = scores[i] * ratio;
                if (value > best_value) {  // strict: ties go to the lowest index
                    best_value = value;
                    best = i;
                    best_res_norm = res_norm;
                }
            }
        };

        scan();
        if (best < 0) {
            // Rank exhausted: every remaining candidate lies (numerically) in
            // the span of the current block. Restart projection from scratch.
            for (Eigen::Index i = 0; i < K; ++i)
                if (!taken[static_cast<std::size_t>(i)])
                    state.residuals.col(i) = bank.col(i);
            state.basis.clear();
            ++state.block_resets;
            scan();
            if (best < 0)
                throw std::runtime_error(
                    "campaign_select: no selectable candidate (all remaining columns "
                    "have zero norm)");
        }

        selected_cols.col(t) = bank.col(best);
        state.selected.push_back(best);
        taken[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd a = state.residuals.col(best) / best_res_norm;
        state.residuals.noalias() -= a * (a.transpose() * state.residuals);
        state.basis.push_back(std::move(a));
    }

    if (state_out) *state_out = std::move(state);
    return selected_cols;
}

}  // namespace ibci
