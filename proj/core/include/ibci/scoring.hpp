#pragma once

// Per-candidate neuron scores.
//
// Both criteria are traces over the candidate activation matrix, so they
// decompose exactly into one score per activation column:
//   - input information maintenance: the column's population variance
//     (summing over columns gives tr of the activation covariance);
//   - target-related information enhancement: between-class spread of the
//     column's class means minus 1/N of its within-class scatter.

#include "ibci/dataset.hpp"

#include <Eigen/Core>

#include <vector>

namespace ibci {

// Where the within-class scatter of tie_scores is centered. kPerClass
// subtracts each class's own mean ("intra-class variance" proper) and is
// the default; kGlobal subtracts the global column mean, which matches
// reading the criterion off a globally centered activation matrix.
enum class TieCentering { kPerClass, kGlobal };

// Per-layer mixing weight between the two criteria, each in [0, 1]
// (1 = variance only, 0 = class separation only).
struct AlphaSchedule {
    std::vector<double> per_layer;

    static AlphaSchedule constant(double alpha, std::size_t depth);
    // Linear interpolation from `front` at layer 1 to `back` at layer D.
    static AlphaSchedule linear(double front, double back, std::size_t depth);

    std::size_t depth() const { return per_layer.size(); }
    void validate() const;  // throws unless every value is in [0, 1]
};

// Population variance of each activation column. Requires m >= 2 rows and
// finite entries.
Eigen::VectorXd iim_scores(const Eigen::MatrixXd& z);

// For column q with global mean mu_q and class means mu_{j,q}:
//   score_q = sum_j (mu_{j,q} - mu_q)^2  -  (1/N) sum_j sum_{i in j} (z_iq - c)^2
// where c = mu_{j,q} (kPerClass) or mu_q (kGlobal). With class_size_norm the
// j-th within sum is divided by the class size m_j instead of the plain sum.
// Every class in `part` must be non-empty and the lists must cover all rows.
Eigen::VectorXd tie_scores(const Eigen::MatrixXd& z, const ClassPartition& part,
                           TieCentering centering = TieCentering::kPerClass,
                           bool class_size_norm = false);

// Standardizes each score vector across candidates (z-score with population
// stddev; near-constant vectors collapse to zero), mixes them as
// alpha*iim + (1-alpha)*tie, and min-max maps the result onto [0, 1] so the
// campaign's ratio multiplication stays monotone. A constant mix maps to
// all-ones. The argmax equals the argmax of the standardized mix.
Eigen::VectorXd combine_scores(const Eigen::VectorXd& iim,
                               const Eigen::VectorXd& tie, double alpha);

}  // namespace ibci
