#include "ibci/scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ibci {

AlphaSchedule AlphaSchedule::constant(double alpha, std::size_t depth) {
    AlphaSchedule s;
    s.per_layer.assign(depth, alpha);
    s.validate();
    return s;
}

AlphaSchedule AlphaSchedule::linear(double front, double back, std::size_t depth) {
    AlphaSchedule s;
    s.per_layer.resize(depth);
    for (std::size_t i = 0; i < depth; ++i) {
        const double t = depth > 1 ? static_cast<double>(i) / static_cast<double>(depth - 1) : 0.0;
        s.per_layer[i] = front + (back - front) * t;
    }
    s.validate();
    return s;
}

void AlphaSchedule::validate() const {
    for (double a : per_layer)
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("AlphaSchedule: alpha " + std::to_string(a) +
                                        " outside [0, 1]");
}

Eigen::VectorXd iim_scores(const Eigen::MatrixXd& z) {
    const Eigen::Index m = z.rows();
    if (m < 2) throw std::invalid_argument("iim_scores: need at least 2 samples");
    if (!z.allFinite()) throw std::invalid_argument("iim_scores: non-finite activation");

    const Eigen::RowVectorXd mu = z.colwise().mean();
    return (z.rowwise() - mu).colwise().squaredNorm().transpose() /
           static_cast<double>(m);
}

Eigen::VectorXd tie_scores(const Eigen::MatrixXd& z, const ClassPartition& part,
                           TieCentering centering, bool class_size_norm) {
    const Eigen::Index m = z.rows();
    const Eigen::Index c = z.cols();
    if (m < 2) throw std::invalid_argument("tie_scores: need at least 2 samples");
    if (!z.allFinite()) throw std::invalid_argument("tie_scores: non-finite activation");
    if (part.total() != m)
        throw std::invalid_argument("tie_scores: partition covers " +
                                    std::to_string(part.total()) + " rows, activations have " +
                                    std::to_string(m));
    const auto n_classes = part.n_classes();
    for (std::size_t j = 0; j < n_classes; ++j)
        if (part.indices[j].empty())
            throw std::invalid_argument("tie_scores: class " + std::to_string(j) + " is empty");

    const Eigen::RowVectorXd mu = z.colwise().mean();

    Eigen::VectorXd between = Eigen::VectorXd::Zero(c);
    Eigen::VectorXd within = Eigen::VectorXd::Zero(c);
    Eigen::MatrixXd block;  // rows of one class, reused
    for (std::size_t j = 0; j < n_classes; ++j) {
        const auto& rows = part.indices[j];
        const auto mj = static_cast<Eigen::Index>(rows.size());
        block.resize(mj, c);
        for (Eigen::Index r = 0; r < mj; ++r)
            block.row(r) = z.row(rows[static_cast<std::size_t>(r)]);

        const Eigen::RowVectorXd class_mu = block.colwise().mean();
        between += (class_mu - mu).array().square().matrix().transpose();

        const Eigen::RowVectorXd center =
            centering == TieCentering::kPerClass ? class_mu : mu;
        Eigen::VectorXd scatter =
            (block.rowwise() - center).colwise().squaredNorm().transpose();
        if (class_size_norm) scatter /= static_cast<double>(mj);
        within += scatter;
    }

    return between - within / static_cast<double>(n_classes);
}

Eigen::VectorXd combine_scores(const Eigen::VectorXd& iim,
                               const Eigen::VectorXd& tie, double alpha) {
    if (iim.size() != tie.size())
        throw std::invalid_argument("combine_scores: length mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("combine_scores: alpha outside [0, 1]");
    const Eigen::Index n = iim.size();

    const auto standardize = [n](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        const double mean = v.mean();
        const double sd = std::sqrt((v.array() - mean).square().sum() /
                                    static_cast<double>(n));
        if (sd < 1e-12) return Eigen::VectorXd::Zero(n);
        return (v.array() - mean) / sd;
    };

    const Eigen::VectorXd mixed =
        alpha * standardize(iim) + (1.0 - alpha) * standardize(tie);

    const double lo = mixed.minCoeff();
    const double hi = mixed.maxCoeff();
    if (hi - lo < 1e-12) return Eigen::VectorXd::Ones(n);
    return (mixed.array() - lo) / (hi - lo);
}

}  // namespace ibci
