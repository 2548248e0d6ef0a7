#include "ibci/dataset.hpp"

#include "ibci/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace ibci {

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw std::invalid_argument("Dataset: feature rows != label count");
    if (n_classes < 1) throw std::invalid_argument("Dataset: n_classes must be >= 1");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw std::invalid_argument("Dataset: label out of range at row " +
                                        std::to_string(i));
    }
    if (!features.allFinite())
        throw std::invalid_argument("Dataset: non-finite feature value");
}

Eigen::Index ClassPartition::total() const {
    Eigen::Index m = 0;
    for (const auto& lst : indices) m += static_cast<Eigen::Index>(lst.size());
    return m;
}

ClassPartition partition(const Dataset& ds) {
    ClassPartition part;
    part.indices.resize(static_cast<std::size_t>(ds.n_classes));
    for (Eigen::Index i = 0; i < ds.labels.size(); ++i) {
        const int y = ds.labels[i];
        if (y < 0 || y >= ds.n_classes)
            throw std::invalid_argument("partition: label " + std::to_string(y) +
                                        " out of range at row " + std::to_string(i));
        part.indices[static_cast<std::size_t>(y)].push_back(i);
    }
    return part;
}

Dataset synth_gaussians(const std::vector<Eigen::VectorXd>& class_means,
                        double stddev, Eigen::Index n_per_class,
                        std::uint64_t seed) {
    const auto n_classes = static_cast<Eigen::Index>(class_means.size());
    if (n_classes < 2)
        throw std::invalid_argument("synth_gaussians: need at least 2 class means");
    if (stddev < 0.0) throw std::invalid_argument("synth_gaussians: stddev must be >= 0");
    if (n_per_class < 1)
        throw std::invalid_argument("synth_gaussians: n_per_class must be >= 1");
    const Eigen::Index d = class_means.front().size();
    for (const auto& mu : class_means)
        if (mu.size() != d)
            throw std::invalid_argument("synth_gaussians: class means differ in dimension");

    Dataset ds;
    ds.n_classes = static_cast<int>(n_classes);
    ds.features.resize(n_classes * n_per_class, d);
    ds.labels.resize(n_classes * n_per_class);

    Rng rng(seed);
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < n_classes; ++j) {
        for (Eigen::Index i = 0; i < n_per_class; ++i, ++row) {
            for (Eigen::Index q = 0; q < d; ++q)
                ds.features(row, q) = class_means[static_cast<std::size_t>(j)][q] +
                                      stddev * rng.normal();
            ds.labels[row] = static_cast<int>(j);
        }
    }
    return ds;
}

Dataset subsample(const Dataset& ds, Eigen::Index n, std::uint64_t seed) {
    const Eigen::Index m = ds.size();
    if (n < 1) throw std::invalid_argument("subsample: n must be >= 1");
    if (n > m)
        throw std::invalid_argument("subsample: n = " + std::to_string(n) +
                                    " exceeds dataset size " + std::to_string(m));

    // Partial Fisher-Yates over the index range, then sort so the subset
    // keeps the original row order. n == m degenerates to the identity.
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto j = t + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m - t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(n));
    std::sort(pool.begin(), pool.end());

    Dataset out;
    out.n_classes = ds.n_classes;
    out.features.resize(n, ds.dim());
    out.labels.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        out.features.row(t) = ds.features.row(pool[static_cast<std::size_t>(t)]);
        out.labels[t] = ds.labels[pool[static_cast<std::size_t>(t)]];
    }
    return out;
}

}  // namespace ibci
