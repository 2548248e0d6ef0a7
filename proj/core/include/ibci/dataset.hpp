#pragma once

// Labeled feature datasets and class partitions.
//
// Class membership is kept as per-class row-index lists instead of m x m
// diagonal membership matrices; every trace expression downstream only
// ever needs the index sets, and the lists are O(m) instead of O(m^2).

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace ibci {

struct Dataset {
    Eigen::MatrixXd features;  // m x d
    Eigen::VectorXi labels;    // m, values in [0, n_classes)
    int n_classes = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    // Throws std::invalid_argument when an invariant is broken:
    // row/label count mismatch, label out of range, or non-finite feature.
    void validate() const;
};

struct ClassPartition {
    // indices[j] lists the dataset rows of class j, ascending. Classes with
    // no members are allowed here; consumers that need every class non-empty
    // (e.g. tie_scores) enforce that themselves.
    std::vector<std::vector<Eigen::Index>> indices;

    std::size_t n_classes() const { return indices.size(); }
    std::size_t count(std::size_t cls) const { return indices[cls].size(); }
    Eigen::Index total() const;
};

// Splits dataset rows by label. Throws on labels outside [0, n_classes).
ClassPartition partition(const Dataset& ds);

// Isotropic Gaussian blobs around the given class means, n_per_class samples
// each, class-major order. Deterministic in seed.
Dataset synth_gaussians(const std::vector<Eigen::VectorXd>& class_means,
                        double stddev, Eigen::Index n_per_class,
                        std::uint64_t seed);

// Uniform sample of n rows without replacement, kept in original row order;
// n == size() returns the dataset unchanged. Deterministic in seed.
Dataset subsample(const Dataset& ds, Eigen::Index n, std::uint64_t seed);

}  // namespace ibci
