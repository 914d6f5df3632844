#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "omcdr/common.hpp"

namespace omcdr {

using MatrixRef = std::reference_wrapper<const Matrix>;

/// Hard assignment of N samples to C clusters: the one-hot C x N indicator
/// matrix U stored as one cluster id per sample.
class Assignment {
public:
    Assignment() = default;
    Assignment(std::vector<int> labels, int n_clusters)
        : labels_(std::move(labels)), n_clusters_(n_clusters) {
        if (n_clusters_ < 1) throw InvalidInput("assignment needs at least one cluster");
        for (int l : labels_)
            if (l < 0 || l >= n_clusters_) throw InvalidInput("cluster id out of range");
    }

    /// Each sample drawn uniformly from 0..C-1, then empty clusters repaired.
    static Assignment random(Eigen::Index n, int n_clusters, Rng& rng) {
        if (n_clusters > n) throw InvalidInput("more clusters than samples");
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::size_t>(n_clusters)));
        Assignment a(std::move(labels), n_clusters);
        a.repair_empty();
        return a;
    }

    const std::vector<int>& labels() const { return labels_; }
    int operator[](std::size_t j) const { return labels_[j]; }
    std::size_t size() const { return labels_.size(); }
    int n_clusters() const { return n_clusters_; }

    std::vector<Eigen::Index> cluster_sizes() const {
        std::vector<Eigen::Index> sizes(static_cast<std::size_t>(n_clusters_), 0);
        for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
        return sizes;
    }

    Matrix to_matrix() const {
        Matrix u = Matrix::Zero(n_clusters_, static_cast<Eigen::Index>(labels_.size()));
        for (std::size_t j = 0; j < labels_.size(); ++j) u(labels_[j], static_cast<Eigen::Index>(j)) = 1.0;
        return u;
    }

    /// Moves the lowest-index member of the largest cluster into each empty
    /// cluster until none is empty. Requires N >= C.
    void repair_empty() {
        if (static_cast<std::size_t>(n_clusters_) > labels_.size())
            throw InvalidInput("more clusters than samples");
        auto sizes = cluster_sizes();
        for (int c = 0; c < n_clusters_; ++c) {
            if (sizes[c] > 0) continue;
            int donor = 0;
            for (int i = 1; i < n_clusters_; ++i)
                if (sizes[i] > sizes[donor]) donor = i;
            for (auto& l : labels_) {
                if (l == donor) {
                    l = c;
                    break;
                }
            }
            --sizes[donor];
            ++sizes[c];
        }
    }

    bool operator==(const Assignment&) const = default;

private:
    std::vector<int> labels_;
    int n_clusters_ = 0;
};

/// Cluster centers V^1..V^{K+1}, the assignment U and view weights alpha.
/// The last center matrix and weight belong to the common representation.
struct PartitionState {
    Assignment assignment;
    std::vector<Matrix> centers;  // V^k, m x C
    Vector weights;               // alpha, size K+1
};

/// Rows of U^T V^T: row j is the center of sample j's cluster (N x m).
inline Matrix center_pull(const Matrix& centers, const Assignment& u) {
    Matrix out(static_cast<Eigen::Index>(u.size()), centers.rows());
    for (std::size_t j = 0; j < u.size(); ++j)
        out.row(static_cast<Eigen::Index>(j)) = centers.col(u[j]).transpose();
    return out;
}

namespace detail {

inline void check_views(std::span<const MatrixRef> reps, std::span<const Matrix> centers,
                        const Assignment& u) {
    if (reps.size() != centers.size()) throw InvalidInput("one center matrix per view required");
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const Matrix& r = reps[k];
        if (static_cast<std::size_t>(r.rows()) != u.size() || centers[k].rows() != r.cols() ||
            centers[k].cols() != u.n_clusters())
            throw InvalidInput("partition shapes are inconsistent in view " + std::to_string(k + 1));
    }
}

}  // namespace detail

/// d_k = ||S^kT - V^k U||_F^2 for every view (the common representation
/// passed as the last view). Sums run in sample order.
inline Vector view_distortions(std::span<const MatrixRef> reps, std::span<const Matrix> centers,
                               const Assignment& u) {
    detail::check_views(reps, centers, u);
    Vector d = Vector::Zero(static_cast<Eigen::Index>(reps.size()));
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const Matrix& r = reps[k];
        double total = 0.0;
        for (Eigen::Index j = 0; j < r.rows(); ++j)
            total += (r.row(j).transpose() - centers[k].col(u[static_cast<std::size_t>(j)])).squaredNorm();
        d(static_cast<Eigen::Index>(k)) = total;
    }
    return d;
}

/// Maximum-entropy view weights: alpha_k = softmax(-d_k / delta), shifted by
/// min d for stability. Extreme ratios may underflow some weights to zero.
inline Vector update_view_weights(const Vector& distortions, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be positive and finite");
    if (distortions.size() == 0) throw InvalidInput("no distortions given");
    if (!distortions.allFinite()) throw NumericalError("view distortions are not finite");
    const double lo = distortions.minCoeff();
    Vector a = (-(distortions.array() - lo) / delta).exp();
    return a / a.sum();
}

/// Entropy term sum_k alpha_k ln alpha_k with 0 ln 0 = 0.
inline double weight_entropy(const Vector& alpha) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k)
        if (alpha(k) > 0.0) total += alpha(k) * std::log(alpha(k));
    return total;
}

/// Per-view cluster means (V^k = (U S^k)^T (U U^T)^{-1}).
///
/// An empty cluster's center is re-seeded, in all views at once, to the
/// sample farthest (alpha-weighted squared distance) from its own center;
/// ties go to the lowest sample index and a sample is used at most once.
inline std::vector<Matrix> update_centers(std::span<const MatrixRef> reps, const Assignment& u,
                                          const Vector& alpha) {
    const int c = u.n_clusters();
    const auto sizes = u.cluster_sizes();
    std::vector<Matrix> centers;
    centers.reserve(reps.size());
    for (const Matrix& r : reps) {
        if (static_cast<std::size_t>(r.rows()) != u.size()) throw InvalidInput("update_centers: row mismatch");
        Matrix v = Matrix::Zero(r.cols(), c);
        for (Eigen::Index j = 0; j < r.rows(); ++j) v.col(u[static_cast<std::size_t>(j)]) += r.row(j).transpose();
        for (int i = 0; i < c; ++i) v.col(i) /= static_cast<double>(std::max<Eigen::Index>(sizes[i], 1));
        centers.push_back(std::move(v));
    }

    bool any_empty = false;
    for (auto s : sizes) any_empty = any_empty || s == 0;
    if (!any_empty) return centers;
    if (alpha.size() != static_cast<Eigen::Index>(reps.size()))
        throw InvalidInput("update_centers: one weight per view required");

    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    Vector far = Vector::Zero(n);
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const Matrix& r = reps[k];
        for (Eigen::Index j = 0; j < n; ++j)
            far(j) += alpha(static_cast<Eigen::Index>(k)) *
                      (r.row(j).transpose() - centers[k].col(u[static_cast<std::size_t>(j)])).squaredNorm();
    }
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int i = 0; i < c; ++i) {
        if (sizes[i] > 0) continue;
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!used[j] && (pick < 0 || far(j) > far(pick))) pick = j;
        used[pick] = true;
        for (std::size_t k = 0; k < reps.size(); ++k) centers[k].col(i) = reps[k].get().row(pick).transpose();
    }
    return centers;
}

/// Exact minimizer of sum_k alpha_k ||S^kT - V^k U||^2 over one-hot U:
/// each sample goes to the cluster with the smallest alpha-weighted squared
/// distance, ties to the lowest cluster index.
inline Assignment update_assignments(std::span<const MatrixRef> reps, std::span<const Matrix> centers,
                                     const Vector& alpha) {
    if (reps.empty() || reps.size() != centers.size() ||
        alpha.size() != static_cast<Eigen::Index>(reps.size()))
        throw InvalidInput("update_assignments: inconsistent view counts");
    const Eigen::Index n = reps.front().get().rows();
    const Eigen::Index c = centers.front().cols();
    std::vector<int> labels(static_cast<std::size_t>(n));
    Vector cost(c);
    for (Eigen::Index j = 0; j < n; ++j) {
        cost.setZero();
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const Matrix& r = reps[k];
            const double a = alpha(static_cast<Eigen::Index>(k));
            for (Eigen::Index i = 0; i < c; ++i)
                cost(i) += a * (r.row(j).transpose() - centers[k].col(i)).squaredNorm();
        }
        int best = 0;
        for (Eigen::Index i = 1; i < c; ++i)
            if (cost(i) < cost(best)) best = static_cast<int>(i);
        labels[static_cast<std::size_t>(j)] = best;
    }
    return Assignment(std::move(labels), static_cast<int>(c));
}

}  // namespace omcdr
