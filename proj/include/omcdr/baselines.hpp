#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "omcdr/dataset.hpp"
#include "omcdr/linalg.hpp"
#include "omcdr/partition.hpp"

namespace omcdr {

enum class KMeansInit { random_assignment, plus_plus };

struct KMeansResult {
    Assignment assignment;  // U
    Matrix centers;         // V, d x C
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> inertia_trace;
};

/// Called once per iteration with the centers computed from the previous
/// assignment and the assignment derived from them.
using KMeansObserver = std::function<void(int iteration, const Matrix& centers, const Assignment& next)>;

/// K-Means in matrix-factorization form, min ||X^T - V U||_F^2, started from
/// a given assignment. Alternates V = (U X)^T (U U^T)^{-1} (cluster means,
/// empty clusters re-seeded as in update_centers) and the nearest-center U
/// until U stops changing or max_iter is reached.
inline KMeansResult kmeans_mf(const Matrix& x, Assignment initial, int max_iter,
                              const KMeansObserver& observer = {}) {
    if (static_cast<Eigen::Index>(initial.size()) != x.rows())
        throw InvalidInput("kmeans: initial assignment length differs from sample count");
    const Vector unit = Vector::Ones(1);
    const std::array<MatrixRef, 1> reps{std::cref(x)};
    KMeansResult res;
    res.assignment = std::move(initial);
    for (int t = 1; t <= max_iter; ++t) {
        std::vector<Matrix> v = update_centers(reps, res.assignment, unit);
        Assignment next = update_assignments(reps, v, unit);
        res.inertia = view_distortions(reps, v, next)(0);
        res.inertia_trace.push_back(res.inertia);
        res.iterations = t;
        if (observer) observer(t, v.front(), next);
        const bool same = next == res.assignment;
        res.assignment = std::move(next);
        res.centers = std::move(v.front());
        if (same) {
            res.converged = true;
            break;
        }
    }
    if (res.iterations == 0) {
        res.centers = update_centers(reps, res.assignment, unit).front();
        res.inertia = view_distortions(reps, std::span<const Matrix>(&res.centers, 1), res.assignment)(0);
    }
    return res;
}

/// Seeded initial assignment: uniform random labels with empty-cluster
/// repair, or k-means++ seeding followed by nearest-center assignment.
inline Assignment kmeans_initial(const Matrix& x, int n_clusters, Rng& rng, KMeansInit init) {
    if (n_clusters < 1 || n_clusters > x.rows()) throw InvalidInput("kmeans: need 1 <= C <= N");
    if (init == KMeansInit::random_assignment) return Assignment::random(x.rows(), n_clusters, rng);

    Matrix centers(x.cols(), n_clusters);
    centers.col(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(x.rows())))).transpose();
    Vector best = (x.rowwise() - centers.col(0).transpose()).rowwise().squaredNorm();
    for (int c = 1; c < n_clusters; ++c) {
        const double total = best.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (pick = 0; pick < x.rows() - 1; ++pick) {
                target -= best(pick);
                if (target < 0.0) break;
            }
        }
        centers.col(c) = x.row(pick).transpose();
        best = best.cwiseMin((x.rowwise() - centers.col(c).transpose()).rowwise().squaredNorm());
    }
    const std::array<MatrixRef, 1> reps{std::cref(x)};
    Assignment a = update_assignments(reps, std::span<const Matrix>(&centers, 1), Vector::Ones(1));
    a.repair_empty();
    return a;
}

inline KMeansResult kmeans_mf(const Matrix& x, int n_clusters, int max_iter, std::uint64_t seed,
                              KMeansInit init = KMeansInit::random_assignment) {
    Rng rng(seed);
    return kmeans_mf(x, kmeans_initial(x, n_clusters, rng, init), max_iter);
}

struct CommonRepResult {
    Matrix common;                    // H
    std::vector<Matrix> common_maps;  // W^k
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
};

/// sum_k ||X^k - H W^k||_F^2
inline double common_rep_objective(const MultiViewDataset& data, const Matrix& h,
                                   const std::vector<Matrix>& w) {
    double total = 0.0;
    for (std::size_t k = 0; k < data.n_views(); ++k) total += (data.view(k) - h * w[k]).squaredNorm();
    return total;
}

/// H = (sum_k X^k W^kT)(sum_k W^k W^kT)^{-1}, the exact minimizer in H.
inline Matrix common_rep_update_h(const MultiViewDataset& data, const std::vector<Matrix>& w) {
    const Eigen::Index mc = w.front().rows();
    Matrix gram = Matrix::Zero(mc, mc);
    Matrix cross = Matrix::Zero(data.n_samples(), mc);
    for (std::size_t k = 0; k < data.n_views(); ++k) {
        gram.noalias() += w[k] * w[k].transpose();
        cross.noalias() += data.view(k) * w[k].transpose();
    }
    return linalg::spd_solve(gram, cross.transpose()).transpose();
}

/// W^k = (H^T H)^{-1} H^T X^k.
inline Matrix common_rep_update_w(const MultiViewDataset& data, const Matrix& h, std::size_t k) {
    return linalg::spd_solve(h.transpose() * h, h.transpose() * data.view(k));
}

/// Two-step baseline: alternating least squares for a shared factor H with
/// per-view maps W^k, starting from uniform random W^k.
inline CommonRepResult fit_common_rep(const MultiViewDataset& data, int dim_common, int max_iter,
                                      double tol, std::uint64_t seed) {
    if (dim_common < 1) throw InvalidInput("dim_common must be positive");
    if (max_iter < 1) throw InvalidInput("max_iter must be positive");
    Rng rng(seed);
    CommonRepResult res;
    for (std::size_t k = 0; k < data.n_views(); ++k)
        res.common_maps.push_back(rng.uniform_matrix(dim_common, data.view(k).cols()));
    for (int t = 1; t <= max_iter; ++t) {
        res.common = common_rep_update_h(data, res.common_maps);
        for (std::size_t k = 0; k < data.n_views(); ++k)
            res.common_maps[k] = common_rep_update_w(data, res.common, k);
        const double obj = common_rep_objective(data, res.common, res.common_maps);
        if (!std::isfinite(obj)) throw NumericalError("common representation objective is not finite");
        res.objective_trace.push_back(obj);
        res.iterations = t;
        if (t > 1 && std::abs(res.objective_trace[t - 2] - obj) < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace omcdr
