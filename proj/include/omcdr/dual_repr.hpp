#pragma once

#include <vector>

#include "omcdr/dataset.hpp"
#include "omcdr/linalg.hpp"

namespace omcdr {

/// Common representation H, per-view specific representations S^k and their
/// mappings W^k (common) and P^k (specific).
///
/// An empty S/P means the model has no specific part; updates then treat
/// every S^k P^k term as zero.
struct ReprState {
    Matrix common;                      // H, N x m_c
    std::vector<Matrix> specific;       // S^k, N x m_s
    std::vector<Matrix> common_maps;    // W^k, m_c x d^k
    std::vector<Matrix> specific_maps;  // P^k, m_s x d^k

    bool has_specific() const { return !specific.empty(); }
};

/// Floor on row norms in the 2,1 reweighting.
inline constexpr double kRowNormFloor = 1e-8;

/// Frozen 2,1 reweighting diagonals: D for H, E^k for each S^k.
struct RegWeights {
    Vector common;
    std::vector<Vector> specific;
    double epsilon = kRowNormFloor;

    static RegWeights from(const ReprState& s, double epsilon = kRowNormFloor) {
        RegWeights w;
        w.epsilon = epsilon;
        w.common = linalg::row_norm_reweight(s.common, epsilon);
        for (const auto& sk : s.specific) w.specific.push_back(linalg::row_norm_reweight(sk, epsilon));
        return w;
    }
};

using linalg::row_norm_reweight;

namespace detail {

inline Matrix specific_part(const ReprState& s, std::size_t k) {
    return s.specific[k] * s.specific_maps[k];
}

inline void check_shapes(const MultiViewDataset& data, const ReprState& s) {
    const auto n = data.n_samples();
    const auto kviews = data.n_views();
    if (s.common.rows() != n || s.common_maps.size() != kviews)
        throw InvalidInput("representation state does not match dataset");
    if (s.has_specific() && (s.specific.size() != kviews || s.specific_maps.size() != kviews))
        throw InvalidInput("specific representation count does not match view count");
    for (std::size_t k = 0; k < kviews; ++k) {
        if (s.common_maps[k].rows() != s.common.cols() || s.common_maps[k].cols() != data.view(k).cols())
            throw InvalidInput("W^" + std::to_string(k + 1) + " has the wrong shape");
        if (s.has_specific() &&
            (s.specific[k].rows() != n || s.specific_maps[k].rows() != s.specific[k].cols() ||
             s.specific_maps[k].cols() != data.view(k).cols()))
            throw InvalidInput("S^" + std::to_string(k + 1) + "/P^" + std::to_string(k + 1) +
                               " have the wrong shape");
    }
}

}  // namespace detail

/// Sum over views of ||X^k - H W^k - S^k P^k||_F^2.
inline double reconstruction_error(const MultiViewDataset& data, const ReprState& s) {
    double total = 0.0;
    for (std::size_t k = 0; k < data.n_views(); ++k) {
        Matrix r = data.view(k) - s.common * s.common_maps[k];
        if (s.has_specific()) r -= detail::specific_part(s, k);
        total += r.squaredNorm();
    }
    return total;
}

/// Sum over views of ||H^T S^k||_F^2.
inline double redundancy_penalty(const Matrix& common, const std::vector<Matrix>& specific) {
    double total = 0.0;
    for (const auto& sk : specific) {
        if (sk.rows() != common.rows()) throw InvalidInput("redundancy_penalty: row mismatch");
        total += (common.transpose() * sk).squaredNorm();
    }
    return total;
}

/// Block update of H with D, S^k, W^k, P^k and the cluster pull frozen.
///
/// Minimizes the quadratic majorizer
///   sum_k ||X^k - H W^k - S^k P^k||^2 + (gamma/2) tr(H^T D H)
///   + beta sum_k ||H^T S^k||^2 + pull_weight ||H - pull_target||^2,
/// whose stationarity condition is the Sylvester equation
///   (pull_weight I + (gamma/2) D + beta sum_k S^k S^kT) H + H sum_k W^k W^kT
///     = sum_k (X^k - S^k P^k) W^kT + pull_weight pull_target.
/// pull_target is U^T V^{K+1,T} (row j is the center of sample j's cluster).
inline Matrix update_common(const MultiViewDataset& data, const ReprState& s,
                            const Matrix& pull_target, double pull_weight, double beta,
                            double gamma, const Vector& d_weights) {
    detail::check_shapes(data, s);
    const Eigen::Index n = data.n_samples();
    const Eigen::Index mc = s.common.cols();
    Matrix gram = Matrix::Zero(mc, mc);
    Matrix rhs = Matrix::Zero(n, mc);
    for (std::size_t k = 0; k < data.n_views(); ++k) {
        const Matrix& w = s.common_maps[k];
        gram.noalias() += w * w.transpose();
        if (s.has_specific())
            rhs.noalias() += (data.view(k) - detail::specific_part(s, k)) * w.transpose();
        else
            rhs.noalias() += data.view(k) * w.transpose();
    }
    if (pull_weight != 0.0) rhs += pull_weight * pull_target;

    Eigen::Index rank = 0;
    for (const auto& sk : s.specific) rank += sk.cols();
    Matrix z(n, rank);
    Eigen::Index off = 0;
    for (const auto& sk : s.specific) {
        z.middleCols(off, sk.cols()) = sk;
        off += sk.cols();
    }
    Vector diag = Vector::Constant(n, pull_weight) + 0.5 * gamma * d_weights;
    return linalg::solve_diag_lowrank_sylvester(diag, z, beta, gram, rhs);
}

/// Block update of S^k; the mirror of update_common with H in the role of
/// the low-rank coupling and P^k as the mapping:
///   (alpha_k I + (gamma/2) E^k + beta H H^T) S^k + S^k P^k P^kT
///     = (X^k - H W^k) P^kT + alpha_k pull_target.
inline Matrix update_specific(std::size_t k, const MultiViewDataset& data, const ReprState& s,
                              const Matrix& pull_target, double pull_weight, double beta,
                              double gamma, const Vector& e_weights) {
    detail::check_shapes(data, s);
    if (!s.has_specific()) throw InvalidInput("update_specific on a model without S^k");
    const Matrix& p = s.specific_maps.at(k);
    Matrix rhs = (data.view(k) - s.common * s.common_maps[k]) * p.transpose();
    if (pull_weight != 0.0) rhs += pull_weight * pull_target;
    const Eigen::Index n = data.n_samples();
    Vector diag = Vector::Constant(n, pull_weight) + 0.5 * gamma * e_weights;
    return linalg::solve_diag_lowrank_sylvester(diag, s.common, beta, p * p.transpose(), rhs);
}

/// W^k = (H^T H)^{-1} H^T (X^k - S^k P^k).
inline Matrix update_common_map(std::size_t k, const MultiViewDataset& data, const ReprState& s) {
    detail::check_shapes(data, s);
    const Matrix& h = s.common;
    Matrix target = data.view(k);
    if (s.has_specific()) target -= detail::specific_part(s, k);
    return linalg::spd_solve(h.transpose() * h, h.transpose() * target);
}

/// P^k = (S^kT S^k)^{-1} S^kT (X^k - H W^k).
inline Matrix update_specific_map(std::size_t k, const MultiViewDataset& data, const ReprState& s) {
    detail::check_shapes(data, s);
    if (!s.has_specific()) throw InvalidInput("update_specific_map on a model without S^k");
    const Matrix& sk = s.specific.at(k);
    return linalg::spd_solve(sk.transpose() * sk,
                             sk.transpose() * (data.view(k) - s.common * s.common_maps[k]));
}

}  // namespace omcdr
