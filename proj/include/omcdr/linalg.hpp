#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "omcdr/common.hpp"

namespace omcdr::linalg {

/// Relative ridge added to numerically singular SPD systems.
inline constexpr double kRidgeScale = 1e-10;

/// Solves A X = B for symmetric positive (semi)definite A.
///
/// If the Cholesky factorization fails or is badly conditioned, adds
/// kRidgeScale * trace(A)/n * I and retries, growing the ridge tenfold each
/// time. Never forms an explicit inverse.
inline Matrix spd_solve(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    if (n == 0) return Matrix(0, b.cols());
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) return llt.solve(b);

    double base = a.trace() / static_cast<double>(n);
    if (!(base > 0.0) || !std::isfinite(base)) base = 1.0;
    double ridge = kRidgeScale * base;
    for (int attempt = 0; attempt < 12; ++attempt, ridge *= 10.0) {
        Matrix shifted = a;
        shifted.diagonal().array() += ridge;
        llt.compute(shifted);
        if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) return llt.solve(b);
    }
    throw NumericalError("spd_solve: system is not positive definite even after ridge repair");
}

/// Diagonal of the 2,1 reweighting: entry i is 1 / max(||row i||, epsilon).
inline Vector row_norm_reweight(const Matrix& m, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInput("row_norm_reweight: epsilon must be positive");
    Vector w(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) w(i) = 1.0 / std::max(m.row(i).norm(), epsilon);
    return w;
}

/// Solves  diag(d) Y + beta Z Z^T Y + Y B = F  for Y (N x m).
///
/// d is a length-N non-negative diagonal, Z is N x r, B is m x m symmetric
/// positive semidefinite. B is diagonalized (B = Q L Q^T) so each column of
/// Y Q decouples into an SPD system (diag(d) + l_j I + beta Z Z^T) y = f.
/// Those are solved with the Woodbury identity when r < N and the shifted
/// diagonal is safely positive, otherwise by a dense Cholesky solve.
inline Matrix solve_diag_lowrank_sylvester(const Vector& d, const Matrix& z, double beta,
                                           const Matrix& b, const Matrix& f) {
    const Eigen::Index n = f.rows();
    const Eigen::Index m = f.cols();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of mapping Gram failed");
    const Matrix& q = eig.eigenvectors();
    const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
    const Matrix fq = f * q;

    const Eigen::Index rank = (beta > 0.0) ? z.cols() : 0;
    const bool dense = rank >= n;
    Matrix gram;  // beta Z Z^T for the dense path
    if (dense) gram = beta * (z * z.transpose());

    Matrix yq(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Vector diag = d.array() + lambda(j);
        const double scale = std::max(diag.maxCoeff(), 1.0);
        const bool diag_ok = diag.minCoeff() > 1e-12 * scale;
        if (!dense && diag_ok) {
            Vector inv = diag.cwiseInverse();
            Vector base = inv.cwiseProduct(fq.col(j));
            if (rank == 0) {
                yq.col(j) = base;
                continue;
            }
            // (D + beta Z Z^T)^{-1} f = D^{-1} f - D^{-1} Z (I/beta + Z^T D^{-1} Z)^{-1} Z^T D^{-1} f
            Matrix cap = z.transpose() * inv.asDiagonal() * z;
            cap.diagonal().array() += 1.0 / beta;
            Vector corr = spd_solve(cap, z.transpose() * base);
            yq.col(j) = base - inv.cwiseProduct(z * corr);
        } else {
            Matrix sys = dense ? gram : Matrix(beta * (z * z.transpose()));
            sys.diagonal() += diag;
            yq.col(j) = spd_solve(sys, fq.col(j));
        }
    }
    return yq * q.transpose();
}

}  // namespace omcdr::linalg
