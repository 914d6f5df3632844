#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "omcdr/dataset.hpp"

namespace omcdr {

/// Parameters of the planted common/specific factor model
/// X^k = H W^k + S^k P^k + noise.
struct SyntheticSpec {
    int n_samples = 300;
    int n_views = 2;
    int n_clusters = 3;
    int dim_common = 3;
    int dim_specific = 5;
    std::vector<int> view_dims{20, 30};
    double noise_sigma = 0.1;
    /// When set, each S^k row is a per-view cluster template plus noise;
    /// otherwise S^k is unstructured Gaussian noise of scale noise_sigma.
    bool specific_structure = false;
    /// Template sets are redrawn until every pair of cluster templates is at
    /// least this far apart (Euclidean). 0 disables the check.
    double min_template_separation = 0.3;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_samples < 2 || n_views < 1 || n_clusters < 1 || dim_common < 1 || dim_specific < 1)
            throw InvalidInput("synthetic spec: dimensions must be positive (N >= 2)");
        if (static_cast<int>(view_dims.size()) != n_views)
            throw InvalidInput("synthetic spec: need one dimension per view");
        for (int d : view_dims)
            if (d < 1) throw InvalidInput("synthetic spec: view dimensions must be positive");
        if (!(noise_sigma >= 0.0)) throw InvalidInput("synthetic spec: noise_sigma must be >= 0");
        if (!(min_template_separation >= 0.0) || !std::isfinite(min_template_separation))
            throw InvalidInput("synthetic spec: min_template_separation must be finite and >= 0");
        if (n_clusters > n_samples) throw InvalidInput("synthetic spec: n_clusters > n_samples");
    }
};

/// Generated data together with the planted factors.
struct SyntheticData {
    MultiViewDataset dataset;
    std::vector<int> labels;
    Matrix common;                 // H, N x m_c
    std::vector<Matrix> specific;  // S^k, N x m_s
    std::vector<Matrix> common_maps;    // W^k, m_c x d^k
    std::vector<Matrix> specific_maps;  // P^k, m_s x d^k
};

/// Draws a planted multi-view dataset.
///
/// Draw order from the single seeded generator:
///  1. labels: i mod C, then a Fisher-Yates shuffle;
///  2. C x m_c common templates (uniform on [0, 1), redrawn whole until the
///     separation holds), then N x m_c Gaussian noise for H;
///  3. per view k: S^k (C x m_s templates then N x m_s noise, or just the
///     N x m_s noise when unstructured), W^k and P^k (uniform on [-1, 1)),
///     then N x d^k noise.
/// Gaussian draws are skipped entirely when noise_sigma is zero.
inline SyntheticData synthesize_multiview(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const Eigen::Index n = spec.n_samples;

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i % spec.n_clusters);
    for (std::size_t i = labels.size() - 1; i > 0; --i) std::swap(labels[i], labels[rng.below(i + 1)]);

    auto noise = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix m = Matrix::Zero(rows, cols);
        if (spec.noise_sigma > 0.0)
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = spec.noise_sigma * rng.normal();
        return m;
    };
    auto draw_templates = [&](Eigen::Index dim) {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Matrix t = rng.uniform_matrix(spec.n_clusters, dim);
            double closest = std::numeric_limits<double>::infinity();
            for (int a = 0; a < spec.n_clusters; ++a)
                for (int b = a + 1; b < spec.n_clusters; ++b)
                    closest = std::min(closest, (t.row(a) - t.row(b)).norm());
            if (closest >= spec.min_template_separation) return t;
        }
        throw InvalidInput("synthetic spec: cannot place " + std::to_string(spec.n_clusters) +
                           " templates with the requested separation");
    };
    auto planted = [&](Eigen::Index dim) {
        const Matrix templates = draw_templates(dim);
        Matrix out(n, dim);
        for (Eigen::Index i = 0; i < n; ++i) out.row(i) = templates.row(labels[i]);
        return Matrix(out + noise(n, dim));
    };

    auto signed_uniform = [&](Eigen::Index rows, Eigen::Index cols) {
        return Matrix((2.0 * rng.uniform_matrix(rows, cols)).array() - 1.0);
    };

    Matrix h = planted(spec.dim_common);
    std::vector<Matrix> s, w, p, views;
    for (int k = 0; k < spec.n_views; ++k) {
        s.push_back(spec.specific_structure ? planted(spec.dim_specific)
                                            : noise(n, spec.dim_specific));
        w.push_back(signed_uniform(spec.dim_common, spec.view_dims[k]));
        p.push_back(signed_uniform(spec.dim_specific, spec.view_dims[k]));
        views.push_back(h * w.back() + s.back() * p.back() + noise(n, spec.view_dims[k]));
    }
    auto dataset = MultiViewDataset::make(std::move(views), labels, std::nullopt, "synthetic");
    // make() renumbers by first appearance; report the dataset's numbering.
    labels = *dataset.labels();
    return SyntheticData{std::move(dataset), std::move(labels), std::move(h),
                         std::move(s), std::move(w), std::move(p)};
}

}  // namespace omcdr
