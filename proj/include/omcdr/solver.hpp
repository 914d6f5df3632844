#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "omcdr/baselines.hpp"
#include "omcdr/dataset.hpp"
#include "omcdr/dual_repr.hpp"
#include "omcdr/partition.hpp"

namespace omcdr {

/// Solver configuration. Defaults sit at the centre of the
/// {1e-3, ..., 1e3} grid for beta/gamma/delta.
struct HyperParams {
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 1.0;
    int dim_common = 0;     // m_c; 0 means "number of clusters"
    int dim_specific = 50;  // m_s
    int n_clusters = 0;     // C; 0 means "from the dataset"
    int max_iter = 100;     // T
    double tol = 1e-6;      // absolute |Obj(t) - Obj(t-1)|
    double rel_tol = 1e-8;  // relative change, for large objectives
    std::uint64_t seed = 0;
    Normalization normalization = Normalization::zscore;
    /// Use the random V^{K+1} U pull already in the very first H solve.
    bool init_with_cluster_pull = false;
    double row_norm_floor = kRowNormFloor;

    void validate() const {
        if (!(beta > 0.0) || !(gamma > 0.0) || !(delta > 0.0))
            throw InvalidInput("beta, gamma and delta must be positive");
        if (!std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(delta))
            throw InvalidInput("beta, gamma and delta must be finite");
        if (dim_common < 0 || dim_specific < 1) throw InvalidInput("representation dimensions must be positive");
        if (n_clusters < 0) throw InvalidInput("n_clusters must be non-negative");
        if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
        if (!(tol > 0.0) || !(rel_tol >= 0.0)) throw InvalidInput("tol must be positive");
        if (!(row_norm_floor > 0.0)) throw InvalidInput("row_norm_floor must be positive");
    }

    int clusters_for(const MultiViewDataset& data) const {
        const int c = n_clusters > 0 ? n_clusters : data.n_classes();
        if (c < 1) throw InvalidInput("number of clusters is unknown: pass it explicitly or provide labels");
        if (c > data.n_samples()) throw InvalidInput("more clusters than samples");
        return c;
    }
    int common_dim_for(const MultiViewDataset& data) const {
        return dim_common > 0 ? dim_common : clusters_for(data);
    }
};

/// The full variable set: representations plus partition.
struct ModelState {
    ReprState repr;
    PartitionState partition;
};

struct FitResult {
    std::vector<int> labels;
    ModelState state;
    std::vector<double> objective_trace;
    std::vector<Vector> alpha_trace;
    int iterations = 0;
    bool converged = false;
    double wall_time = 0.0;  // seconds
    /// Iterations where the objective rose within the tolerated slack.
    std::vector<std::string> warnings;
};

/// Sub-steps of one outer iteration, in execution order.
enum class Step { common, specific, common_map, specific_map, weights, centers, assignment };

/// Instrumentation hook invoked after every sub-step; view is the 0-based
/// view index for per-view steps and -1 otherwise.
using StepObserver = std::function<void(Step, int view, const ModelState&)>;

/// Views entering the clustering terms: S^1..S^K followed by H.
inline std::vector<MatrixRef> clustering_views(const ReprState& r) {
    std::vector<MatrixRef> out;
    for (const auto& s : r.specific) out.emplace_back(std::cref(s));
    out.emplace_back(std::cref(r.common));
    return out;
}

struct ObjectiveTerms {
    double reconstruction = 0.0;  // sum_k ||X^k - H W^k - S^k P^k||^2
    double sparsity = 0.0;        // gamma (||H||_21 + sum_k ||S^k||_21)
    double redundancy = 0.0;      // beta sum_k ||H^T S^k||^2
    double clustering = 0.0;      // sum_k alpha_k ||S^kT - V^k U||^2 (H last)
    double entropy = 0.0;         // delta sum_k alpha_k ln alpha_k
    double total() const { return reconstruction + sparsity + redundancy + clustering + entropy; }
};

/// Term-by-term objective. Models without a specific part drop the S terms;
/// a partition without centers drops the clustering and entropy terms.
inline ObjectiveTerms objective_terms(const MultiViewDataset& data, const ModelState& s,
                                      const HyperParams& p) {
    ObjectiveTerms t;
    t.reconstruction = reconstruction_error(data, s.repr);
    double l21 = l21_norm(s.repr.common);
    for (const auto& sk : s.repr.specific) l21 += l21_norm(sk);
    t.sparsity = p.gamma * l21;
    t.redundancy = p.beta * redundancy_penalty(s.repr.common, s.repr.specific);
    if (!s.partition.centers.empty()) {
        const auto reps = clustering_views(s.repr);
        const Vector d = view_distortions(reps, s.partition.centers, s.partition.assignment);
        if (s.partition.weights.size() != d.size()) throw InvalidInput("one view weight per clustering view required");
        t.clustering = s.partition.weights.dot(d);
        t.entropy = p.delta * weight_entropy(s.partition.weights);
    }
    return t;
}

inline double objective(const MultiViewDataset& data, const ModelState& s, const HyperParams& p) {
    return objective_terms(data, s, p).total();
}

namespace detail {

inline bool converged(const std::vector<double>& trace, const HyperParams& p) {
    if (trace.size() < 2) return false;
    const double prev = trace[trace.size() - 2];
    const double cur = trace.back();
    const double change = std::abs(cur - prev);
    return change < p.tol || change < p.rel_tol * std::abs(cur);
}

inline void record(FitResult& res, double obj, const Vector& alpha, const HyperParams& p, int t) {
    if (!std::isfinite(obj))
        throw NumericalError("objective became non-finite at iteration " + std::to_string(t) +
                             " (beta=" + std::to_string(p.beta) + ", gamma=" + std::to_string(p.gamma) +
                             ", delta=" + std::to_string(p.delta) + ")");
    if (!res.objective_trace.empty() && obj > res.objective_trace.back())
        res.warnings.push_back("objective rose by " + std::to_string(obj - res.objective_trace.back()) +
                               " at iteration " + std::to_string(t));
    res.objective_trace.push_back(obj);
    res.alpha_trace.push_back(alpha);
    res.iterations = t;
}

/// First H: D = I, cluster pull only if requested.
inline Matrix initial_common(const MultiViewDataset& data, ReprState& r, const PartitionState& part,
                             const HyperParams& p, int mc) {
    r.common = Matrix::Zero(data.n_samples(), mc);
    const Vector ones = Vector::Ones(data.n_samples());
    if (p.init_with_cluster_pull && !part.centers.empty()) {
        const Matrix pull = center_pull(part.centers.back(), part.assignment);
        return update_common(data, r, pull, part.weights(part.weights.size() - 1), p.beta, p.gamma, ones);
    }
    return update_common(data, r, Matrix(), 0.0, p.beta, p.gamma, ones);
}

inline void stamp(FitResult& res, std::chrono::steady_clock::time_point start) {
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Random initial state: S^k, W^k, P^k, V^1..V^{K+1} uniform on [0, 1) in
/// that order (each family for k = 1..K), then a random repaired U, uniform
/// alpha = 1/(K+1), and H from one Step-1 solve.
inline ModelState initialize(const MultiViewDataset& data, const HyperParams& p) {
    p.validate();
    const int c = p.clusters_for(data);
    const int mc = p.common_dim_for(data);
    const int ms = p.dim_specific;
    const Eigen::Index n = data.n_samples();
    const std::size_t kv = data.n_views();
    Rng rng(p.seed);

    ModelState s;
    for (std::size_t k = 0; k < kv; ++k) s.repr.specific.push_back(rng.uniform_matrix(n, ms));
    for (std::size_t k = 0; k < kv; ++k) s.repr.common_maps.push_back(rng.uniform_matrix(mc, data.view(k).cols()));
    for (std::size_t k = 0; k < kv; ++k) s.repr.specific_maps.push_back(rng.uniform_matrix(ms, data.view(k).cols()));
    for (std::size_t k = 0; k < kv; ++k) s.partition.centers.push_back(rng.uniform_matrix(ms, c));
    s.partition.centers.push_back(rng.uniform_matrix(mc, c));
    s.partition.assignment = Assignment::random(n, c, rng);
    s.partition.weights = Vector::Constant(static_cast<Eigen::Index>(kv + 1), 1.0 / static_cast<double>(kv + 1));
    s.repr.common = detail::initial_common(data, s.repr, s.partition, p, mc);
    return s;
}

/// One-step multi-view clustering with dual representations.
///
/// Each outer iteration: H; then per view S^k, W^k, P^k; then alpha for all
/// K+1 views from the current distortions; then all centers V^k; then U.
/// The 2,1 reweighting diagonals are frozen at the start of the iteration.
/// Stops when the objective changes by less than tol (or rel_tol relative)
/// or after max_iter iterations.
inline FitResult fit_omcdr(const MultiViewDataset& data, const HyperParams& p,
                           const StepObserver& observer = {}) {
    const auto start = std::chrono::steady_clock::now();
    FitResult res;
    res.state = initialize(data, p);
    ModelState& s = res.state;
    const std::size_t kv = data.n_views();
    auto notify = [&](Step step, int view) {
        if (observer) observer(step, view, s);
    };

    for (int t = 1; t <= p.max_iter; ++t) {
        const RegWeights reg = RegWeights::from(s.repr, p.row_norm_floor);
        const Vector& alpha = s.partition.weights;
        const Assignment& u = s.partition.assignment;

        s.repr.common = update_common(data, s.repr, center_pull(s.partition.centers[kv], u), alpha(kv),
                                      p.beta, p.gamma, reg.common);
        notify(Step::common, -1);
        for (std::size_t k = 0; k < kv; ++k) {
            const auto ki = static_cast<Eigen::Index>(k);
            s.repr.specific[k] = update_specific(k, data, s.repr, center_pull(s.partition.centers[k], u),
                                                 alpha(ki), p.beta, p.gamma, reg.specific[k]);
            notify(Step::specific, static_cast<int>(k));
            s.repr.common_maps[k] = update_common_map(k, data, s.repr);
            notify(Step::common_map, static_cast<int>(k));
            s.repr.specific_maps[k] = update_specific_map(k, data, s.repr);
            notify(Step::specific_map, static_cast<int>(k));
        }

        const auto reps = clustering_views(s.repr);
        s.partition.weights = update_view_weights(view_distortions(reps, s.partition.centers, u), p.delta);
        notify(Step::weights, -1);
        s.partition.centers = update_centers(reps, u, s.partition.weights);
        notify(Step::centers, -1);
        s.partition.assignment = update_assignments(reps, s.partition.centers, s.partition.weights);
        notify(Step::assignment, -1);

        detail::record(res, objective(data, s, p), s.partition.weights, p, t);
        if (detail::converged(res.objective_trace, p)) {
            res.converged = true;
            break;
        }
    }
    res.labels = s.partition.assignment.labels();
    detail::stamp(res, start);
    return res;
}

/// Ablation without specific representations:
///   min sum_k ||X^k - H W^k||^2 + gamma ||H||_21 + ||H^T - V U||^2.
/// Alternates H, W^k, V, U; the single view weight is fixed at 1.
/// Initialization draws W^k, then V, then U; H comes from one solve.
inline FitResult fit_omcdr_ns(const MultiViewDataset& data, const HyperParams& p,
                              const StepObserver& observer = {}) {
    p.validate();
    const auto start = std::chrono::steady_clock::now();
    const int c = p.clusters_for(data);
    const int mc = p.common_dim_for(data);
    const std::size_t kv = data.n_views();
    Rng rng(p.seed);

    FitResult res;
    ModelState& s = res.state;
    for (std::size_t k = 0; k < kv; ++k) s.repr.common_maps.push_back(rng.uniform_matrix(mc, data.view(k).cols()));
    s.partition.centers.push_back(rng.uniform_matrix(mc, c));
    s.partition.assignment = Assignment::random(data.n_samples(), c, rng);
    s.partition.weights = Vector::Ones(1);
    s.repr.common = detail::initial_common(data, s.repr, s.partition, p, mc);
    auto notify = [&](Step step, int view) {
        if (observer) observer(step, view, s);
    };

    for (int t = 1; t <= p.max_iter; ++t) {
        const Vector d = row_norm_reweight(s.repr.common, p.row_norm_floor);
        s.repr.common = update_common(data, s.repr, center_pull(s.partition.centers[0], s.partition.assignment),
                                      1.0, p.beta, p.gamma, d);
        notify(Step::common, -1);
        for (std::size_t k = 0; k < kv; ++k) {
            s.repr.common_maps[k] = update_common_map(k, data, s.repr);
            notify(Step::common_map, static_cast<int>(k));
        }
        const auto reps = clustering_views(s.repr);
        s.partition.centers = update_centers(reps, s.partition.assignment, s.partition.weights);
        notify(Step::centers, -1);
        s.partition.assignment = update_assignments(reps, s.partition.centers, s.partition.weights);
        notify(Step::assignment, -1);

        detail::record(res, objective(data, s, p), s.partition.weights, p, t);
        if (detail::converged(res.objective_trace, p)) {
            res.converged = true;
            break;
        }
    }
    res.labels = s.partition.assignment.labels();
    detail::stamp(res, start);
    return res;
}

/// Ablation separating representation learning from clustering: runs the
/// dual-representation updates (no clustering terms) to convergence, then
/// K-Means on [H | S^1 | ... | S^K]. The trace holds the representation
/// objective; the returned partition carries only the K-Means assignment.
inline FitResult fit_omcdr_nc(const MultiViewDataset& data, const HyperParams& p,
                              const StepObserver& observer = {}) {
    p.validate();
    const auto start = std::chrono::steady_clock::now();
    const int c = p.clusters_for(data);
    const int mc = p.common_dim_for(data);
    const int ms = p.dim_specific;
    const Eigen::Index n = data.n_samples();
    const std::size_t kv = data.n_views();
    Rng rng(p.seed);

    FitResult res;
    ModelState& s = res.state;
    for (std::size_t k = 0; k < kv; ++k) s.repr.specific.push_back(rng.uniform_matrix(n, ms));
    for (std::size_t k = 0; k < kv; ++k) s.repr.common_maps.push_back(rng.uniform_matrix(mc, data.view(k).cols()));
    for (std::size_t k = 0; k < kv; ++k) s.repr.specific_maps.push_back(rng.uniform_matrix(ms, data.view(k).cols()));
    s.repr.common = detail::initial_common(data, s.repr, s.partition, p, mc);
    auto notify = [&](Step step, int view) {
        if (observer) observer(step, view, s);
    };
    const Matrix no_pull;

    for (int t = 1; t <= p.max_iter; ++t) {
        const RegWeights reg = RegWeights::from(s.repr, p.row_norm_floor);
        s.repr.common = update_common(data, s.repr, no_pull, 0.0, p.beta, p.gamma, reg.common);
        notify(Step::common, -1);
        for (std::size_t k = 0; k < kv; ++k) {
            s.repr.specific[k] = update_specific(k, data, s.repr, no_pull, 0.0, p.beta, p.gamma, reg.specific[k]);
            notify(Step::specific, static_cast<int>(k));
            s.repr.common_maps[k] = update_common_map(k, data, s.repr);
            notify(Step::common_map, static_cast<int>(k));
            s.repr.specific_maps[k] = update_specific_map(k, data, s.repr);
            notify(Step::specific_map, static_cast<int>(k));
        }
        detail::record(res, objective(data, s, p), Vector(), p, t);
        if (detail::converged(res.objective_trace, p)) {
            res.converged = true;
            break;
        }
    }

    Matrix features(n, mc + static_cast<Eigen::Index>(kv) * ms);
    features.leftCols(mc) = s.repr.common;
    for (std::size_t k = 0; k < kv; ++k)
        features.middleCols(mc + static_cast<Eigen::Index>(k) * ms, ms) = s.repr.specific[k];
    KMeansResult km = kmeans_mf(features, c, std::max(p.max_iter, 100), p.seed);
    s.partition.assignment = km.assignment;
    res.labels = s.partition.assignment.labels();
    detail::stamp(res, start);
    return res;
}

}  // namespace omcdr
