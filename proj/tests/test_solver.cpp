#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "oracles.hpp"
#include "omcdr/metrics.hpp"
#include "omcdr/solver.hpp"
#include "omcdr/synthetic.hpp"

using namespace omcdr;

namespace {

HyperParams small_params(std::uint64_t seed, int c = 3) {
    HyperParams p;
    p.n_clusters = c;
    p.dim_specific = 3;
    p.dim_common = 2;
    p.max_iter = 15;
    p.seed = seed;
    return p;
}

MultiViewDataset planted(std::uint64_t seed, bool specific = false) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.specific_structure = specific;
    return normalize_views(synthesize_multiview(spec).dataset, Normalization::zscore);
}

HyperParams planted_params(std::uint64_t seed) {
    HyperParams p;
    p.beta = 10.0;
    p.gamma = 10.0;
    p.delta = 1.0;
    p.dim_specific = 5;
    p.seed = seed;
    return p;
}

double rel_increase(double before, double after) { return (after - before) / std::max(1.0, std::abs(before)); }

}  // namespace

TEST(Objective, AllZeroStateLeavesOnlyEntropy) {
    const auto data = MultiViewDataset::make({Matrix::Zero(4, 3), Matrix::Zero(4, 2)});
    ModelState s;
    s.repr.common = Matrix::Zero(4, 2);
    for (int d : {3, 2}) {
        s.repr.specific.push_back(Matrix::Zero(4, 2));
        s.repr.common_maps.push_back(Matrix::Zero(2, d));
        s.repr.specific_maps.push_back(Matrix::Zero(2, d));
        s.partition.centers.push_back(Matrix::Zero(2, 2));
    }
    s.partition.centers.push_back(Matrix::Zero(2, 2));
    s.partition.assignment = Assignment({0, 1, 0, 1}, 2);
    s.partition.weights = Vector::Constant(3, 1.0 / 3.0);
    HyperParams p;
    p.delta = 2.0;
    EXPECT_NEAR(objective(data, s, p), -2.0 * std::log(3.0), 1e-14);
}

TEST(Objective, MatchingCentersWithZeroRegularizers) {
    Rng rng(1);
    const auto data = MultiViewDataset::make({Matrix::Zero(3, 2)});
    ModelState s;
    s.repr.common = Matrix::Zero(3, 1);
    s.repr.common_maps.push_back(Matrix::Zero(1, 2));
    s.repr.specific.push_back(Matrix::Zero(3, 2));
    s.repr.specific_maps.push_back(Matrix::Zero(2, 2));
    s.partition.centers = {Matrix::Zero(2, 1), Matrix::Zero(1, 1)};
    s.partition.assignment = Assignment({0, 0, 0}, 1);
    s.partition.weights = Vector::Constant(2, 0.5);
    HyperParams p;
    p.delta = 1.0;
    const auto t = objective_terms(data, s, p);
    EXPECT_EQ(t.reconstruction + t.sparsity + t.redundancy + t.clustering, 0.0);
    EXPECT_NEAR(t.entropy, -std::log(2.0), 1e-15);
}

TEST(Objective, MatchesTermByTermOracle) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const auto data = oracle::random_dataset(rng, 11, {4, 5, 3});
        HyperParams p = small_params(seed);
        p.beta = 0.3;
        p.gamma = 1.7;
        p.delta = 0.9;
        ModelState s = initialize(data, p);
        s.partition.weights = update_view_weights(rng.uniform_matrix(4, 1).col(0), 1.0);
        EXPECT_NEAR(objective(data, s, p), oracle::objective(data, s, p), 1e-9 * std::abs(oracle::objective(data, s, p)));
    }
}

TEST(Initialize, UniformWeightsValidAssignmentAndDeterminism) {
    Rng rng(2);
    const auto data = oracle::random_dataset(rng, 10, {4, 6});
    const HyperParams p = small_params(9);
    const ModelState a = initialize(data, p);
    EXPECT_EQ(a.partition.weights, Vector::Constant(3, 1.0 / 3.0));
    for (auto sz : a.partition.assignment.cluster_sizes()) EXPECT_GT(sz, 0);
    for (const Matrix& w : a.repr.common_maps) EXPECT_TRUE((w.array() >= 0.0).all() && (w.array() < 1.0).all());
    const ModelState b = initialize(data, p);
    EXPECT_EQ(a.repr.common, b.repr.common);
    EXPECT_EQ(a.partition.assignment, b.partition.assignment);
    EXPECT_EQ(a.partition.centers.back(), b.partition.centers.back());
}

TEST(Initialize, RejectsMoreClustersThanSamples) {
    Rng rng(3);
    const auto data = oracle::random_dataset(rng, 4, {3});
    EXPECT_THROW(initialize(data, small_params(0, 5)), InvalidInput);
    HyperParams p = small_params(0, 0);  // no labels and no explicit C
    EXPECT_THROW(initialize(data, p), InvalidInput);
}

TEST(HyperParams, Validation) {
    HyperParams p;
    p.beta = 0.0;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = HyperParams{};
    p.delta = std::numeric_limits<double>::infinity();
    EXPECT_THROW(p.validate(), InvalidInput);
    p = HyperParams{};
    p.max_iter = 0;
    EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(FitOmcdr, ExactMinimizerSubStepsNeverIncreaseObjective) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(100 + seed);
        const auto data = oracle::random_dataset(rng, 25, {5, 7});
        const HyperParams p = small_params(seed);
        double last = std::numeric_limits<double>::quiet_NaN();
        double worst_exact = -1.0;
        fit_omcdr(data, p, [&](Step step, int, const ModelState& s) {
            const double now = objective(data, s, p);
            const bool exact = step != Step::common && step != Step::specific;
            if (exact && !std::isnan(last)) worst_exact = std::max(worst_exact, rel_increase(last, now));
            last = now;
        });
        EXPECT_LE(worst_exact, 1e-9) << "seed " << seed;
    }
}

TEST(FitOmcdr, ResultInvariantsAndDeterminism) {
    const auto data = planted(3);
    HyperParams p = planted_params(4);
    p.max_iter = 20;
    const FitResult a = fit_omcdr(data, p);
    EXPECT_EQ(a.objective_trace.size(), static_cast<std::size_t>(a.iterations));
    EXPECT_EQ(a.alpha_trace.size(), a.objective_trace.size());
    for (int l : a.labels) EXPECT_TRUE(l >= 0 && l < 3);
    EXPECT_EQ(a.labels, a.state.partition.assignment.labels());
    const FitResult b = fit_omcdr(data, p);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
    EXPECT_EQ(a.state.repr.common, b.state.repr.common);
}

TEST(FitOmcdr, TraceIsMonotoneWithinSlackOnSyntheticData) {
    const auto data = planted(1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        HyperParams p = planted_params(seed);
        p.max_iter = 40;
        const FitResult r = fit_omcdr(data, p);
        for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
            EXPECT_LE(r.objective_trace[t], r.objective_trace[t - 1] + 1e-6 * std::abs(r.objective_trace[t - 1]))
                << "seed " << seed << " iteration " << t + 1;
    }
}

TEST(FitOmcdr, StopsWhenObjectiveChangeFallsBelowTolerance) {
    const auto data = planted(2);
    HyperParams p = planted_params(0);
    p.tol = 1e12;  // loose: must stop on the second iteration
    const FitResult r = fit_omcdr(data, p);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 2);
}

TEST(FitOmcdr, NonFiniteObjectiveAborts) {
    Rng rng(5);
    const auto data = MultiViewDataset::make({rng.uniform_matrix(8, 3) * 1e300});
    EXPECT_THROW(fit_omcdr(data, small_params(0, 2)), NumericalError);
}

TEST(FitOmcdrNs, HasNoSpecificPartAndMonotoneTrace) {
    const auto data = planted(1);
    HyperParams p = planted_params(2);
    p.max_iter = 30;
    const FitResult r = fit_omcdr_ns(data, p);
    EXPECT_TRUE(r.state.repr.specific.empty());
    EXPECT_TRUE(r.state.repr.specific_maps.empty());
    EXPECT_EQ(r.state.partition.weights, Vector::Ones(1));
    for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
        EXPECT_LE(r.objective_trace[t], r.objective_trace[t - 1] + 1e-6 * std::abs(r.objective_trace[t - 1]));
}

TEST(FitOmcdrNs, CloseToFullModelWhenSignalIsShared) {
    const auto syn = synthesize_multiview([] {
        SyntheticSpec s;
        s.seed = 1;
        return s;
    }());
    const auto data = normalize_views(syn.dataset, Normalization::zscore);
    double full = 0.0, ns = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        full += metrics::nmi(fit_omcdr(data, planted_params(seed)).labels, syn.labels) / 10.0;
        ns += metrics::nmi(fit_omcdr_ns(data, planted_params(seed)).labels, syn.labels) / 10.0;
    }
    EXPECT_NEAR(ns, full, 0.05);
}

TEST(FitOmcdrNc, RepresentationPhaseIsMonotone) {
    const auto data = planted(4, true);
    HyperParams p = planted_params(1);
    p.max_iter = 30;
    const FitResult r = fit_omcdr_nc(data, p);
    for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
        EXPECT_LE(r.objective_trace[t], r.objective_trace[t - 1] + 1e-6 * std::abs(r.objective_trace[t - 1]));
    EXPECT_EQ(r.labels.size(), 300u);
    EXPECT_TRUE(r.state.partition.centers.empty());
}

TEST(FitOmcdrNc, SingleViewFactorizationNearTruncatedSvd) {
    Rng rng(6);
    const auto data = oracle::random_dataset(rng, 40, {10});
    HyperParams p;
    p.n_clusters = 3;
    p.dim_common = 2;
    p.dim_specific = 3;
    p.beta = 1e-12;  // beta must be positive; this makes the redundancy term negligible
    p.gamma = 1e-6;
    p.max_iter = 300;
    p.tol = 1e-12;
    const FitResult r = fit_omcdr_nc(data, p);
    const double err = reconstruction_error(data, r.state.repr);
    Eigen::JacobiSVD<Matrix> svd(data.view(0));
    const Vector sv = svd.singularValues();
    const double bound = sv.tail(sv.size() - 5).squaredNorm();
    EXPECT_LE(err, 1.1 * bound);
}
