#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "omcdr/common.hpp"

namespace omcdr::stats {

/// Algorithms x datasets table of scores; higher is better.
struct ScoreMatrix {
    Matrix scores;
    std::vector<std::string> algorithms;
    std::vector<std::string> datasets;

    void validate() const {
        if (scores.rows() < 2 || scores.cols() < 2)
            throw InvalidInput("score matrix needs at least 2 algorithms and 2 datasets");
        if (static_cast<Eigen::Index>(algorithms.size()) != scores.rows() ||
            static_cast<Eigen::Index>(datasets.size()) != scores.cols())
            throw InvalidInput("score matrix names do not match its shape");
        if (!scores.allFinite()) throw InvalidInput("score matrix has missing or non-finite entries");
    }
};

/// Regularized upper incomplete gamma Q(a, x): series for x < a + 1,
/// Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw InvalidInput("gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    constexpr double eps = 1e-15;
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
    }
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::exp(log_prefix) * h;
}

/// P(X > x) for X ~ chi-square with dof degrees of freedom.
inline double chi_square_sf(double x, double dof) { return gamma_q(0.5 * dof, 0.5 * x); }

/// P(Z > z) for a standard normal Z.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Ranks of values where the largest gets rank 1; ties share the average rank.
inline std::vector<double> descending_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

struct FriedmanResult {
    std::vector<double> average_ranks;
    double statistic = 0.0;
    double p_value = 1.0;
    int n_datasets = 0;
};

/// Friedman chi-square from average ranks over n datasets:
/// 12n / (k(k+1)) * (sum R_j^2 - k(k+1)^2 / 4), k-1 degrees of freedom.
inline FriedmanResult friedman_from_ranks(std::vector<double> average_ranks, int n_datasets) {
    const double k = static_cast<double>(average_ranks.size());
    if (average_ranks.size() < 2 || n_datasets < 2) throw InvalidInput("Friedman test needs >= 2 algorithms and datasets");
    double sum_sq = 0.0;
    for (double r : average_ranks) sum_sq += r * r;
    FriedmanResult res;
    res.statistic = std::max(0.0, 12.0 * n_datasets / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0));
    res.p_value = chi_square_sf(res.statistic, k - 1.0);
    res.average_ranks = std::move(average_ranks);
    res.n_datasets = n_datasets;
    return res;
}

inline FriedmanResult friedman_test(const ScoreMatrix& m) {
    m.validate();
    const auto k = static_cast<std::size_t>(m.scores.rows());
    std::vector<double> avg(k, 0.0);
    for (Eigen::Index d = 0; d < m.scores.cols(); ++d) {
        std::vector<double> col(k);
        for (std::size_t a = 0; a < k; ++a) col[a] = m.scores(static_cast<Eigen::Index>(a), d);
        const auto r = descending_ranks(col);
        for (std::size_t a = 0; a < k; ++a) avg[a] += r[a];
    }
    for (auto& r : avg) r /= static_cast<double>(m.scores.cols());
    return friedman_from_ranks(std::move(avg), static_cast<int>(m.scores.cols()));
}

struct HolmRow {
    int index = 0;  // i in the alpha / i threshold
    std::string algorithm;
    std::string control;
    double z = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;
    bool rejected = false;
};

/// Holm step-down comparison of every algorithm against a control.
///
/// z = (R_other - R_control) / sqrt(k(k+1)/(6n)) with a two-sided normal
/// p-value. Rows come back sorted by ascending p; row m (of m) gets index m
/// and threshold alpha/m, the last gets alpha/1. Once one hypothesis is
/// retained, every later one is retained too.
inline std::vector<HolmRow> holm_posthoc(const std::vector<double>& average_ranks,
                                         const std::vector<std::string>& names, const std::string& control,
                                         int n_datasets, double alpha = 0.05) {
    if (names.size() != average_ranks.size()) throw InvalidInput("one name per rank required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
    if (n_datasets < 1) throw InvalidInput("n_datasets must be positive");
    const auto it = std::find(names.begin(), names.end(), control);
    if (it == names.end()) throw InvalidInput("control algorithm '" + control + "' not found");
    const std::size_t ci = static_cast<std::size_t>(it - names.begin());
    const double k = static_cast<double>(average_ranks.size());
    const double se = std::sqrt(k * (k + 1.0) / (6.0 * n_datasets));

    std::vector<HolmRow> rows;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i == ci) continue;
        HolmRow r;
        r.algorithm = names[i];
        r.control = control;
        r.z = (average_ranks[i] - average_ranks[ci]) / se;
        r.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(r.z)));
        rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const HolmRow& a, const HolmRow& b) { return a.p_value < b.p_value; });
    const int m = static_cast<int>(rows.size());
    bool still_rejecting = true;
    for (int j = 0; j < m; ++j) {
        rows[j].index = m - j;
        rows[j].threshold = alpha / rows[j].index;
        still_rejecting = still_rejecting && rows[j].p_value < rows[j].threshold;
        rows[j].rejected = still_rejecting;
    }
    return rows;
}

}  // namespace omcdr::stats
