#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "omcdr/common.hpp"

namespace omcdr::metrics {

/// Counts of (predicted cluster, true class) pairs with marginals.
class ContingencyTable {
public:
    template <class A, class B>
    ContingencyTable(const std::vector<A>& pred, const std::vector<B>& truth) {
        if (pred.size() != truth.size())
            throw InvalidInput("label length mismatch: " + std::to_string(pred.size()) + " vs " +
                               std::to_string(truth.size()));
        if (pred.empty()) throw InvalidInput("labels must not be empty");
        const auto p = dense(pred);
        const auto t = dense(truth);
        rows_ = 1 + *std::max_element(p.begin(), p.end());
        cols_ = 1 + *std::max_element(t.begin(), t.end());
        counts_.assign(rows_ * cols_, 0);
        row_sums_.assign(rows_, 0);
        col_sums_.assign(cols_, 0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            ++counts_[p[i] * cols_ + t[i]];
            ++row_sums_[p[i]];
            ++col_sums_[t[i]];
        }
        total_ = pred.size();
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t operator()(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
    std::size_t row_sum(std::size_t r) const { return row_sums_[r]; }
    std::size_t col_sum(std::size_t c) const { return col_sums_[c]; }
    std::size_t total() const { return total_; }

private:
    template <class L>
    static std::vector<std::size_t> dense(const std::vector<L>& labels) {
        std::map<L, std::size_t> ids;
        std::vector<std::size_t> out;
        out.reserve(labels.size());
        for (const auto& l : labels) out.push_back(ids.emplace(l, ids.size()).first->second);
        return out;
    }

    std::size_t rows_ = 0, cols_ = 0, total_ = 0;
    std::vector<std::size_t> counts_, row_sums_, col_sums_;
};

namespace detail {

inline double entropy(const std::vector<std::size_t>& sizes, double n) {
    double h = 0.0;
    for (auto s : sizes)
        if (s > 0) {
            const double p = static_cast<double>(s) / n;
            h -= p * std::log(p);
        }
    return h;
}

inline double choose2(std::size_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x ? x - 1 : 0); }

}  // namespace detail

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)). Returns the column assigned to each row.
inline std::vector<int> hungarian(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != cost.rows()) throw InvalidInput("hungarian: cost matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n);
    for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

/// Normalized mutual information, I / sqrt(H_pred H_truth), natural log.
/// A single-cluster labeling scores 0 unless both are single-cluster.
inline double nmi(const ContingencyTable& t) {
    const double n = static_cast<double>(t.total());
    std::vector<std::size_t> rs(t.rows()), cs(t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r) rs[r] = t.row_sum(r);
    for (std::size_t c = 0; c < t.cols(); ++c) cs[c] = t.col_sum(c);
    const double hp = detail::entropy(rs, n);
    const double ht = detail::entropy(cs, n);
    if (t.rows() == 1 || t.cols() == 1) return (t.rows() == 1 && t.cols() == 1) ? 1.0 : 0.0;
    double mi = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) {
            const double nij = static_cast<double>(t(r, c));
            if (nij > 0) mi += nij / n * std::log(n * nij / (static_cast<double>(rs[r]) * static_cast<double>(cs[c])));
        }
    return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

/// Best one-to-one cluster-to-class matching accuracy.
inline double accuracy(const ContingencyTable& t) {
    const auto size = static_cast<Eigen::Index>(std::max(t.rows(), t.cols()));
    Matrix cost = Matrix::Zero(size, size);
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c)
            cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = -static_cast<double>(t(r, c));
    const auto match = hungarian(cost);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        if (static_cast<std::size_t>(match[r]) < t.cols()) hits += t(r, static_cast<std::size_t>(match[r]));
    return static_cast<double>(hits) / static_cast<double>(t.total());
}

inline double purity(const ContingencyTable& t) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 0; c < t.cols(); ++c) best = std::max(best, t(r, c));
        hits += best;
    }
    return static_cast<double>(hits) / static_cast<double>(t.total());
}

/// Adjusted Rand index from pair counts. When the expected and maximum
/// indices coincide (both labelings trivial) the value is 1 for identical
/// partitions and 0 otherwise.
inline double ari(const ContingencyTable& t) {
    if (t.total() < 2) throw InvalidInput("ARI needs at least two samples");
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) index += detail::choose2(t(r, c));
    for (std::size_t r = 0; r < t.rows(); ++r) sum_rows += detail::choose2(t.row_sum(r));
    for (std::size_t c = 0; c < t.cols(); ++c) sum_cols += detail::choose2(t.col_sum(c));
    const double expected = sum_rows * sum_cols / detail::choose2(t.total());
    const double max_index = 0.5 * (sum_rows + sum_cols);
    const double denom = max_index - expected;
    if (std::abs(denom) < 1e-12) return (index == sum_rows && index == sum_cols) ? 1.0 : 0.0;
    return (index - expected) / denom;
}

template <class A, class B>
double nmi(const std::vector<A>& pred, const std::vector<B>& truth) { return nmi(ContingencyTable(pred, truth)); }
template <class A, class B>
double accuracy(const std::vector<A>& pred, const std::vector<B>& truth) { return accuracy(ContingencyTable(pred, truth)); }
template <class A, class B>
double purity(const std::vector<A>& pred, const std::vector<B>& truth) { return purity(ContingencyTable(pred, truth)); }
template <class A, class B>
double ari(const std::vector<A>& pred, const std::vector<B>& truth) { return ari(ContingencyTable(pred, truth)); }

struct Scores {
    double nmi = 0.0;
    double acc = 0.0;
    double purity = 0.0;
    double ari = 0.0;
};

template <class A, class B>
Scores evaluate(const std::vector<A>& pred, const std::vector<B>& truth) {
    const ContingencyTable t(pred, truth);
    return Scores{nmi(t), accuracy(t), purity(t), ari(t)};
}

}  // namespace omcdr::metrics
