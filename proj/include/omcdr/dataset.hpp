#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "omcdr/common.hpp"

namespace omcdr {

enum class Normalization { none, minmax, zscore };

inline std::string_view to_string(Normalization n) {
    switch (n) {
        case Normalization::none: return "none";
        case Normalization::minmax: return "minmax";
        case Normalization::zscore: return "zscore";
    }
    return "none";
}

inline Normalization parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "minmax") return Normalization::minmax;
    if (s == "zscore") return Normalization::zscore;
    throw InvalidInput("unknown normalization scheme '" + std::string(s) + "'");
}

/// Maps arbitrary class identifiers to 0..C-1 in order of first appearance.
inline std::vector<int> encode_labels(const std::vector<std::string>& raw,
                                      std::vector<std::string>* names = nullptr) {
    std::unordered_map<std::string, int> ids;
    std::vector<int> out;
    out.reserve(raw.size());
    for (const auto& r : raw) {
        auto [it, inserted] = ids.emplace(r, static_cast<int>(ids.size()));
        if (inserted && names) names->push_back(r);
        out.push_back(it->second);
    }
    return out;
}

/// Number of distinct values in a 0-based dense label vector.
inline int count_classes(const std::vector<int>& labels) {
    int c = 0;
    for (int l : labels) c = std::max(c, l + 1);
    return c;
}

/// K views over the same N samples plus optional ground truth.
///
/// Constructed only through make(), which enforces: K >= 1, N >= 2, every
/// view has N rows and at least one column, all entries finite, and labels
/// (if present) are N dense ids with C = distinct count.
class MultiViewDataset {
public:
    static MultiViewDataset make(std::vector<Matrix> views,
                                 std::optional<std::vector<int>> labels = std::nullopt,
                                 std::optional<int> n_classes = std::nullopt,
                                 std::string name = {}) {
        if (views.empty()) throw InvalidInput("dataset needs at least one view");
        const Eigen::Index n = views.front().rows();
        if (n < 2) throw InvalidInput("dataset needs at least two samples");
        for (std::size_t k = 0; k < views.size(); ++k) {
            if (views[k].rows() != n)
                throw InvalidInput("row-count mismatch: view " + std::to_string(k) + " has " +
                                   std::to_string(views[k].rows()) + " rows, expected " +
                                   std::to_string(n));
            if (views[k].cols() < 1) throw InvalidInput("empty view " + std::to_string(k));
            if (!views[k].allFinite())
                throw InvalidInput("view " + std::to_string(k) + " contains non-finite entries");
        }
        MultiViewDataset d;
        d.views_ = std::move(views);
        d.name_ = std::move(name);
        if (labels) {
            if (static_cast<Eigen::Index>(labels->size()) != n)
                throw InvalidInput("label count " + std::to_string(labels->size()) +
                                   " does not match " + std::to_string(n) + " samples");
            std::vector<std::string> raw;
            raw.reserve(labels->size());
            for (int l : *labels) raw.push_back(std::to_string(l));
            d.labels_ = encode_labels(raw);
            d.n_classes_ = count_classes(*d.labels_);
            if (n_classes && *n_classes != d.n_classes_)
                throw InvalidInput("declared class count disagrees with labels");
        } else if (n_classes) {
            if (*n_classes < 1 || *n_classes > n) throw InvalidInput("class count out of range");
            d.n_classes_ = *n_classes;
        }
        return d;
    }

    const std::vector<Matrix>& views() const { return views_; }
    const Matrix& view(std::size_t k) const { return views_.at(k); }
    const std::optional<std::vector<int>>& labels() const { return labels_; }
    Eigen::Index n_samples() const { return views_.front().rows(); }
    std::size_t n_views() const { return views_.size(); }
    /// 0 when neither labels nor a class count were supplied.
    int n_classes() const { return n_classes_; }
    const std::string& name() const { return name_; }

    std::vector<Eigen::Index> dims() const {
        std::vector<Eigen::Index> out;
        for (const auto& v : views_) out.push_back(v.cols());
        return out;
    }

    /// Column-wise concatenation of all views (N x sum d^k).
    Matrix concatenated() const {
        Eigen::Index total = 0;
        for (const auto& v : views_) total += v.cols();
        Matrix out(n_samples(), total);
        Eigen::Index off = 0;
        for (const auto& v : views_) {
            out.middleCols(off, v.cols()) = v;
            off += v.cols();
        }
        return out;
    }

private:
    MultiViewDataset() = default;

    std::vector<Matrix> views_;
    std::optional<std::vector<int>> labels_;
    int n_classes_ = 0;
    std::string name_;
};

/// Per-feature normalization. Constant columns map to zero under both
/// non-trivial schemes.
inline Matrix normalize_matrix(const Matrix& x, Normalization scheme) {
    if (scheme == Normalization::none) return x;
    Matrix out(x.rows(), x.cols());
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        if (scheme == Normalization::minmax) {
            const double lo = col.minCoeff();
            const double span = col.maxCoeff() - lo;
            if (span > 0.0)
                out.col(j) = (col.array() - lo) / span;
            else
                out.col(j).setZero();
        } else {
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() / n);
            if (sd > 0.0 && col.maxCoeff() > col.minCoeff())
                out.col(j) = (col.array() - mean) / sd;
            else
                out.col(j).setZero();
        }
    }
    return out;
}

inline MultiViewDataset normalize_views(const MultiViewDataset& data, Normalization scheme) {
    if (scheme == Normalization::none) return data;
    std::vector<Matrix> views;
    views.reserve(data.n_views());
    for (const auto& v : data.views()) views.push_back(normalize_matrix(v, scheme));
    return MultiViewDataset::make(std::move(views), data.labels(),
                                  data.n_classes() > 0 ? std::optional<int>(data.n_classes())
                                                       : std::nullopt,
                                  data.name());
}

}  // namespace omcdr
