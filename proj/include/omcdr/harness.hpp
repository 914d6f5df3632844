#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "omcdr/baselines.hpp"
#include "omcdr/io.hpp"
#include "omcdr/metrics.hpp"
#include "omcdr/solver.hpp"
#include "omcdr/stats.hpp"

namespace omcdr::harness {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Algorithm { omcdr, omcdr_ns, omcdr_nc, common_rep_kmeans, kmeans_concat };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::omcdr: return "omcdr";
        case Algorithm::omcdr_ns: return "omcdr-ns";
        case Algorithm::omcdr_nc: return "omcdr-nc";
        case Algorithm::common_rep_kmeans: return "common-rep+kmeans";
        case Algorithm::kmeans_concat: return "kmeans-concat";
    }
    return "omcdr";
}

inline Algorithm parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::omcdr, Algorithm::omcdr_ns, Algorithm::omcdr_nc, Algorithm::common_rep_kmeans,
                   Algorithm::kmeans_concat})
        if (s == to_string(a)) return a;
    throw InvalidInput("unknown algorithm '" + std::string(s) + "'");
}

/// Wraps a K-Means run in the solver's result type; the inertia trace
/// stands in for the objective trace.
inline FitResult from_kmeans(const KMeansResult& km, std::vector<double> trace) {
    FitResult res;
    res.labels = km.assignment.labels();
    res.state.partition.assignment = km.assignment;
    res.state.partition.centers.push_back(km.centers);
    res.objective_trace = std::move(trace);
    res.iterations = km.iterations;
    res.converged = km.converged;
    return res;
}

/// One fit of the chosen algorithm on already-normalized data. Baselines
/// use p.seed for their own initialization and at least 100 K-Means
/// iterations.
inline FitResult run_algorithm(const MultiViewDataset& data, Algorithm algo, const HyperParams& p) {
    switch (algo) {
        case Algorithm::omcdr: return fit_omcdr(data, p);
        case Algorithm::omcdr_ns: return fit_omcdr_ns(data, p);
        case Algorithm::omcdr_nc: return fit_omcdr_nc(data, p);
        case Algorithm::common_rep_kmeans: {
            p.validate();
            const auto start = std::chrono::steady_clock::now();
            const int c = p.clusters_for(data);
            const CommonRepResult rep = fit_common_rep(data, p.common_dim_for(data), p.max_iter, p.tol, p.seed);
            const KMeansResult km = kmeans_mf(rep.common, c, std::max(p.max_iter, 100), p.seed, KMeansInit::plus_plus);
            FitResult res = from_kmeans(km, rep.objective_trace);
            res.state.repr.common = rep.common;
            res.state.repr.common_maps = rep.common_maps;
            res.iterations = rep.iterations;
            res.converged = rep.converged;
            detail::stamp(res, start);
            return res;
        }
        case Algorithm::kmeans_concat: {
            p.validate();
            const auto start = std::chrono::steady_clock::now();
            const KMeansResult km = kmeans_mf(data.concatenated(), p.clusters_for(data), std::max(p.max_iter, 100),
                                              p.seed, KMeansInit::plus_plus);
            FitResult res = from_kmeans(km, km.inertia_trace);
            detail::stamp(res, start);
            return res;
        }
    }
    throw InvalidInput("unknown algorithm");
}

inline json params_json(const HyperParams& p) {
    return json{{"beta", p.beta},
                {"gamma", p.gamma},
                {"delta", p.delta},
                {"mc", p.dim_common},
                {"ms", p.dim_specific},
                {"max_iter", p.max_iter},
                {"tol", p.tol},
                {"seed", p.seed},
                {"normalize", std::string(to_string(p.normalization))}};
}

inline json scores_json(const metrics::Scores& s) {
    return json{{"nmi", s.nmi}, {"acc", s.acc}, {"purity", s.purity}, {"ari", s.ari}};
}

/// Result document: labels, metrics (when ground truth exists), traces,
/// iteration count and timing. Only wall_time varies between identical runs.
inline json result_json(const MultiViewDataset& data, Algorithm algo, const HyperParams& p, const FitResult& r) {
    json doc;
    doc["algorithm"] = std::string(to_string(algo));
    doc["dataset"] = data.name();
    doc["params"] = params_json(p);
    doc["labels"] = r.labels;
    if (data.labels()) doc["metrics"] = scores_json(metrics::evaluate(r.labels, *data.labels()));
    doc["objective_trace"] = r.objective_trace;
    json alpha = json::array();
    for (const auto& a : r.alpha_trace) alpha.push_back(std::vector<double>(a.data(), a.data() + a.size()));
    doc["alpha_trace"] = alpha;
    doc["iterations"] = r.iterations;
    doc["converged"] = r.converged;
    doc["warnings"] = r.warnings;
    doc["wall_time"] = r.wall_time;
    return doc;
}

/// "iteration,objective" rows for convergence plots.
inline void write_trace_csv(const fs::path& file, const std::vector<double>& trace) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << "iteration,objective\n";
    for (std::size_t t = 0; t < trace.size(); ++t) out << t + 1 << ',' << io::format_double(trace[t]) << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

inline void write_json(const fs::path& file, const json& doc) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

/// Hyperparameter lists; every combination is one grid point.
struct GridSpec {
    std::vector<double> beta{1.0};
    std::vector<double> gamma{1.0};
    std::vector<double> delta{1.0};
    std::vector<int> mc{0};
    std::vector<int> ms{50};
    int repeats = 1;
    std::uint64_t base_seed = 0;
    HyperParams base;  // everything not varied by the grid

    void validate() const {
        if (beta.empty() || gamma.empty() || delta.empty() || mc.empty() || ms.empty())
            throw InvalidInput("every grid list must be non-empty");
        if (repeats < 1) throw InvalidInput("repeats must be at least 1");
    }

    /// Grid points in nested order beta, gamma, delta, m_c, m_s (m_s fastest).
    std::vector<HyperParams> points() const {
        validate();
        std::vector<HyperParams> out;
        for (double b : beta)
            for (double g : gamma)
                for (double d : delta)
                    for (int c : mc)
                        for (int s : ms) {
                            HyperParams p = base;
                            p.beta = b;
                            p.gamma = g;
                            p.delta = d;
                            p.dim_common = c;
                            p.dim_specific = s;
                            p.validate();
                            out.push_back(p);
                        }
        return out;
    }
};

struct RunRecord {
    std::size_t point = 0;
    int repeat = 0;
    HyperParams params;  // seed = base_seed + repeat
    std::optional<FitResult> result;
    std::optional<metrics::Scores> scores;
    std::string error;
};

/// Runs fn(0..count-1) on up to jobs threads. Each index is written by
/// exactly one worker, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

/// Every grid point x repeat, in (point, repeat) order. Failed runs keep
/// their error message instead of aborting the grid.
inline std::vector<RunRecord> run_grid(const MultiViewDataset& data, Algorithm algo, const GridSpec& spec,
                                       int jobs) {
    const auto points = spec.points();
    std::vector<RunRecord> runs;
    for (std::size_t g = 0; g < points.size(); ++g)
        for (int r = 0; r < spec.repeats; ++r) {
            RunRecord rec;
            rec.point = g;
            rec.repeat = r;
            rec.params = points[g];
            rec.params.seed = spec.base_seed + static_cast<std::uint64_t>(r);
            runs.push_back(std::move(rec));
        }
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        RunRecord& rec = runs[i];
        try {
            rec.result = run_algorithm(data, algo, rec.params);
            if (data.labels()) rec.scores = metrics::evaluate(rec.result->labels, *data.labels());
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
    });
    return runs;
}

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
inline MeanStd mean_std(const std::vector<double>& v) {
    MeanStd out;
    if (v.empty()) return out;
    double sum = 0.0;
    for (double x : v) sum += x;
    out.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return out;
}

inline constexpr std::array<std::string_view, 4> kMetricNames{"nmi", "acc", "purity", "ari"};

inline double metric_value(const metrics::Scores& s, std::size_t m) {
    switch (m) {
        case 0: return s.nmi;
        case 1: return s.acc;
        case 2: return s.purity;
        default: return s.ari;
    }
}

struct PointSummary {
    std::size_t point = 0;
    HyperParams params;
    int runs = 0;
    int failures = 0;
    std::array<MeanStd, 4> metrics;  // in kMetricNames order
};

inline std::vector<PointSummary> summarize(const std::vector<RunRecord>& runs) {
    std::vector<PointSummary> out;
    for (const auto& rec : runs) {
        if (out.empty() || out.back().point != rec.point) {
            out.emplace_back();
            out.back().point = rec.point;
            out.back().params = rec.params;
        }
        ++out.back().runs;
        if (!rec.result) ++out.back().failures;
    }
    for (auto& s : out)
        for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
            std::vector<double> values;
            for (const auto& rec : runs)
                if (rec.point == s.point && rec.scores) values.push_back(metric_value(*rec.scores, m));
            s.metrics[m] = mean_std(values);
        }
    return out;
}

/// Index (into summaries) of the point with the highest mean for metric m,
/// first one on ties; nullopt when no point has a score.
inline std::optional<std::size_t> best_point(const std::vector<PointSummary>& s, std::size_t m) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s[i].metrics[m].mean;
        if (std::isnan(v)) continue;
        if (!best || v > s[*best].metrics[m].mean) best = i;
    }
    return best;
}

/// Aggregate table: one "point" row per grid point, then one "best_<metric>"
/// row per metric repeating the winning point.
inline std::string summary_csv(const std::vector<PointSummary>& s) {
    std::ostringstream out;
    out << "row,point,beta,gamma,delta,mc,ms,runs,failures";
    for (auto name : kMetricNames) out << ',' << name << "_mean," << name << "_std";
    out << '\n';
    auto line = [&](std::string_view kind, const PointSummary& p) {
        out << kind << ',' << p.point << ',' << io::format_double(p.params.beta) << ','
            << io::format_double(p.params.gamma) << ',' << io::format_double(p.params.delta) << ','
            << p.params.dim_common << ',' << p.params.dim_specific << ',' << p.runs << ',' << p.failures;
        for (const auto& ms : p.metrics) {
            out << ',' << (std::isnan(ms.mean) ? std::string() : io::format_double(ms.mean));
            out << ',' << (std::isnan(ms.std) ? std::string() : io::format_double(ms.std));
        }
        out << '\n';
    };
    for (const auto& p : s) line("point", p);
    for (std::size_t m = 0; m < kMetricNames.size(); ++m)
        if (auto b = best_point(s, m)) line("best_" + std::string(kMetricNames[m]), s[*b]);
    return out.str();
}

/// Score table: first row "<label>,dataset1,...", then "algorithm,score,...".
inline stats::ScoreMatrix read_score_csv(const fs::path& file) {
    const auto lines = io::read_lines(file);
    if (lines.size() < 2) throw InvalidInput("score table " + file.string() + " needs a header and rows");
    stats::ScoreMatrix m;
    const auto header = io::split(lines.front());
    for (std::size_t j = 1; j < header.size(); ++j) m.datasets.push_back(io::trim(header[j]));
    m.scores.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(m.datasets.size()));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = io::split(lines[i]);
        if (cells.size() != header.size())
            throw InvalidInput("row " + std::to_string(i + 1) + " of " + file.string() + " has " +
                               std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
        m.algorithms.push_back(io::trim(cells[0]));
        for (std::size_t j = 1; j < cells.size(); ++j)
            m.scores(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                io::parse_number(cells[j], file, i, j);
    }
    m.validate();
    return m;
}

/// Average-rank table: "algorithm,rank" per line; a non-numeric first line
/// is treated as a header.
inline std::pair<std::vector<std::string>, std::vector<double>> read_rank_csv(const fs::path& file) {
    const auto lines = io::read_lines(file);
    std::vector<std::string> names;
    std::vector<double> ranks;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cells = io::split(lines[i]);
        if (cells.size() != 2) throw InvalidInput("rank table " + file.string() + " needs two columns per row");
        if (i == 0) {
            try {
                io::parse_number(cells[1], file, i, 1);
            } catch (const InvalidInput&) {
                continue;
            }
        }
        names.push_back(io::trim(cells[0]));
        ranks.push_back(io::parse_number(cells[1], file, i, 1));
    }
    if (names.size() < 2) throw InvalidInput("rank table " + file.string() + " needs at least two algorithms");
    return {names, ranks};
}

struct StatsReport {
    stats::FriedmanResult friedman;
    std::vector<std::string> algorithms;
    std::vector<stats::HolmRow> holm;
    std::string control;
    double alpha = 0.05;

    json to_json() const {
        json doc;
        doc["friedman"] = {{"statistic", friedman.statistic},
                           {"df", static_cast<int>(algorithms.size()) - 1},
                           {"p_value", friedman.p_value},
                           {"n_datasets", friedman.n_datasets}};
        json ranks = json::object();
        for (std::size_t i = 0; i < algorithms.size(); ++i) ranks[algorithms[i]] = friedman.average_ranks[i];
        doc["average_ranks"] = ranks;
        doc["control"] = control;
        doc["alpha"] = alpha;
        json rows = json::array();
        for (const auto& r : holm)
            rows.push_back({{"i", r.index},
                            {"algorithm", r.algorithm},
                            {"z", r.z},
                            {"p_value", r.p_value},
                            {"threshold", r.threshold},
                            {"rejected", r.rejected}});
        doc["holm"] = rows;
        return doc;
    }

    /// Friedman summary followed by the Holm table (i, comparison, z, p,
    /// alpha/i, hypothesis).
    std::string to_text() const {
        std::ostringstream out;
        out << std::setprecision(6);
        out << "Friedman test: chi2 = " << friedman.statistic << ", df = " << algorithms.size() - 1
            << ", p = " << friedman.p_value << " (n = " << friedman.n_datasets << ")\n";
        out << "Average ranks:\n";
        for (std::size_t i = 0; i < algorithms.size(); ++i)
            out << "  " << std::left << std::setw(24) << algorithms[i] << std::right << std::fixed
                << std::setprecision(4) << friedman.average_ranks[i] << std::defaultfloat << std::setprecision(6)
                << '\n';
        out << "Holm post-hoc (control " << control << ", alpha = " << alpha << "):\n";
        out << std::left << std::setw(4) << "i" << std::setw(32) << "algorithm" << std::setw(12) << "z"
            << std::setw(12) << "p" << std::setw(12) << "alpha/i" << "hypothesis\n";
        for (const auto& r : holm) {
            out << std::left << std::setw(4) << r.index << std::setw(32) << (r.algorithm + " / " + r.control)
                << std::fixed << std::setprecision(6) << std::setw(12) << r.z << std::setw(12) << r.p_value
                << std::setw(12) << r.threshold << std::defaultfloat << (r.rejected ? "rejected" : "not rejected")
                << '\n';
        }
        return out.str();
    }
};

inline StatsReport stats_from_ranks(std::vector<std::string> names, std::vector<double> ranks, int n_datasets,
                                    const std::string& control, double alpha) {
    StatsReport rep;
    rep.friedman = stats::friedman_from_ranks(ranks, n_datasets);
    rep.holm = stats::holm_posthoc(ranks, names, control, n_datasets, alpha);
    rep.algorithms = std::move(names);
    rep.control = control;
    rep.alpha = alpha;
    return rep;
}

inline StatsReport stats_from_scores(const stats::ScoreMatrix& m, const std::string& control, double alpha) {
    StatsReport rep;
    rep.friedman = stats::friedman_test(m);
    rep.holm = stats::holm_posthoc(rep.friedman.average_ranks, m.algorithms, control, rep.friedman.n_datasets, alpha);
    rep.algorithms = m.algorithms;
    rep.control = control;
    rep.alpha = alpha;
    return rep;
}

}  // namespace omcdr::harness
