#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "omcdr/harness.hpp"
#include "omcdr/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace omcdr;
using nlohmann::json;

constexpr int kRunFailure = 1;
constexpr int kUsageError = 2;

struct Shared {
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string normalize = "zscore";
};

struct FitFlags {
    std::string algo = "omcdr";
    std::vector<double> beta{1.0}, gamma{1.0}, delta{1.0};
    std::vector<int> mc{0}, ms{50};
    int clusters = 0;
    int max_iter = 100;
    double tol = 1e-6;
    int repeats = 1;
};

void add_shared(CLI::App* cmd, Shared& s, bool with_data = true) {
    if (with_data) cmd->add_option("--data", s.data, "dataset manifest (JSON)")->required();
    cmd->add_option("--out", s.out, "output path");
    cmd->add_option("--seed", s.seed, "base random seed");
    cmd->add_option("--jobs", s.jobs, "parallel runs")->check(CLI::PositiveNumber);
    cmd->add_option("--normalize", s.normalize, "per-feature scaling")
        ->check(CLI::IsMember({"none", "minmax", "zscore"}));
}

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool lists) {
    cmd->add_option("--algo", f.algo, "omcdr | omcdr-ns | omcdr-nc | common-rep+kmeans | kmeans-concat")
        ->check(CLI::IsMember({"omcdr", "omcdr-ns", "omcdr-nc", "common-rep+kmeans", "kmeans-concat"}));
    const std::string sep = lists ? " (comma-separated list)" : "";
    auto list = [&](CLI::Option* o) {
        if (lists) o->delimiter(',');
        else o->expected(1);
    };
    list(cmd->add_option("--beta", f.beta, "redundancy weight" + sep));
    list(cmd->add_option("--gamma", f.gamma, "2,1-norm weight" + sep));
    list(cmd->add_option("--delta", f.delta, "view-weight entropy" + sep));
    list(cmd->add_option("--mc", f.mc, "common dimension, 0 = number of clusters" + sep));
    list(cmd->add_option("--ms", f.ms, "specific dimension" + sep));
    cmd->add_option("--clusters", f.clusters, "number of clusters (default: from labels)");
    cmd->add_option("--max-iter", f.max_iter, "maximum iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", f.tol, "objective change tolerance")->check(CLI::PositiveNumber);
    if (lists) cmd->add_option("--repeats", f.repeats, "runs per grid point")->check(CLI::PositiveNumber);
}

HyperParams base_params(const Shared& s, const FitFlags& f) {
    HyperParams p;
    p.beta = f.beta.front();
    p.gamma = f.gamma.front();
    p.delta = f.delta.front();
    p.dim_common = f.mc.front();
    p.dim_specific = f.ms.front();
    p.n_clusters = f.clusters;
    p.max_iter = f.max_iter;
    p.tol = f.tol;
    p.seed = s.seed;
    p.normalization = parse_normalization(s.normalize);
    return p;
}

MultiViewDataset load(const Shared& s) {
    return normalize_views(io::load_dataset(s.data), parse_normalization(s.normalize));
}

int cmd_fit(const Shared& s, const FitFlags& f) {
    const MultiViewDataset data = load(s);
    const HyperParams p = base_params(s, f);
    p.validate();
    const auto algo = harness::parse_algorithm(f.algo);
    FitResult r;
    try {
        r = harness::run_algorithm(data, algo, p);
    } catch (const NumericalError& e) {
        std::cerr << "fit failed: " << e.what() << '\n';
        return kRunFailure;
    }
    const json doc = harness::result_json(data, algo, p, r);
    if (s.out.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        const fs::path out = s.out;
        harness::write_json(out, doc);
        harness::write_trace_csv(out.parent_path() / (out.stem().string() + "_trace.csv"), r.objective_trace);
        std::cout << "wrote " << out.string() << '\n';
    }
    if (doc.contains("metrics")) std::cout << "metrics: " << doc["metrics"].dump() << '\n';
    return 0;
}

int cmd_grid(const Shared& s, const FitFlags& f) {
    if (s.out.empty()) throw InvalidInput("grid needs --out <directory>");
    const MultiViewDataset data = load(s);
    if (!data.labels()) throw InvalidInput("grid needs a dataset with ground-truth labels");
    const auto algo = harness::parse_algorithm(f.algo);
    harness::GridSpec spec;
    spec.beta = f.beta;
    spec.gamma = f.gamma;
    spec.delta = f.delta;
    spec.mc = f.mc;
    spec.ms = f.ms;
    spec.repeats = f.repeats;
    spec.base_seed = s.seed;
    spec.base = base_params(s, f);

    const auto runs = harness::run_grid(data, algo, spec, s.jobs);
    const fs::path dir = s.out;
    int failures = 0;
    for (const auto& rec : runs) {
        const std::string stem = "point" + std::to_string(rec.point) + "_rep" + std::to_string(rec.repeat);
        if (rec.result) {
            harness::write_json(dir / "runs" / (stem + ".json"), harness::result_json(data, algo, rec.params, *rec.result));
        } else {
            ++failures;
            harness::write_json(dir / "runs" / (stem + ".json"),
                                json{{"algorithm", std::string(harness::to_string(algo))},
                                     {"params", harness::params_json(rec.params)},
                                     {"error", rec.error}});
            std::cerr << "run " << stem << " failed: " << rec.error << '\n';
        }
    }
    const std::string table = harness::summary_csv(harness::summarize(runs));
    std::ofstream out(dir / "summary.csv");
    if (!out) throw IoError("cannot write " + (dir / "summary.csv").string());
    out << table;
    std::cout << table;
    std::cout << runs.size() << " runs, " << failures << " failed; wrote " << (dir / "summary.csv").string() << '\n';
    return failures == static_cast<int>(runs.size()) ? kRunFailure : 0;
}

struct SynthFlags {
    SyntheticSpec spec;
};

int cmd_synth(const Shared& s, SynthFlags& f) {
    if (s.out.empty()) throw InvalidInput("synth needs --out <directory>");
    f.spec.seed = s.seed;
    f.spec.validate();
    const SyntheticData syn = synthesize_multiview(f.spec);
    const json meta{{"generator",
                     {{"n_samples", f.spec.n_samples},
                      {"n_views", f.spec.n_views},
                      {"n_clusters", f.spec.n_clusters},
                      {"dim_common", f.spec.dim_common},
                      {"dim_specific", f.spec.dim_specific},
                      {"view_dims", f.spec.view_dims},
                      {"noise_sigma", f.spec.noise_sigma},
                      {"specific_structure", f.spec.specific_structure},
                      {"min_template_separation", f.spec.min_template_separation},
                      {"seed", f.spec.seed}}}};
    const fs::path manifest = io::save_dataset(s.out, syn.dataset, meta);
    std::cout << "wrote " << manifest.string() << '\n';
    return 0;
}

struct EvalFlags {
    std::string pred;
    std::string truth;
};

int cmd_eval(const Shared& s, const EvalFlags& f) {
    std::vector<int> truth;
    if (!f.truth.empty()) {
        truth = io::read_labels_csv(f.truth);
    } else if (!s.data.empty()) {
        const auto data = io::load_dataset(s.data);
        if (!data.labels()) throw InvalidInput("dataset " + s.data + " has no labels");
        truth = *data.labels();
    } else {
        throw InvalidInput("eval needs --truth or --data");
    }
    std::vector<int> pred;
    if (fs::path(f.pred).extension() == ".json") {
        std::ifstream in(f.pred);
        if (!in) throw IoError("cannot open " + f.pred);
        pred = json::parse(in).at("labels").get<std::vector<int>>();
    } else {
        pred = io::read_labels_csv(f.pred);
    }
    const json doc = harness::scores_json(metrics::evaluate(pred, truth));
    if (!s.out.empty()) harness::write_json(s.out, doc);
    std::cout << doc.dump(2) << '\n';
    return 0;
}

struct StatsFlags {
    std::string scores;
    std::string ranks;
    int n_datasets = 0;
    std::string control = "OMC-DR";
    double alpha = 0.05;
};

int cmd_stats(const Shared& s, const StatsFlags& f) {
    harness::StatsReport rep;
    if (!f.scores.empty()) {
        rep = harness::stats_from_scores(harness::read_score_csv(f.scores), f.control, f.alpha);
    } else if (!f.ranks.empty()) {
        if (f.n_datasets < 2) throw InvalidInput("--ranks needs --n-datasets >= 2");
        auto [names, ranks] = harness::read_rank_csv(f.ranks);
        rep = harness::stats_from_ranks(std::move(names), std::move(ranks), f.n_datasets, f.control, f.alpha);
    } else {
        throw InvalidInput("stats needs --scores or --ranks");
    }
    std::cout << rep.to_text();
    if (!s.out.empty()) harness::write_json(s.out, rep.to_json());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-step multi-view clustering with dual representations"};
    app.require_subcommand(1);

    Shared shared;
    FitFlags fit_flags;
    SynthFlags synth_flags;
    EvalFlags eval_flags;
    StatsFlags stats_flags;

    auto* fit = app.add_subcommand("fit", "single fit, result JSON plus trace CSV");
    add_shared(fit, shared);
    add_fit_flags(fit, fit_flags, false);

    auto* grid = app.add_subcommand("grid", "grid search with repeats, per-run JSON plus summary CSV");
    add_shared(grid, shared);
    add_fit_flags(grid, fit_flags, true);

    auto* synth = app.add_subcommand("synth", "write a planted multi-view dataset");
    add_shared(synth, shared, false);
    auto& sp = synth_flags.spec;
    synth->add_option("--n", sp.n_samples, "samples");
    synth->add_option("--views", sp.n_views, "views");
    synth->add_option("--clusters", sp.n_clusters, "clusters");
    synth->add_option("--mc", sp.dim_common, "common factor dimension");
    synth->add_option("--ms", sp.dim_specific, "specific factor dimension");
    synth->add_option("--dims", sp.view_dims, "view dimensions (comma-separated)")->delimiter(',');
    synth->add_option("--sigma", sp.noise_sigma, "noise standard deviation");
    synth->add_flag("--specific", sp.specific_structure, "plant cluster structure in the specific factors too");
    synth->add_option("--separation", sp.min_template_separation, "minimum distance between cluster templates");

    auto* eval = app.add_subcommand("eval", "NMI, ACC, purity and ARI of predicted labels");
    add_shared(eval, shared, false);
    eval->add_option("--data", shared.data, "dataset manifest supplying ground truth");
    eval->add_option("--pred", eval_flags.pred, "predicted labels (CSV or result JSON)")->required();
    eval->add_option("--truth", eval_flags.truth, "ground-truth label CSV");

    auto* st = app.add_subcommand("stats", "Friedman test and Holm post-hoc comparison");
    add_shared(st, shared, false);
    st->add_option("--scores", stats_flags.scores, "score table CSV (algorithms x datasets)");
    st->add_option("--ranks", stats_flags.ranks, "average-rank CSV (algorithm,rank)");
    st->add_option("--n-datasets", stats_flags.n_datasets, "datasets behind --ranks");
    st->add_option("--control", stats_flags.control, "control algorithm");
    st->add_option("--alpha", stats_flags.alpha, "significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*fit) return cmd_fit(shared, fit_flags);
        if (*grid) return cmd_grid(shared, fit_flags);
        if (*synth) return cmd_synth(shared, synth_flags);
        if (*eval) return cmd_eval(shared, eval_flags);
        if (*st) return cmd_stats(shared, stats_flags);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kRunFailure;
    }
    return kUsageError;
}
