#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "omcdr/baselines.hpp"
#include "omcdr/io.hpp"
#include "omcdr/metrics.hpp"
#include "omcdr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace omcdr;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(OMCDR_TEST_TMP) / "data_model" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    out << text;
}

}  // namespace

TEST(Dataset, RejectsRowCountMismatch) {
    EXPECT_THROW(MultiViewDataset::make({Matrix::Zero(4, 2), Matrix::Zero(3, 2)}), InvalidInput);
}

TEST(Dataset, RejectsNonFiniteAndEmptyViews) {
    Matrix bad = Matrix::Zero(3, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(MultiViewDataset::make({bad}), InvalidInput);
    EXPECT_THROW(MultiViewDataset::make({Matrix(3, 0)}), InvalidInput);
    EXPECT_THROW(MultiViewDataset::make({}), InvalidInput);
    EXPECT_THROW(MultiViewDataset::make({Matrix::Zero(1, 2)}), InvalidInput);
}

TEST(Dataset, LabelsAreEncodedByFirstAppearance) {
    const auto d = MultiViewDataset::make({Matrix::Zero(5, 1)}, std::vector<int>{7, 3, 7, 9, 3});
    EXPECT_EQ(*d.labels(), (std::vector<int>{0, 1, 0, 2, 1}));
    EXPECT_EQ(d.n_classes(), 3);
    EXPECT_EQ(encode_labels({"b", "a", "b"}), (std::vector<int>{0, 1, 0}));
}

TEST(Dataset, DeclaredClassCountMustMatchLabels) {
    EXPECT_THROW(MultiViewDataset::make({Matrix::Zero(3, 1)}, std::vector<int>{0, 1, 1}, 3), InvalidInput);
    const auto d = MultiViewDataset::make({Matrix::Zero(3, 1)}, std::nullopt, 2);
    EXPECT_EQ(d.n_classes(), 2);
    EXPECT_FALSE(d.labels());
}

TEST(Normalize, MinMaxColumn) {
    Matrix x(3, 1);
    x << 0, 5, 10;
    const Matrix y = normalize_matrix(x, Normalization::minmax);
    EXPECT_DOUBLE_EQ(y(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(y(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(y(2, 0), 1.0);
}

TEST(Normalize, ConstantColumnsMapToZero) {
    const Matrix x = Matrix::Constant(3, 2, 4.25);
    EXPECT_TRUE(normalize_matrix(x, Normalization::zscore).isZero(0.0));
    EXPECT_TRUE(normalize_matrix(x, Normalization::minmax).isZero(0.0));
}

TEST(Normalize, NoneIsIdentityAndZscoreStandardizes) {
    Rng rng(3);
    const Matrix x = rng.uniform_matrix(20, 4) * 7.0;
    const auto d = MultiViewDataset::make({x});
    EXPECT_EQ(normalize_views(d, Normalization::none).view(0), x);
    const Matrix z = normalize_matrix(x, Normalization::zscore);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
        EXPECT_NEAR(z.col(j).squaredNorm() / z.rows(), 1.0, 1e-12);
    }
}

TEST(Normalize, MinMaxIsIdempotent) {
    Rng rng(4);
    const Matrix x = rng.uniform_matrix(15, 6) * 3.0 - Matrix::Constant(15, 6, 1.0);
    const Matrix once = normalize_matrix(x, Normalization::minmax);
    EXPECT_TRUE(normalize_matrix(once, Normalization::minmax).isApprox(once, 1e-15));
}

TEST(Normalize, ParseRejectsUnknownScheme) {
    EXPECT_EQ(parse_normalization("zscore"), Normalization::zscore);
    EXPECT_THROW(parse_normalization("l2"), InvalidInput);
}

TEST(Io, MinimalManifestWithoutLabels) {
    const auto dir = scratch("minimal");
    write_text(dir / "v.csv", "1.5\n-2\n");
    write_text(dir / "m.json", R"({"views": ["v.csv"]})");
    const auto d = io::load_dataset(dir / "m.json");
    EXPECT_EQ(d.n_views(), 1u);
    EXPECT_EQ(d.n_samples(), 2);
    EXPECT_FALSE(d.labels());
    EXPECT_DOUBLE_EQ(d.view(0)(1, 0), -2.0);
}

TEST(Io, RowCountMismatchAcrossViews) {
    const auto dir = scratch("mismatch");
    write_text(dir / "a.csv", "1,2\n3,4\n5,6\n");
    write_text(dir / "b.csv", "1\n2\n");
    write_text(dir / "m.json", R"({"views": ["a.csv", "b.csv"]})");
    try {
        io::load_dataset(dir / "m.json");
        FAIL() << "expected a row-count error";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("row-count mismatch"), std::string::npos);
    }
}

TEST(Io, NonNumericCellNamesItsPosition) {
    const auto dir = scratch("nonnumeric");
    write_text(dir / "a.csv", "1,2\n3,x\n");
    write_text(dir / "m.json", R"({"views": ["a.csv"]})");
    try {
        io::load_dataset(dir / "m.json");
        FAIL() << "expected a parse error";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("a.csv:2:2"), std::string::npos) << e.what();
    }
}

TEST(Io, MissingManifestAndEmptyView) {
    const auto dir = scratch("missing");
    EXPECT_THROW(io::load_dataset(dir / "nope.json"), IoError);
    write_text(dir / "empty.csv", "\n");
    write_text(dir / "m.json", R"({"views": ["empty.csv"]})");
    EXPECT_THROW(io::load_dataset(dir / "m.json"), InvalidInput);
}

TEST(Io, StringLabelsAreEncoded) {
    const auto dir = scratch("strlabels");
    write_text(dir / "a.csv", "0\n1\n2\n3\n");
    write_text(dir / "y.csv", "cat\ndog\ncat\nbird\n");
    write_text(dir / "m.json", R"({"views": ["a.csv"], "labels": "y.csv", "name": "pets"})");
    const auto d = io::load_dataset(dir / "m.json");
    EXPECT_EQ(*d.labels(), (std::vector<int>{0, 1, 0, 2}));
    EXPECT_EQ(d.n_classes(), 3);
    EXPECT_EQ(d.name(), "pets");
}

TEST(Io, RoundTripPreservesEveryEntryExactly) {
    Rng rng(11);
    std::vector<Matrix> views{rng.uniform_matrix(9, 3) * 1e-7, rng.uniform_matrix(9, 5) * 1e9};
    views[0](2, 1) = -0.1;
    views[1](0, 0) = 1.0 / 3.0;
    const auto d = MultiViewDataset::make(views, std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2}, std::nullopt, "rt");
    const auto manifest = io::save_dataset(scratch("roundtrip"), d);
    const auto back = normalize_views(io::load_dataset(manifest), Normalization::none);
    ASSERT_EQ(back.n_views(), 2u);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(back.view(k), d.view(k));
    EXPECT_EQ(*back.labels(), *d.labels());
    EXPECT_EQ(back.name(), "rt");
}

TEST(Io, ReutersShapedManifest) {
    // Table-I-sized dataset: N = 1200, two 2000-dimensional views, 6 classes.
    const auto dir = scratch("reuters");
    const int n = 1200, dim = 2000, classes = 6;
    for (const char* file : {"v1.csv", "v2.csv"}) {
        std::ofstream out(dir / file);
        std::string row;
        for (int j = 0; j < dim; ++j) row += (j ? ",0" : "0");
        row += '\n';
        for (int i = 0; i < n; ++i) out << row;
    }
    {
        std::ofstream out(dir / "y.csv");
        for (int i = 0; i < n; ++i) out << "topic" << i % classes << '\n';
    }
    write_text(dir / "m.json", R"({"views": ["v1.csv", "v2.csv"], "labels": "y.csv", "name": "Reuters"})");
    const auto d = io::load_dataset(dir / "m.json");
    EXPECT_EQ(d.n_samples(), n);
    EXPECT_EQ(d.n_views(), 2u);
    EXPECT_EQ(d.dims(), (std::vector<Eigen::Index>{dim, dim}));
    EXPECT_EQ(d.n_classes(), classes);
}

TEST(Synthetic, NoiselessFactorizationIsExact) {
    SyntheticSpec spec;
    spec.noise_sigma = 0.0;
    spec.seed = 5;
    const auto syn = synthesize_multiview(spec);
    for (std::size_t k = 0; k < syn.dataset.n_views(); ++k) {
        const Matrix r = syn.dataset.view(k) - syn.common * syn.common_maps[k] - syn.specific[k] * syn.specific_maps[k];
        EXPECT_EQ(r.norm(), 0.0);
    }
}

TEST(Synthetic, DeterministicUnderSeed) {
    SyntheticSpec spec;
    spec.seed = 17;
    spec.specific_structure = true;
    const auto a = synthesize_multiview(spec);
    const auto b = synthesize_multiview(spec);
    EXPECT_EQ(a.labels, b.labels);
    for (std::size_t k = 0; k < a.dataset.n_views(); ++k) EXPECT_EQ(a.dataset.view(k), b.dataset.view(k));
    spec.seed = 18;
    EXPECT_NE(synthesize_multiview(spec).dataset.view(0), a.dataset.view(0));
}

TEST(Synthetic, SameClusterRowsShareATemplate) {
    SyntheticSpec spec;
    spec.noise_sigma = 0.0;
    spec.seed = 2;
    const auto syn = synthesize_multiview(spec);
    for (std::size_t i = 0; i < syn.labels.size(); ++i)
        for (std::size_t j = i + 1; j < std::min<std::size_t>(syn.labels.size(), i + 20); ++j) {
            const bool same = (syn.common.row(static_cast<Eigen::Index>(i)) -
                               syn.common.row(static_cast<Eigen::Index>(j))).norm() == 0.0;
            EXPECT_EQ(same, syn.labels[i] == syn.labels[j]);
        }
    EXPECT_EQ(*syn.dataset.labels(), syn.labels);
    EXPECT_EQ(count_classes(syn.labels), spec.n_clusters);
}

TEST(Synthetic, TemplatesRespectMinimumSeparation) {
    SyntheticSpec spec;
    spec.noise_sigma = 0.0;
    spec.n_clusters = 6;
    spec.min_template_separation = 0.45;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        spec.seed = seed;
        const auto syn = synthesize_multiview(spec);
        for (std::size_t i = 0; i < syn.labels.size(); ++i)
            for (std::size_t j = 0; j < syn.labels.size(); ++j)
                if (syn.labels[i] != syn.labels[j])
                    ASSERT_GE((syn.common.row(static_cast<Eigen::Index>(i)) -
                               syn.common.row(static_cast<Eigen::Index>(j))).norm(),
                              0.45);
    }
}

TEST(Synthetic, InvalidSpecs) {
    SyntheticSpec spec;
    spec.n_clusters = 400;
    EXPECT_THROW(synthesize_multiview(spec), InvalidInput);
    spec = SyntheticSpec{};
    spec.view_dims = {20};
    EXPECT_THROW(synthesize_multiview(spec), InvalidInput);
    spec = SyntheticSpec{};
    spec.noise_sigma = -1.0;
    EXPECT_THROW(synthesize_multiview(spec), InvalidInput);
    spec = SyntheticSpec{};
    spec.dim_common = 1;
    spec.min_template_separation = 5.0;  // unreachable inside the unit interval
    EXPECT_THROW(synthesize_multiview(spec), InvalidInput);
}

TEST(Synthetic, EasyInstanceIsSolvableByKMeansOnConcatenation) {
    SyntheticSpec spec;
    spec.seed = 1;
    const auto syn = synthesize_multiview(spec);
    const auto data = normalize_views(syn.dataset, Normalization::zscore);
    double best = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s)
        best = std::max(best, metrics::nmi(kmeans_mf(data.concatenated(), 3, 100, s, KMeansInit::plus_plus)
                                               .assignment.labels(),
                                           syn.labels));
    EXPECT_GT(best, 0.8);
}
