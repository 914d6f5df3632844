#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "omcdr/dataset.hpp"

namespace omcdr::io {

namespace fs = std::filesystem;

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string& raw, const fs::path& file, std::size_t row,
                           std::size_t col) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end)
        throw InvalidInput("non-numeric cell '" + cell + "' at " + file.string() + ":" +
                           std::to_string(row + 1) + ":" + std::to_string(col + 1));
    return value;
}

inline std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

/// Headerless comma-separated numeric matrix, one sample per line.
inline Matrix read_matrix_csv(const fs::path& file) {
    const auto lines = read_lines(file);
    if (lines.empty()) throw InvalidInput("empty view file " + file.string());
    const auto width = split(lines.front()).size();
    Matrix m(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        if (cells.size() != width)
            throw InvalidInput("ragged row " + std::to_string(i + 1) + " in " + file.string());
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_number(cells[j], file, i, j);
    }
    return m;
}

inline std::string format_double(double v) {
    // Shortest representation that round-trips exactly.
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void write_matrix_csv(const fs::path& file, const Matrix& m) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + file.string());
}

/// One-column label file; values are arbitrary tokens.
inline std::vector<std::string> read_label_tokens(const fs::path& file) {
    std::vector<std::string> out;
    for (const auto& line : read_lines(file)) out.push_back(trim(split(line).front()));
    return out;
}

inline std::vector<int> read_labels_csv(const fs::path& file) {
    return encode_labels(read_label_tokens(file));
}

inline void write_labels_csv(const fs::path& file, const std::vector<int>& labels) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (int l : labels) out << l << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

/// Loads a dataset from a JSON manifest:
///   { "views": ["a.csv", ...], "labels": "y.csv", "name": "...", "n_clusters": C }
/// Relative paths resolve against the manifest's directory.
inline MultiViewDataset load_dataset(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("views") || !doc["views"].is_array() ||
        doc["views"].empty())
        throw InvalidInput("manifest " + manifest_path.string() + " lacks a non-empty 'views' array");

    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const nlohmann::json& entry) {
        if (!entry.is_string()) throw InvalidInput("manifest paths must be strings");
        fs::path p = entry.get<std::string>();
        return p.is_absolute() ? p : base / p;
    };

    std::vector<Matrix> views;
    for (const auto& entry : doc["views"]) views.push_back(read_matrix_csv(resolve(entry)));

    std::optional<std::vector<int>> labels;
    if (doc.contains("labels") && !doc["labels"].is_null())
        labels = read_labels_csv(resolve(doc["labels"]));
    std::optional<int> n_clusters;
    if (!labels && doc.contains("n_clusters")) n_clusters = doc["n_clusters"].get<int>();
    std::string name = doc.value("name", std::string{});
    return MultiViewDataset::make(std::move(views), std::move(labels), n_clusters, std::move(name));
}

/// Writes view CSVs, an optional label CSV and a manifest into dir. Returns
/// the manifest path. Extra metadata is merged into the manifest.
inline fs::path save_dataset(const fs::path& dir, const MultiViewDataset& data,
                             const nlohmann::json& metadata = nlohmann::json::object()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
    nlohmann::json doc = metadata;
    doc["views"] = nlohmann::json::array();
    for (std::size_t k = 0; k < data.n_views(); ++k) {
        const std::string file = "view" + std::to_string(k + 1) + ".csv";
        write_matrix_csv(dir / file, data.view(k));
        doc["views"].push_back(file);
    }
    if (data.labels()) {
        write_labels_csv(dir / "labels.csv", *data.labels());
        doc["labels"] = "labels.csv";
    }
    if (!data.name().empty()) doc["name"] = data.name();
    doc["n_samples"] = data.n_samples();
    doc["n_views"] = data.n_views();
    if (data.n_classes() > 0) doc["n_clusters"] = data.n_classes();
    const fs::path manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    if (!out) throw IoError("cannot write " + manifest.string());
    out << doc.dump(2) << '\n';
    return manifest;
}

}  // namespace omcdr::io
