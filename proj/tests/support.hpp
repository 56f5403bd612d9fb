#pragma once

#include "rftext/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace rftext::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(RFTEXT_DATA_DIR) / name;
}

inline Dataset iris() { return load_csv(data_path("iris.csv")); }
inline Dataset wine() { return load_csv(data_path("wine.csv")); }
inline Dataset breast_cancer() { return load_csv(data_path("breast_cancer.csv")); }

/// Fresh scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& stem) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (stem + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Small dataset from explicit rows; class names are "c0".."c{k-1}".
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                            int n_classes) {
    Dataset ds;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto f = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
    ds.features.resize(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < f; ++j) ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < f; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (int c = 0; c < n_classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
    ds.labels = labels;
    return ds;
}

}  // namespace rftext::test
