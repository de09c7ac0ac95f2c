#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsmvc/matrix.hpp"

namespace nsmvc {

// One feature representation of the samples: d features x n samples.
struct ViewMatrix {
    std::string name;
    Matrix data;

    std::size_t dim() const { return data.rows(); }
    std::size_t samples() const { return data.cols(); }
};

// Immutable collection of views sharing one sample axis. Labels, when
// present, are contiguous class ids 0..k_true-1.
struct MultiViewDataset {
    std::string name;
    std::vector<ViewMatrix> views;
    std::optional<std::vector<int>> labels;
    std::size_t n = 0;

    std::size_t num_views() const { return views.size(); }
    int num_classes() const;

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

enum class Normalize { none, zscore, minmax };

const char* to_string(Normalize mode);
Normalize normalize_from_string(const std::string& token);

struct CsvOptions {
    char delimiter = ',';
    bool header = false;
};

struct ManifestViewEntry {
    std::string name;
    std::string path;
};

struct DatasetManifest {
    std::string name;
    std::vector<ManifestViewEntry> views;
    std::string labels_path;  // empty when the dataset has no labels
    Normalize normalize = Normalize::none;
    CsvOptions csv;
};

// Parses and validates a manifest JSON file. Relative view/label paths are
// resolved against the manifest's directory.
DatasetManifest load_manifest(const std::string& path);

// Loads every view CSV, applies the manifest's normalization, and remaps
// raw labels to contiguous ids.
MultiViewDataset load_dataset(const DatasetManifest& manifest);

// Stacks all views into a single (sum of dims) x n matrix, in view order.
ViewMatrix concatenate_views(const MultiViewDataset& ds);

}  // namespace nsmvc
