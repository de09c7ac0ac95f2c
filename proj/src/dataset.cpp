#include "nsmvc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace nsmvc {

int MultiViewDataset::num_classes() const {
    if (!labels || labels->empty()) return 0;
    return *std::max_element(labels->begin(), labels->end()) + 1;
}

void MultiViewDataset::validate() const {
    if (views.empty()) throw std::invalid_argument("dataset '" + name + "' has no views");
    for (const auto& view : views) {
        if (view.dim() < 1 || view.samples() < 1)
            throw std::invalid_argument("view '" + view.name + "' is empty");
        if (view.samples() != n)
            throw std::invalid_argument("view '" + view.name + "' has " +
                                        std::to_string(view.samples()) + " samples, expected " +
                                        std::to_string(n));
        if (!view.data.all_finite())
            throw std::invalid_argument("view '" + view.name + "' contains non-finite values");
    }
    if (labels && labels->size() != n)
        throw std::invalid_argument("dataset '" + name + "' has " +
                                    std::to_string(labels->size()) + " labels for " +
                                    std::to_string(n) + " samples");
}

const char* to_string(Normalize mode) {
    switch (mode) {
        case Normalize::none: return "none";
        case Normalize::zscore: return "zscore";
        case Normalize::minmax: return "minmax";
    }
    return "none";
}

Normalize normalize_from_string(const std::string& token) {
    if (token == "none") return Normalize::none;
    if (token == "zscore") return Normalize::zscore;
    if (token == "minmax") return Normalize::minmax;
    throw std::invalid_argument("unknown normalization mode '" + token +
                                "' (expected none|zscore|minmax)");
}

namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& what) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) { known = true; break; }
        if (!known)
            throw std::invalid_argument(what + ": unknown field '" + item.key() + "'");
    }
}

// Parses a view CSV (one sample per row) into the internal d x n layout.
Matrix load_view_csv(const std::string& path, const CsvOptions& opts, const std::string& view_name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open view file '" + path + "'");

    std::vector<double> values;  // row-major while reading
    std::size_t n_rows = 0, n_cols = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (opts.header && line_no == 1) continue;
        if (line.empty()) continue;

        std::size_t col = 0, start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(opts.delimiter, start);
            if (end == std::string::npos) end = line.size();
            const char* first = line.data() + start;
            const char* last = line.data() + end;
            while (first < last && (*first == ' ' || *first == '\t')) ++first;
            while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last)
                throw std::runtime_error("view '" + view_name + "' (" + path + "): non-numeric cell at row " +
                                         std::to_string(line_no) + ", column " + std::to_string(col + 1));
            if (!std::isfinite(value))
                throw std::runtime_error("view '" + view_name + "' (" + path + "): non-finite value at row " +
                                         std::to_string(line_no) + ", column " + std::to_string(col + 1));
            values.push_back(value);
            ++col;
            start = end + 1;
            if (end == line.size()) break;
        }
        if (n_rows == 0) {
            n_cols = col;
        } else if (col != n_cols) {
            throw std::runtime_error("view '" + view_name + "' (" + path + "): row " + std::to_string(line_no) +
                                     " has " + std::to_string(col) + " cells, expected " +
                                     std::to_string(n_cols));
        }
        ++n_rows;
    }
    if (n_rows == 0 || n_cols == 0)
        throw std::runtime_error("view '" + view_name + "' (" + path + "): no data rows");

    // rows = samples on disk; transpose into features x samples
    Matrix out(n_cols, n_rows);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t f = 0; f < n_cols; ++f) out(f, i) = values[i * n_cols + f];
    return out;
}

std::vector<int> load_labels(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels file '" + path + "'");
    std::vector<int> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* first = line.data();
        const char* last = line.data() + line.size();
        while (first < last && (*first == ' ' || *first == '\t')) ++first;
        while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
        int value = 0;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last)
            throw std::runtime_error("labels file '" + path + "': non-integer at line " +
                                     std::to_string(line_no));
        raw.push_back(value);
    }
    if (raw.size() != n)
        throw std::runtime_error("labels file '" + path + "' has " + std::to_string(raw.size()) +
                                 " entries for " + std::to_string(n) + " samples");

    // Remap raw labels to contiguous ids, sorted-unique order.
    std::map<int, int> remap;
    for (int r : raw) remap.emplace(r, 0);
    int next = 0;
    for (auto& [_, id] : remap) id = next++;
    std::vector<int> labels(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = remap[raw[i]];
    return labels;
}

void normalize_view(Matrix& m, Normalize mode) {
    if (mode == Normalize::none) return;
    const std::size_t d = m.rows(), n = m.cols();
    for (std::size_t f = 0; f < d; ++f) {
        if (mode == Normalize::zscore) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += m(f, i);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = m(f, i) - mean;
                var += c * c;
            }
            double sigma = std::sqrt(var / static_cast<double>(n));
            if (sigma == 0.0) sigma = 1.0;  // constant feature: keep it at zero
            for (std::size_t i = 0; i < n; ++i) m(f, i) = (m(f, i) - mean) / sigma;
        } else {
            double lo = m(f, 0), hi = m(f, 0);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, m(f, i));
                hi = std::max(hi, m(f, i));
            }
            double range = hi - lo;
            if (range == 0.0) range = 1.0;
            for (std::size_t i = 0; i < n; ++i) m(f, i) = (m(f, i) - lo) / range;
        }
    }
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("manifest '" + path + "': " + e.what());
    }

    require_keys(j, {"name", "views", "labels", "normalize", "csv"}, "manifest '" + path + "'");
    DatasetManifest manifest;
    if (!j.contains("name") || !j["name"].is_string())
        throw std::runtime_error("manifest '" + path + "': missing string field 'name'");
    manifest.name = j["name"].get<std::string>();

    if (!j.contains("views") || !j["views"].is_array() || j["views"].empty())
        throw std::runtime_error("manifest '" + path + "': no views");

    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    for (const auto& entry : j["views"]) {
        require_keys(entry, {"name", "path"}, "manifest '" + path + "' view entry");
        if (!entry.contains("name") || !entry.contains("path"))
            throw std::runtime_error("manifest '" + path + "': view entry needs 'name' and 'path'");
        const auto vpath = entry["path"].get<std::string>();
        if (vpath.empty())
            throw std::runtime_error("manifest '" + path + "': empty view path");
        manifest.views.push_back({entry["name"].get<std::string>(), resolve(vpath)});
    }

    if (j.contains("labels")) {
        const auto lpath = j["labels"].get<std::string>();
        if (lpath.empty()) throw std::runtime_error("manifest '" + path + "': empty labels path");
        manifest.labels_path = resolve(lpath);
    }
    if (j.contains("normalize"))
        manifest.normalize = normalize_from_string(j["normalize"].get<std::string>());
    if (j.contains("csv")) {
        const auto& c = j["csv"];
        require_keys(c, {"delimiter", "header"}, "manifest '" + path + "' csv options");
        if (c.contains("delimiter")) {
            const auto d = c["delimiter"].get<std::string>();
            if (d.size() != 1)
                throw std::runtime_error("manifest '" + path + "': delimiter must be a single character");
            manifest.csv.delimiter = d[0];
        }
        if (c.contains("header")) manifest.csv.header = c["header"].get<bool>();
    }
    return manifest;
}

MultiViewDataset load_dataset(const DatasetManifest& manifest) {
    if (manifest.views.empty())
        throw std::invalid_argument("manifest '" + manifest.name + "' has no views");

    MultiViewDataset ds;
    ds.name = manifest.name;
    for (const auto& entry : manifest.views) {
        ViewMatrix view{entry.name, load_view_csv(entry.path, manifest.csv, entry.name)};
        if (!ds.views.empty() && view.samples() != ds.n)
            throw std::runtime_error("sample-count mismatch: view '" + entry.name + "' has " +
                                     std::to_string(view.samples()) + " samples, view '" +
                                     ds.views.front().name + "' has " + std::to_string(ds.n));
        ds.n = view.samples();
        normalize_view(view.data, manifest.normalize);
        ds.views.push_back(std::move(view));
    }
    if (!manifest.labels_path.empty()) ds.labels = load_labels(manifest.labels_path, ds.n);
    ds.validate();
    return ds;
}

ViewMatrix concatenate_views(const MultiViewDataset& ds) {
    ds.validate();
    std::size_t total_dim = 0;
    for (const auto& view : ds.views) total_dim += view.dim();

    ViewMatrix out{"all", Matrix(total_dim, ds.n)};
    std::size_t offset = 0;
    for (const auto& view : ds.views) {
        for (std::size_t i = 0; i < ds.n; ++i) {
            const auto src = view.data.col(i);
            auto dst = out.data.col(i);
            std::copy(src.begin(), src.end(), dst.begin() + offset);
        }
        offset += view.dim();
    }
    return out;
}

}  // namespace nsmvc
