#include "nsmvc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;

namespace nsmvc {

const char* to_string(CorruptMode mode) {
    return mode == CorruptMode::label_shuffle ? "label_shuffle" : "gaussian_noise";
}

CorruptMode corrupt_mode_from_string(const std::string& token) {
    if (token == "gaussian_noise") return CorruptMode::gaussian_noise;
    if (token == "label_shuffle") return CorruptMode::label_shuffle;
    throw std::invalid_argument("unknown corruption mode '" + token +
                                "' (expected gaussian_noise|label_shuffle)");
}

namespace {

void validate_spec(const SynthSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("synth: k must be >= 1");
    if (spec.n < static_cast<std::size_t>(spec.k))
        throw std::invalid_argument("synth: n=" + std::to_string(spec.n) + " below k=" +
                                    std::to_string(spec.k));
    if (spec.dims.empty()) throw std::invalid_argument("synth: no view dimensions");
    for (std::size_t d : spec.dims)
        if (d < 1) throw std::invalid_argument("synth: view dimensions must be >= 1");
    if (!(spec.separation > 0.0)) throw std::invalid_argument("synth: separation must be > 0");
    if (spec.within_std < 0.0) throw std::invalid_argument("synth: within-cluster std must be >= 0");
    for (const auto& c : spec.corruptions) {
        if (c.view >= spec.dims.size())
            throw std::invalid_argument("synth: corruption names view " + std::to_string(c.view) +
                                        " but only " + std::to_string(spec.dims.size()) +
                                        " views exist");
        if (c.strength < 0.0 || c.strength > 1.0)
            throw std::invalid_argument("synth: corruption strength must lie in [0,1]");
    }
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthResult result;
    result.dataset.name = spec.name;
    result.dataset.n = spec.n;

    // Cluster sizes as equal as possible via round-robin labels.
    std::vector<int> labels(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) labels[i] = static_cast<int>(i % spec.k);

    for (std::size_t v = 0; v < spec.dims.size(); ++v) {
        const std::size_t d = spec.dims[v];
        // Per-view centers drawn independently on a sphere of radius
        // `separation`; views carry complementary geometry.
        Matrix centers(d, static_cast<std::size_t>(spec.k));
        for (int j = 0; j < spec.k; ++j) {
            auto c = centers.col(j);
            double norm = 0.0;
            while (norm == 0.0) {
                for (std::size_t f = 0; f < d; ++f) c[f] = gauss(rng);
                norm = std::sqrt(std::inner_product(c.begin(), c.end(), c.begin(), 0.0));
            }
            for (std::size_t f = 0; f < d; ++f) c[f] *= spec.separation / norm;
        }

        Matrix data(d, spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const auto center = centers.col(labels[i]);
            auto x = data.col(i);
            for (std::size_t f = 0; f < d; ++f)
                x[f] = center[f] + spec.within_std * gauss(rng);
        }
        result.dataset.views.push_back({"view" + std::to_string(v), std::move(data)});
        result.centers.push_back(std::move(centers));
    }
    result.dataset.labels = std::move(labels);

    for (std::size_t c = 0; c < spec.corruptions.size(); ++c) {
        const auto& corruption = spec.corruptions[c];
        const std::uint64_t corruption_seed = spec.seed + 0x9E3779B97F4A7C15ull * (c + 1);
        result.dataset.views[corruption.view] = corrupt(result.dataset.views[corruption.view],
                                                        corruption.mode, corruption.strength,
                                                        corruption_seed);
    }
    result.dataset.validate();
    return result;
}

ViewMatrix corrupt(const ViewMatrix& view, CorruptMode mode, double strength,
                   std::uint64_t seed) {
    if (strength < 0.0 || strength > 1.0)
        throw std::invalid_argument("corrupt: strength must lie in [0,1]");
    std::mt19937_64 rng(seed);
    ViewMatrix out{view.name, view.data};
    const std::size_t n = view.samples();
    const std::size_t d = view.dim();

    if (mode == CorruptMode::gaussian_noise) {
        // Noise scaled to the view's own dispersion so strength is comparable
        // across views of different magnitudes.
        double mean = 0.0;
        for (double x : view.data.data()) mean += x;
        mean /= static_cast<double>(view.data.data().size());
        double var = 0.0;
        for (double x : view.data.data()) {
            const double c = x - mean;
            var += c * c;
        }
        const double sigma = std::sqrt(var / static_cast<double>(view.data.data().size()));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto col = out.data.col(i);
            for (std::size_t f = 0; f < d; ++f)
                col[f] = (1.0 - strength) * col[f] + strength * sigma * gauss(rng);
        }
    } else {
        const std::size_t count =
            static_cast<std::size_t>(std::llround(strength * static_cast<double>(n)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::size_t> subset(order.begin(), order.begin() + count);
        std::vector<std::size_t> permuted = subset;
        std::shuffle(permuted.begin(), permuted.end(), rng);
        for (std::size_t t = 0; t < count; ++t) {
            const auto src = view.data.col(permuted[t]);
            auto dst = out.data.col(subset[t]);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return out;
}

void write_dataset(const MultiViewDataset& ds, const std::string& dir) {
    ds.validate();
    fs::create_directories(dir);
    const fs::path base(dir);

    nlohmann::json manifest;
    manifest["name"] = ds.name;
    manifest["normalize"] = "none";
    manifest["csv"] = {{"delimiter", ","}, {"header", false}};
    auto& views = manifest["views"] = nlohmann::json::array();

    char buffer[64];
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const auto& view = ds.views[v];
        const std::string filename = "view" + std::to_string(v) + ".csv";
        std::ofstream out(base / filename);
        if (!out) throw std::runtime_error("cannot write '" + (base / filename).string() + "'");
        for (std::size_t i = 0; i < ds.n; ++i) {
            for (std::size_t f = 0; f < view.dim(); ++f) {
                std::snprintf(buffer, sizeof buffer, "%.17g", view.data(f, i));
                if (f) out << ',';
                out << buffer;
            }
            out << '\n';
        }
        views.push_back({{"name", view.name}, {"path", filename}});
    }

    if (ds.labels) {
        std::ofstream out(base / "labels.txt");
        if (!out) throw std::runtime_error("cannot write '" + (base / "labels.txt").string() + "'");
        for (int label : *ds.labels) out << label << '\n';
        manifest["labels"] = "labels.txt";
    }

    std::ofstream out(base / "manifest.json");
    if (!out) throw std::runtime_error("cannot write '" + (base / "manifest.json").string() + "'");
    out << manifest.dump(2) << '\n';
}

}  // namespace nsmvc
