#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsmvc/dataset.hpp"

namespace nsmvc {

enum class CorruptMode { gaussian_noise, label_shuffle };

const char* to_string(CorruptMode mode);
CorruptMode corrupt_mode_from_string(const std::string& token);

struct Corruption {
    std::size_t view = 0;
    CorruptMode mode = CorruptMode::gaussian_noise;
    double strength = 0.0;  // in [0,1]
};

struct SynthSpec {
    std::string name = "synth";
    std::size_t n = 0;
    int k = 1;
    std::vector<std::size_t> dims;  // one feature dimension per view
    double separation = 5.0;        // radius of the per-view center sphere
    double within_std = 1.0;        // isotropic within-cluster deviation
    std::vector<Corruption> corruptions;
    std::uint64_t seed = 0;
};

struct SynthResult {
    MultiViewDataset dataset;     // labels always present
    std::vector<Matrix> centers;  // true per-view centers, d^v x k
};

// Seeded blob generator: equal-as-possible cluster sizes, per-view centers
// drawn independently on a sphere of radius `separation`, then the requested
// corruptions applied view by view.
SynthResult generate(const SynthSpec& spec);

// gaussian_noise blends each entry with noise scaled to the view's own
// dispersion; label_shuffle uniformly permutes a strength-fraction of the
// sample columns.
ViewMatrix corrupt(const ViewMatrix& view, CorruptMode mode, double strength, std::uint64_t seed);

// Emits the dataset in the manifest + CSV + labels layout understood by
// load_manifest/load_dataset.
void write_dataset(const MultiViewDataset& ds, const std::string& dir);

}  // namespace nsmvc
