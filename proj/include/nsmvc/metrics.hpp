#pragma once

#include <span>
#include <vector>

namespace nsmvc {

// Cluster-vs-class count matrix backing all three external metrics.
struct ContingencyTable {
    std::vector<std::vector<long long>> counts;  // k_pred x k_true
    long long n = 0;

    static ContingencyTable from_labels(std::span<const int> pred, std::span<const int> truth);
};

// Fraction of samples correctly matched under the best injective
// cluster-to-class matching (optimal-assignment solve on the table).
double accuracy(std::span<const int> pred, std::span<const int> truth);

// Fraction of samples belonging to the majority true class of their cluster.
double purity(std::span<const int> pred, std::span<const int> truth);

// Mutual information normalized by the geometric mean of the entropies.
// Returns 1 for identical partitions (up to relabeling), 0 when either
// partition carries no information about the other.
double nmi(std::span<const int> pred, std::span<const int> truth);

struct TrialSummary {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std, n-1 denominator; 0 for one trial
    int trials = 0;
};

TrialSummary summarize_trials(std::span<const double> values);

}  // namespace nsmvc
