#include "nsmvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nsmvc {

namespace {

void check_pair(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("label vectors differ in length: " +
                                    std::to_string(pred.size()) + " vs " +
                                    std::to_string(truth.size()));
    if (pred.empty()) throw std::invalid_argument("empty label vectors");
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] < 0 || truth[i] < 0)
            throw std::invalid_argument("negative label id at index " + std::to_string(i));
}

// Maximum-weight perfect matching on a square weight matrix (potentials form
// of the Hungarian algorithm, run on negated weights). Returns the total
// matched weight.
long long hungarian_max(const std::vector<std::vector<long long>>& weight) {
    const int n = static_cast<int>(weight.size());
    const long long kInf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<long long> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            long long delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    long long total = 0;
    for (int j = 1; j <= n; ++j) total += weight[match[j] - 1][j - 1];
    return total;
}

}  // namespace

ContingencyTable ContingencyTable::from_labels(std::span<const int> pred,
                                               std::span<const int> truth) {
    check_pair(pred, truth);
    const int k_pred = *std::max_element(pred.begin(), pred.end()) + 1;
    const int k_true = *std::max_element(truth.begin(), truth.end()) + 1;
    ContingencyTable table;
    table.counts.assign(k_pred, std::vector<long long>(k_true, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++table.counts[pred[i]][truth[i]];
    table.n = static_cast<long long>(pred.size());
    return table;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    const auto table = ContingencyTable::from_labels(pred, truth);
    const int k_pred = static_cast<int>(table.counts.size());
    const int k_true = static_cast<int>(table.counts[0].size());
    // Pad to square with zeros so the matching stays well-defined when
    // k_pred != k_true.
    const int k = std::max(k_pred, k_true);
    std::vector<std::vector<long long>> weight(k, std::vector<long long>(k, 0));
    for (int i = 0; i < k_pred; ++i)
        for (int j = 0; j < k_true; ++j) weight[i][j] = table.counts[i][j];
    return static_cast<double>(hungarian_max(weight)) / static_cast<double>(table.n);
}

double purity(std::span<const int> pred, std::span<const int> truth) {
    const auto table = ContingencyTable::from_labels(pred, truth);
    long long majority_sum = 0;
    for (const auto& row : table.counts)
        majority_sum += *std::max_element(row.begin(), row.end());
    return static_cast<double>(majority_sum) / static_cast<double>(table.n);
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
    const auto table = ContingencyTable::from_labels(pred, truth);
    const double n = static_cast<double>(table.n);
    const std::size_t k_pred = table.counts.size();
    const std::size_t k_true = table.counts[0].size();

    std::vector<long long> row_sum(k_pred, 0), col_sum(k_true, 0);
    for (std::size_t i = 0; i < k_pred; ++i)
        for (std::size_t j = 0; j < k_true; ++j) {
            row_sum[i] += table.counts[i][j];
            col_sum[j] += table.counts[i][j];
        }

    auto entropy = [n](const std::vector<long long>& sums) {
        double h = 0.0;
        for (long long s : sums) {
            if (s == 0) continue;
            const double p = static_cast<double>(s) / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double h_pred = entropy(row_sum);
    const double h_true = entropy(col_sum);

    // Identical up to relabeling: exactly one nonzero per row and column.
    if (h_pred == 0.0 || h_true == 0.0) {
        bool identical = true;
        for (std::size_t i = 0; i < k_pred && identical; ++i) {
            int nonzero = 0;
            for (std::size_t j = 0; j < k_true; ++j)
                if (table.counts[i][j] > 0) ++nonzero;
            if (row_sum[i] > 0 && nonzero != 1) identical = false;
        }
        if (identical) {
            for (std::size_t j = 0; j < k_true && identical; ++j) {
                int nonzero = 0;
                for (std::size_t i = 0; i < k_pred; ++i)
                    if (table.counts[i][j] > 0) ++nonzero;
                if (col_sum[j] > 0 && nonzero != 1) identical = false;
            }
        }
        return identical ? 1.0 : 0.0;
    }

    double mi = 0.0;
    for (std::size_t i = 0; i < k_pred; ++i)
        for (std::size_t j = 0; j < k_true; ++j) {
            const long long c = table.counts[i][j];
            if (c == 0) continue;
            const double p = static_cast<double>(c) / n;
            mi += p * std::log(n * static_cast<double>(c) /
                               (static_cast<double>(row_sum[i]) * static_cast<double>(col_sum[j])));
        }
    const double value = mi / std::sqrt(h_pred * h_true);
    return std::clamp(value, 0.0, 1.0);
}

TrialSummary summarize_trials(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize_trials: no trials");
    TrialSummary summary;
    summary.trials = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    summary.mean = mean;
    const bool constant =
        std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    if (values.size() > 1 && !constant) {
        double ss = 0.0;
        for (double v : values) {
            const double c = v - mean;
            ss += c * c;
        }
        summary.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return summary;
}

}  // namespace nsmvc
