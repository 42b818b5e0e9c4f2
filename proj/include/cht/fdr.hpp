#pragma once

#include "cht/contrasts.hpp"
#include "cht/dataset.hpp"
#include "cht/test_stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace cht {

/// Permutation estimate of the false discovery rate of the pair statistics
/// along a descending lambda grid.
struct FdrCurve {
    std::vector<double> lambda_grid;
    /// #{pairs with lambda' > lambda}
    std::vector<std::uint64_t> observed_exceed;
    /// Same count summed over all permutations (pooled null).
    std::vector<std::uint64_t> null_exceed_total;
    std::vector<double> null_exceed_mean;
    std::vector<double> fdr_hat;
    std::size_t permutations = 0;
    std::uint64_t seed = 0;
};

/// Interaction statistics after regrouping the observations by `y_star`.
/// Observations keep the centering and scaling of the original classes;
/// only the grouping (and hence the pooled spread) changes.
Matrix<double> permuted_interaction_contrasts(const ClassedDataset& data, const ClassMoments& moments,
                                              const std::vector<int>& y_star);

/// Same, reading interaction observations from a prepared cache.
Matrix<double> permuted_interaction_contrasts(const InteractionCache& cache, Index p, const std::vector<int>& y_star);

std::vector<int> permute_labels(const std::vector<int>& y, std::mt19937_64& rng);

/// null_mean / observed with 0/0 = 0 and the result clipped to 1.
double fdr_ratio(double null_mean, std::uint64_t observed);

/// Distinct observed pair statistics in decreasing order, followed by 0 so
/// that every rejection set {lambda' > lambda} is represented.
std::vector<double> default_lambda_grid(const TestStatistics& stats);

struct FdrOptions {
    std::size_t permutations = 100;
    std::uint64_t seed = 1;
    /// Descending thresholds; empty selects `default_lambda_grid`.
    std::vector<double> lambda_grid;
    unsigned threads = 1;
    std::size_t cache_budget_bytes = std::size_t{256} << 20;
};

FdrCurve estimate_fdr(const ClassedDataset& data, const ContrastSet& contrasts, const FdrOptions& options = {});

/// Pair statistics from each permutation, in permutation order; exposed for
/// diagnostics and tests of the pooled count.
std::vector<std::vector<double>> permutation_pair_statistics(const ClassedDataset& data, const ContrastSet& contrasts,
                                                             const FdrOptions& options);

void write_fdr_tsv(std::ostream& out, const FdrCurve& curve);

}  // namespace cht
