#pragma once

#include "cht/contrasts.hpp"
#include "cht/dataset.hpp"
#include "cht/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cht {

/// Pair ranking procedures.
enum class Method {
    Cht,
    /// |z| alone, no hierarchy.
    AllPairs,
    /// |z| among pairs whose both main effects pass the screen.
    ScreenStrong,
    /// |z| among pairs with at least one main effect passing the screen.
    ScreenWeak,
};

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

enum class ScreeningMode { Strong, Weak };

struct ScreeningConfig {
    /// Strictly inside (0, 1).
    double quantile = 0.75;
    ScreeningMode mode = ScreeningMode::Strong;
};

/// |z_jk| with a zero diagonal.
Matrix<double> all_pairs_stats(const ContrastSet& contrasts);

/// Screening threshold on {|w_j|}: the k-th smallest value with
/// k = floor(quantile * p), or -inf when k = 0. A feature passes when its
/// |w| is strictly greater.
double screening_threshold(const Vector<double>& w, double quantile);

struct ScreeningResult {
    double threshold = 0;
    std::vector<Pair> candidates;  // all_pairs order
    /// |z_jk| on candidates, zero elsewhere.
    Matrix<double> statistics;
};

ScreeningResult screen_two_stage(const ContrastSet& contrasts, const ScreeningConfig& config = {});

/// Every pair in decreasing order of preference under `method`. Screening
/// methods rank candidates by |z| first and then the remaining pairs by |z|,
/// so the list is always complete. Ties are broken by (j, k).
std::vector<Pair> rank_pairs(const ContrastSet& contrasts, Method method, double screening_quantile = 0.75,
                             unsigned threads = 1);

struct PairFrequency {
    Pair pair;
    double frequency = 0;
};

struct ResamplingOptions {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// Redraws allowed per replicate when a resample has zero spread.
    int max_retries = 100;
    double screening_quantile = 0.75;
};

/// Fraction of B class-stratified bootstrap samples in which each pair is
/// among the top k. Only pairs that appear at least once are returned,
/// sorted by frequency (descending), then by pair.
std::vector<PairFrequency> bootstrap_topk_frequency(const ClassedDataset& data, Method method, std::size_t k,
                                                    std::size_t B, const ResamplingOptions& options = {});

/// Overlap |top_k(A) ∩ top_k(B)| / k for k = 1..k_max on a fixed split.
std::vector<double> split_overlap(const ClassedDataset& data, const std::vector<Index>& half_a,
                                  const std::vector<Index>& half_b, Method method, std::size_t k_max,
                                  double screening_quantile = 0.75);

/// Mean of `split_overlap` over `reps` random class-stratified halvings.
std::vector<double> split_half_overlap(const ClassedDataset& data, Method method, std::size_t k_max,
                                       std::size_t reps, const ResamplingOptions& options = {});

}  // namespace cht
