#pragma once

#include "cht/dataset.hpp"
#include "cht/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace cht {

/// Per-class feature means and standard deviations.
///
/// Rows of `mean` and `sd` are indexed by class (row 0 = class 1, row 1 =
/// class 2). Class standard deviations use the n_l - 1 denominator;
/// `pooled_sd` is the two-sample pooled value with n1 + n2 - 2.
struct ClassMoments {
    Matrix<double> mean;  // 2 x p
    Matrix<double> sd;    // 2 x p
    Vector<double> pooled_sd;
};

/// Main-effect and interaction t-statistics. `z` is symmetric with an unused
/// (zero) diagonal.
struct ContrastSet {
    Vector<double> w;
    Matrix<double> z;

    Index p() const { return w.size(); }
};

ClassMoments compute_moments(const ClassedDataset& data);

/// Two-sample t-statistic of feature j, class 1 minus class 2.
double main_contrast(const ClassedDataset& data, const ClassMoments& moments, Index j);

/// Per-observation standardized cross-products of features j and k, centered
/// and scaled within each observation's class.
Vector<double> interaction_observations(const ClassedDataset& data, const ClassMoments& moments, Index j, Index k);

/// Pooled two-sample t-statistic of `values` grouped by `labels` (class 1
/// minus class 2). Throws DegenerateError when the pooled spread is zero.
double interaction_contrast(const Vector<double>& values, const std::vector<int>& labels);

enum class ContrastMode {
    /// One pair at a time; memory is O(N) beyond the output.
    Streamed,
    /// Builds the N x p(p-1)/2 table of interaction observations first.
    Materialized,
};

struct ContrastOptions {
    ContrastMode mode = ContrastMode::Streamed;
    /// Upper bound on the materialized table; exceeding it is an error.
    std::size_t cache_budget_bytes = std::size_t{256} << 20;
    unsigned threads = 1;
};

ContrastSet compute_all_contrasts(const ClassedDataset& data, const ContrastOptions& options = {});

/// Pair index order used throughout: (0,1), (0,2), ..., (0,p-1), (1,2), ...
std::vector<Pair> all_pairs(Index p);

/// Interaction observations for every pair, computed once and kept while
/// they fit in `budget_bytes`; pairs past the budget are recomputed on demand.
class InteractionCache {
public:
    InteractionCache(const ClassedDataset& data, const ClassMoments& moments, std::size_t budget_bytes);

    /// Observations of pair (j, k); `scratch` is used when the pair is not cached.
    const Vector<double>& get(Index j, Index k, Vector<double>& scratch) const;

    std::size_t cached_pairs() const { return cached_; }

private:
    std::size_t pair_slot(Index j, Index k) const;

    const ClassedDataset& data_;
    const ClassMoments& moments_;
    std::vector<Vector<double>> columns_;
    std::size_t cached_ = 0;
};

/// Writes `main` and `interaction` blocks with 17-digit decimals.
void write_contrasts_tsv(std::ostream& out, const ContrastSet& contrasts, const std::vector<std::string>& names);

}  // namespace cht
