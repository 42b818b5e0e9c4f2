#include "cht/fdr.hpp"

#include "cht/format.hpp"
#include "cht/parallel.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <ostream>

namespace cht {

namespace {

void require_permutation_of(const std::vector<int>& y, const std::vector<int>& y_star) {
    if (y.size() != y_star.size()) throw DomainError("permuted labels differ in length from the original labels");
    const auto ones = std::count(y.begin(), y.end(), 1);
    const auto ones_star = std::count(y_star.begin(), y_star.end(), 1);
    const auto twos_star = std::count(y_star.begin(), y_star.end(), 2);
    if (ones != ones_star || ones_star + twos_star != static_cast<std::ptrdiff_t>(y_star.size()))
        throw DomainError("permuted labels are not a permutation of the original labels");
}

// Number of entries of a descending-sorted vector strictly above t.
std::uint64_t count_above(const std::vector<double>& sorted_desc, double t) {
    return static_cast<std::uint64_t>(
        std::upper_bound(sorted_desc.begin(), sorted_desc.end(), t, std::greater<double>()) - sorted_desc.begin());
}

}  // namespace

Matrix<double> permuted_interaction_contrasts(const InteractionCache& cache, Index p, const std::vector<int>& y_star) {
    Matrix<double> z = Matrix<double>::Zero(p, p);
    Vector<double> scratch;
    for (const auto& [j, k] : all_pairs(p)) {
        const double stat = interaction_contrast(cache.get(j, k, scratch), y_star);
        z(j, k) = stat;
        z(k, j) = stat;
    }
    return z;
}

Matrix<double> permuted_interaction_contrasts(const ClassedDataset& data, const ClassMoments& moments,
                                              const std::vector<int>& y_star) {
    require_permutation_of(data.y, y_star);
    const InteractionCache cache(data, moments, 0);
    return permuted_interaction_contrasts(cache, data.features(), y_star);
}

std::vector<int> permute_labels(const std::vector<int>& y, std::mt19937_64& rng) {
    std::vector<int> out = y;
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

namespace {

std::vector<double> permuted_pair_statistics(const InteractionCache& cache, const ClassedDataset& data,
                                             const ContrastSet& contrasts, std::uint64_t seed, std::size_t b) {
    auto rng = substream(seed, b, 0x66647221);
    const auto y_star = permute_labels(data.y, rng);
    ContrastSet permuted{contrasts.w, permuted_interaction_contrasts(cache, data.features(), y_star)};
    return pair_statistics(compute_test_statistics(permuted));
}

}  // namespace

double fdr_ratio(double null_mean, std::uint64_t observed) {
    if (observed == 0) return 0.0;
    return std::min(1.0, null_mean / static_cast<double>(observed));
}

std::vector<double> default_lambda_grid(const TestStatistics& stats) {
    std::vector<double> grid = pair_statistics(stats);
    std::sort(grid.begin(), grid.end(), std::greater<double>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.back() > 0.0) grid.push_back(0.0);
    return grid;
}

std::vector<std::vector<double>> permutation_pair_statistics(const ClassedDataset& data, const ContrastSet& contrasts,
                                                             const FdrOptions& options) {
    if (options.permutations < 1) throw DomainError("at least one permutation is required");
    const ClassMoments moments = compute_moments(data);
    const InteractionCache cache(data, moments, options.cache_budget_bytes);
    std::vector<std::vector<double>> out(options.permutations);
    parallel_for(options.permutations, options.threads, [&](std::size_t b) {
        out[b] = permuted_pair_statistics(cache, data, contrasts, options.seed, b);
    });
    return out;
}

FdrCurve estimate_fdr(const ClassedDataset& data, const ContrastSet& contrasts, const FdrOptions& options) {
    if (options.permutations < 1) throw DomainError("at least one permutation is required");
    const TestStatistics observed = compute_test_statistics(contrasts);
    FdrCurve curve;
    curve.permutations = options.permutations;
    curve.seed = options.seed;
    curve.lambda_grid = options.lambda_grid.empty() ? default_lambda_grid(observed) : options.lambda_grid;
    if (!std::is_sorted(curve.lambda_grid.begin(), curve.lambda_grid.end(), std::greater<double>()))
        throw DomainError("lambda grid must be in decreasing order");

    auto observed_sorted = pair_statistics(observed);
    std::sort(observed_sorted.begin(), observed_sorted.end(), std::greater<double>());
    const std::size_t n_grid = curve.lambda_grid.size();

    const ClassMoments moments = compute_moments(data);
    const InteractionCache cache(data, moments, options.cache_budget_bytes);
    curve.null_exceed_total.assign(n_grid, 0);
    std::mutex total_mutex;
    parallel_for(options.permutations, options.threads, [&](std::size_t b) {
        auto stats = permuted_pair_statistics(cache, data, contrasts, options.seed, b);
        std::sort(stats.begin(), stats.end(), std::greater<double>());
        std::vector<std::uint64_t> counts(n_grid);
        for (std::size_t g = 0; g < n_grid; ++g) counts[g] = count_above(stats, curve.lambda_grid[g]);
        // Integer sums, so the accumulation order does not matter.
        std::lock_guard lock(total_mutex);
        for (std::size_t g = 0; g < n_grid; ++g) curve.null_exceed_total[g] += counts[g];
    });
    for (std::size_t g = 0; g < n_grid; ++g) {
        curve.observed_exceed.push_back(count_above(observed_sorted, curve.lambda_grid[g]));
        curve.null_exceed_mean.push_back(static_cast<double>(curve.null_exceed_total[g]) /
                                         static_cast<double>(options.permutations));
        curve.fdr_hat.push_back(fdr_ratio(curve.null_exceed_mean[g], curve.observed_exceed[g]));
    }
    return curve;
}

void write_fdr_tsv(std::ostream& out, const FdrCurve& curve) {
    out << "# permutations=" << curve.permutations << " seed=" << curve.seed << '\n';
    out << "lambda\tobserved_count\tnull_mean\tfdr_hat\n";
    for (std::size_t g = 0; g < curve.lambda_grid.size(); ++g)
        out << format_real(curve.lambda_grid[g]) << '\t' << curve.observed_exceed[g] << '\t'
            << format_real(curve.null_exceed_mean[g]) << '\t' << format_real(curve.fdr_hat[g]) << '\n';
}

}  // namespace cht
