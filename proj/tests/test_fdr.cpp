#include <doctest.h>

#include "cht/fdr.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace cht;
using cht::testing::random_dataset;

TEST_CASE("identity regrouping reproduces the interaction contrasts") {
    const auto data = random_dataset(40, 8, 2, 0.5);
    const auto moments = compute_moments(data);
    const auto contrasts = compute_all_contrasts(data);
    const auto z = permuted_interaction_contrasts(data, moments, data.y);
    CHECK((z - contrasts.z).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("swapping balanced classes negates the interaction contrasts") {
    const auto data = random_dataset(40, 8, 4, 0.5);
    const auto moments = compute_moments(data);
    std::vector<int> swapped = data.y;
    for (int& v : swapped) v = 3 - v;
    const auto z = permuted_interaction_contrasts(data, moments, swapped);
    CHECK((z + compute_all_contrasts(data).z).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("regrouping must be a permutation") {
    const auto data = random_dataset(10, 3, 1);
    const auto moments = compute_moments(data);
    std::vector<int> bad(10, 1);
    CHECK_THROWS_AS(permuted_interaction_contrasts(data, moments, bad), DomainError);
    CHECK_THROWS_AS(permuted_interaction_contrasts(data, moments, std::vector<int>(9, 1)), DomainError);
}

TEST_CASE("permuted statistics match observed ones under the null") {
    // 200 vs 200 observations of pure noise: the observed and permuted pair
    // statistics should look alike by a two-sample Kolmogorov-Smirnov test.
    int accepted = 0;
    const int datasets = 20;
    for (int d = 0; d < datasets; ++d) {
        const auto data = random_dataset(400, 20, 100 + d);
        const auto contrasts = compute_all_contrasts(data);
        auto observed = pair_statistics(compute_test_statistics(contrasts));
        FdrOptions options;
        options.permutations = 1;
        options.seed = 500 + d;
        auto permuted = permutation_pair_statistics(data, contrasts, options).front();
        std::sort(observed.begin(), observed.end());
        std::sort(permuted.begin(), permuted.end());
        const double m = static_cast<double>(observed.size());
        double ks = 0;
        std::size_t a = 0, b = 0;
        while (a < observed.size() && b < permuted.size()) {
            const double t = std::min(observed[a], permuted[b]);
            while (a < observed.size() && observed[a] <= t) ++a;
            while (b < permuted.size() && permuted[b] <= t) ++b;
            ks = std::max(ks, std::abs(static_cast<double>(a) - static_cast<double>(b)) / m);
        }
        const double critical = 1.628 * std::sqrt(2.0 / m);
        if (ks < critical) ++accepted;
    }
    CHECK(accepted >= 18);
}

TEST_CASE("fdr ratio") {
    CHECK(fdr_ratio(2.0, 5) == 0.4);
    CHECK(fdr_ratio(0.0, 0) == 0.0);
    CHECK(fdr_ratio(3.0, 0) == 0.0);
    CHECK(fdr_ratio(10.0, 2) == 1.0);
}

TEST_CASE("default grid") {
    TestStatistics stats;
    stats.lambda_main = Vector<double>::Zero(3);
    stats.lambda_int_asym = Matrix<double>::Zero(3, 3);
    stats.lambda_int = Matrix<double>::Zero(3, 3);
    stats.lambda_int(0, 1) = stats.lambda_int(1, 0) = 2.0;
    stats.lambda_int(0, 2) = stats.lambda_int(2, 0) = 2.0;
    stats.lambda_int(1, 2) = stats.lambda_int(2, 1) = 0.5;
    CHECK(default_lambda_grid(stats) == std::vector<double>{2.0, 0.5, 0.0});
}

TEST_CASE("curve structure, determinism and pooled counts") {
    const auto data = random_dataset(60, 10, 9, 0.4);
    const auto contrasts = compute_all_contrasts(data);
    FdrOptions options;
    options.permutations = 25;
    options.seed = 77;
    const auto curve = estimate_fdr(data, contrasts, options);
    const std::size_t g = curve.lambda_grid.size();
    REQUIRE(g >= 2);
    CHECK(curve.lambda_grid.back() == 0.0);
    CHECK(curve.observed_exceed.back() > 0);
    for (std::size_t i = 1; i < g; ++i) {
        CHECK(curve.observed_exceed[i] >= curve.observed_exceed[i - 1]);
        CHECK(curve.null_exceed_total[i] >= curve.null_exceed_total[i - 1]);
    }
    for (double f : curve.fdr_hat) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }

    auto threaded = options;
    threaded.threads = 5;
    const auto again = estimate_fdr(data, contrasts, threaded);
    CHECK(again.null_exceed_total == curve.null_exceed_total);
    CHECK(again.fdr_hat == curve.fdr_hat);

    auto other = options;
    other.seed = 78;
    CHECK(estimate_fdr(data, contrasts, other).null_exceed_total != curve.null_exceed_total);

    const auto per_perm = permutation_pair_statistics(data, contrasts, options);
    REQUIRE(per_perm.size() == 25);
    for (std::size_t i = 0; i < g; ++i) {
        std::uint64_t total = 0;
        for (const auto& stats : per_perm)
            total += static_cast<std::uint64_t>(
                std::count_if(stats.begin(), stats.end(), [&](double s) { return s > curve.lambda_grid[i]; }));
        CHECK(total == curve.null_exceed_total[i]);
        CHECK(curve.null_exceed_mean[i] == static_cast<double>(total) / 25.0);
    }
}

TEST_CASE("invalid options") {
    const auto data = random_dataset(20, 4, 1);
    const auto contrasts = compute_all_contrasts(data);
    FdrOptions options;
    options.permutations = 0;
    CHECK_THROWS_AS(estimate_fdr(data, contrasts, options), DomainError);
    options.permutations = 2;
    options.lambda_grid = {0.1, 0.5};
    CHECK_THROWS_AS(estimate_fdr(data, contrasts, options), DomainError);
}
