#include <doctest.h>

#include "cht/simulation.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace cht;

namespace {

double class_correlation(const ClassedDataset& data, int cls, Index j, Index k) {
    std::vector<Index> rows;
    for (Index i = 0; i < data.rows(); ++i)
        if (data.y[static_cast<std::size_t>(i)] == cls) rows.push_back(i);
    Vector<double> a(static_cast<Index>(rows.size())), b(a.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        a(static_cast<Index>(r)) = data.x(rows[r], j);
        b(static_cast<Index>(r)) = data.x(rows[r], k);
    }
    a.array() -= a.mean();
    b.array() -= b.mean();
    return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

double class_mean(const ClassedDataset& data, int cls, Index j) {
    double s = 0;
    int c = 0;
    for (Index i = 0; i < data.rows(); ++i)
        if (data.y[static_cast<std::size_t>(i)] == cls) {
            s += data.x(i, j);
            ++c;
        }
    return s / c;
}

}  // namespace

TEST_CASE("scenario names") {
    for (Scenario s : {Scenario::Hierarchical, Scenario::NoMainEffects, Scenario::AntiHierarchical})
        CHECK(parse_scenario(to_string(s)) == s);
    CHECK(!parse_scenario("circular").has_value());
}

TEST_CASE("hierarchical ground truth") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto rng = substream(seed, 0, 1);
        const auto truth = make_ground_truth({}, rng);
        CHECK(truth.true_main.size() == 5);
        CHECK(truth.true_interactions.size() == 45);
        CHECK(std::set<Pair>(truth.true_interactions.begin(), truth.true_interactions.end()).size() == 45);
        const std::set<Index> mains(truth.true_main.begin(), truth.true_main.end());
        for (const auto& pr : truth.true_interactions) {
            CHECK(pr.j < pr.k);
            CHECK(mains.count(pr.j) + mains.count(pr.k) == 1);
            CHECK(truth.is_interaction(pr));
        }
        CHECK(!truth.is_interaction(Pair{truth.true_main[0], truth.true_main[1]}));
    }
}

TEST_CASE("anti-hierarchical and no-main ground truth") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ScenarioConfig config;
        config.scenario = Scenario::AntiHierarchical;
        auto rng = substream(seed, 0, 1);
        auto truth = make_ground_truth(config, rng);
        CHECK(truth.true_main.size() == 5);
        CHECK(truth.true_interactions.size() == 45);
        const std::set<Index> mains(truth.true_main.begin(), truth.true_main.end());
        for (const auto& pr : truth.true_interactions) CHECK(mains.count(pr.j) + mains.count(pr.k) == 0);

        config.scenario = Scenario::NoMainEffects;
        truth = make_ground_truth(config, rng);
        CHECK(truth.true_main.empty());
        CHECK(truth.true_interactions.size() == 45);
        std::map<Index, int> degree;
        for (const auto& pr : truth.true_interactions) {
            ++degree[pr.j];
            ++degree[pr.k];
        }
        for (const auto& [feature, d] : degree) CHECK(d <= 3);
    }
}

TEST_CASE("class distributions") {
    GroundTruth truth;
    truth.true_main = {0};
    truth.true_interactions = {{1, 2}};
    auto rng = substream(5, 0, 1);
    const auto data = sample_gaussian_classes(10000, 4, truth, 1.0, 0.4, rng);
    CHECK(data.rows() == 10000);
    CHECK(std::count(data.y.begin(), data.y.end(), 1) == 5000);
    CHECK(class_mean(data, 1, 0) - class_mean(data, 2, 0) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::abs(class_mean(data, 1, 3) - class_mean(data, 2, 3)) < 0.1);
    CHECK(std::abs(class_correlation(data, 1, 1, 2) - 0.2) < 0.05);
    CHECK(std::abs(class_correlation(data, 2, 1, 2) + 0.2) < 0.05);
    CHECK(std::abs(class_correlation(data, 1, 0, 3)) < 0.05);

    rng = substream(5, 0, 2);
    CHECK_THROWS_AS(sample_gaussian_classes(100, 4, truth, 1.0, 2.5, rng), DomainError);
}

TEST_CASE("scenarios are reproducible") {
    ScenarioConfig config;
    config.seed = 9;
    const auto a = generate_scenario(config);
    const auto b = generate_scenario(config);
    CHECK(a.data.x == b.data.x);
    CHECK(a.data.y == b.data.y);
    CHECK(a.truth.true_interactions == b.truth.true_interactions);
    config.seed = 10;
    CHECK(generate_scenario(config).data.x != a.data.x);
}

TEST_CASE("false counts") {
    GroundTruth truth;
    truth.true_interactions = {{0, 1}, {2, 3}};
    const std::vector<Pair> ranking{{0, 1}, {0, 2}, {2, 3}, {1, 3}, {1, 2}};
    CHECK(false_counts(ranking, truth) == std::vector<std::size_t>{0, 1, 1, 2, 3});
    CHECK(true_positives_at_fdp(ranking, truth, 0.2) == 1);
    CHECK(true_positives_at_fdp(ranking, truth, 0.34) == 2);
    CHECK(true_positives_at_fdp(std::vector<Pair>{{0, 2}}, truth, 0.2) == 0);
}

TEST_CASE("strong hierarchical signal: the top pair is true") {
    ScenarioConfig config;
    ExperimentOptions options;
    options.reps = 3;
    options.threads = 3;
    const auto curves = run_fdr_experiment(config, {Method::Cht, Method::AllPairs}, 10, options);
    REQUIRE(curves.mean_fdp.size() == 2);
    CHECK(curves.mean_fdp[0].size() == 10);
    CHECK(curves.mean_fdp[0][0] == 0.0);

    options.threads = 1;
    const auto serial = run_fdr_experiment(config, {Method::Cht, Method::AllPairs}, 10, options);
    CHECK(serial.mean_fdp == curves.mean_fdp);
}

TEST_CASE("no signal gives no power") {
    ScenarioConfig config;
    config.interaction_strength = 0.0;
    ExperimentOptions options;
    options.reps = 4;
    const auto rows = run_power_experiment(config, {100}, {0.0}, {Method::Cht, Method::AllPairs}, 0.2, options);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.mean_true_positives <= 1.0);
}

TEST_CASE("estimate experiment shape") {
    ScenarioConfig config;
    config.p = 12;
    config.n_main = 2;
    config.ints_per_main = 3;
    ExperimentOptions options;
    options.reps = 2;
    const auto acc = run_fdr_estimation_experiment(config, 5, options);
    CHECK(acc.mean_estimate.size() == 66);
    CHECK(acc.mean_true_fdp.size() == 66);
    CHECK(acc.reps == 2);
    CHECK(acc.permutations == 5);
}
