#include <doctest.h>

#include "cht/contrasts.hpp"
#include "helpers.hpp"

#include <cmath>
#include <sstream>

using namespace cht;
using cht::testing::random_dataset;

TEST_CASE("moments and main contrast by hand") {
    Matrix<double> x(4, 2);
    x << 1, 0, 3, 1, 0, 5, 2, 2;
    const auto d = make_dataset(x, {1, 1, 2, 2});
    const auto m = compute_moments(d);
    CHECK(m.mean(0, 0) == doctest::Approx(2.0));
    CHECK(m.mean(1, 0) == doctest::Approx(1.0));
    CHECK(m.pooled_sd(0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(main_contrast(d, m, 0) == doctest::Approx(0.70710678118654752).epsilon(1e-14));
    CHECK(main_contrast(swap_labels(d), compute_moments(swap_labels(d)), 0) ==
          doctest::Approx(-0.70710678118654752).epsilon(1e-14));
}

TEST_CASE("interaction contrast by hand") {
    CHECK(interaction_contrast(testing::vec({1, 3, 0, 2}), {1, 1, 2, 2}) ==
          doctest::Approx(0.70710678118654752).epsilon(1e-14));
    CHECK(interaction_contrast(testing::vec({1, 3, 0, 2}), {2, 2, 1, 1}) ==
          doctest::Approx(-0.70710678118654752).epsilon(1e-14));
    CHECK(interaction_contrast(testing::vec({1, 3, 1, 3}), {1, 1, 2, 2}) == 0.0);
    CHECK_THROWS_AS(interaction_contrast(testing::vec({2, 2, 2, 2}), {1, 1, 2, 2}), DegenerateError);
}

TEST_CASE("interaction observations with two rows per class") {
    Matrix<double> x(4, 2);
    x << 0, 0, 2, 2, 5, 1, 7, 4;
    const auto d = make_dataset(x, {1, 1, 2, 2});
    const auto m = compute_moments(d);
    const auto zi = interaction_observations(d, m, 0, 1);
    CHECK(zi(0) == doctest::Approx(0.5));
    CHECK(zi(1) == doctest::Approx(0.5));
    CHECK(interaction_observations(d, m, 1, 0) == zi);
}

TEST_CASE("observation at both class means gives zero") {
    Matrix<double> x(6, 2);
    x << 1, 1, 0, 3, 2, -1, 5, 5, 4, 6, 6, 4;
    const auto d = make_dataset(x, {1, 1, 1, 2, 2, 2});
    const auto zi = interaction_observations(d, compute_moments(d), 0, 1);
    CHECK(zi(0) == 0.0);
    CHECK(zi(3) == 0.0);
}

TEST_CASE("degenerate feature is an error") {
    Matrix<double> x(4, 2);
    x << 1, 0, 1, 1, 0, 5, 2, 2;
    CHECK_THROWS_AS(compute_moments(make_dataset(x, {1, 1, 2, 2})), DegenerateError);
}

TEST_CASE("symmetry, antisymmetry and affine invariance") {
    const auto d = random_dataset(30, 5, 11, 0.5);
    const auto c = compute_all_contrasts(d);
    CHECK(c.z == c.z.transpose());
    const auto s = compute_all_contrasts(swap_labels(d));
    CHECK(s.w.isApprox(-c.w, 1e-12));
    CHECK((s.z + c.z).cwiseAbs().maxCoeff() < 1e-12);

    auto scaled = d;
    scaled.x.col(2) = 3.5 * scaled.x.col(2).array() + 7.0;
    const auto a = compute_all_contrasts(scaled);
    CHECK(std::abs(std::abs(a.w(2)) - std::abs(c.w(2))) < 1e-12);
    CHECK((a.z - c.z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("p = 2 has one interaction") {
    const auto c = compute_all_contrasts(random_dataset(10, 2, 2));
    CHECK(c.z.rows() == 2);
    CHECK(c.z(0, 1) == c.z(1, 0));
    CHECK(c.z(0, 0) == 0.0);
}

TEST_CASE("streamed and materialized modes agree exactly") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Index p = 2 + static_cast<Index>(seed % 9);
        const auto d = random_dataset(10 + static_cast<Index>(seed * 2), p, seed, 0.3);
        ContrastOptions streamed, materialized;
        materialized.mode = ContrastMode::Materialized;
        materialized.threads = 3;
        const auto a = compute_all_contrasts(d, streamed);
        const auto b = compute_all_contrasts(d, materialized);
        CHECK(a.w == b.w);
        CHECK(a.z == b.z);
    }
}

TEST_CASE("materialized mode respects the byte budget") {
    ContrastOptions o;
    o.mode = ContrastMode::Materialized;
    o.cache_budget_bytes = 64;
    CHECK_THROWS_AS(compute_all_contrasts(random_dataset(40, 6, 1), o), DomainError);
}

TEST_CASE("interaction cache returns identical observations") {
    const auto d = random_dataset(20, 6, 5);
    const auto m = compute_moments(d);
    const InteractionCache full(d, m, std::size_t{1} << 20);
    const InteractionCache none(d, m, 0);
    CHECK(full.cached_pairs() == 15);
    CHECK(none.cached_pairs() == 0);
    Vector<double> s1, s2;
    for (const auto& [j, k] : all_pairs(6)) CHECK(full.get(j, k, s1) == none.get(j, k, s2));
}

TEST_CASE("thread count does not change results") {
    const auto d = random_dataset(40, 8, 9, 0.2);
    ContrastOptions one, many;
    many.threads = 8;
    const auto a = compute_all_contrasts(d, one);
    const auto b = compute_all_contrasts(d, many);
    CHECK(a.z == b.z);
}

TEST_CASE("TSV export") {
    const auto d = random_dataset(10, 3, 4);
    std::ostringstream out;
    write_contrasts_tsv(out, compute_all_contrasts(d), d.feature_names);
    const auto s = out.str();
    CHECK(s.rfind("# main\nfeature\tw\n", 0) == 0);
    CHECK(s.find("# interaction\nfeature_j\tfeature_k\tz\n") != std::string::npos);
    CHECK(s.find("V1\tV2\t") != std::string::npos);
}
