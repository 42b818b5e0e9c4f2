#pragma once

#include "cht/baselines.hpp"
#include "cht/dataset.hpp"
#include "cht/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace cht {

enum class Scenario {
    /// Interactions hang off the main-effect features.
    Hierarchical,
    /// Interactions only; no feature has a mean shift.
    NoMainEffects,
    /// Interactions only among features without a main effect.
    AntiHierarchical,
};

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

/// Effect sizes used by the stock experiments. The mean shift is in sd
/// units; the interaction value is the class correlation difference.
inline constexpr double kWeakMainEffect = 0.5;
inline constexpr double kModerateMainEffect = 1.0;
inline constexpr double kStrongMainEffect = 3.0;
inline constexpr double kDefaultInteraction = 0.45;

struct ScenarioConfig {
    Scenario scenario = Scenario::Hierarchical;
    Index n = 200;
    Index p = 50;
    Index n_main = 5;
    Index ints_per_main = 9;
    /// Class mean difference on each main feature, in sd units.
    double main_effect_size = kStrongMainEffect;
    /// Class correlation difference on each interacting pair.
    double interaction_strength = kDefaultInteraction;
    std::uint64_t seed = 1;
};

struct GroundTruth {
    std::vector<Index> true_main;             // ascending
    std::vector<Pair> true_interactions;      // ascending

    bool is_interaction(const Pair& pr) const;
};

/// Pair set for the scenario; main features and partners are random.
GroundTruth make_ground_truth(const ScenarioConfig& config, std::mt19937_64& rng);

/// Class l is N(mu_l, Sigma_l): mu_l = +-delta/2 on true mains, Sigma_l the
/// identity with +-rho/2 on true pairs (class 1 positive). Class sizes are
/// floor(n/2) and the remainder. Throws DomainError when Sigma_l is not
/// positive definite.
ClassedDataset sample_gaussian_classes(Index n, Index p, const GroundTruth& truth, double delta, double rho,
                                       std::mt19937_64& rng);

struct SimulatedData {
    ClassedDataset data;
    GroundTruth truth;
};

SimulatedData generate_scenario(const ScenarioConfig& config);

/// False pairs among the first r of `ranking`, for r = 1..ranking.size().
std::vector<std::size_t> false_counts(const std::vector<Pair>& ranking, const GroundTruth& truth);

/// Largest top-r set with false fraction <= max_fdp; returns its true positives.
std::size_t true_positives_at_fdp(const std::vector<Pair>& ranking, const GroundTruth& truth, double max_fdp);

struct ExperimentOptions {
    std::size_t reps = 10;
    unsigned threads = 1;
    double screening_quantile = 0.75;
};

/// Mean true FDP at ranks 1..max_rank, one row per method.
struct FdpCurves {
    std::vector<Method> methods;
    std::vector<std::vector<double>> mean_fdp;  // [method][rank - 1]
    std::size_t reps = 0;
};

/// Replicate r uses the dataset of `generate_scenario` with seed
/// `replicate_seed(config.seed, r)`.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t rep);

FdpCurves run_fdr_experiment(const ScenarioConfig& config, const std::vector<Method>& methods, std::size_t max_rank,
                             const ExperimentOptions& options = {});

struct PowerRow {
    Index n = 0;
    double main_effect_size = 0;
    Method method = Method::Cht;
    double mean_true_positives = 0;
    double se_true_positives = 0;
};

/// Mean true positives at true FDP <= max_fdp over the grid of sample sizes
/// and main effect sizes.
std::vector<PowerRow> run_power_experiment(const ScenarioConfig& config, const std::vector<Index>& ns,
                                           const std::vector<double>& deltas, const std::vector<Method>& methods,
                                           double max_fdp = 0.2, const ExperimentOptions& options = {});

/// Permutation FDR estimate against true FDP, indexed by rejection set size.
struct FdrAccuracy {
    std::vector<double> mean_estimate;  // [r - 1]
    std::vector<double> mean_true_fdp;  // [r - 1]
    std::size_t reps = 0;
    std::size_t permutations = 0;
};

FdrAccuracy run_fdr_estimation_experiment(const ScenarioConfig& config, std::size_t permutations,
                                          const ExperimentOptions& options = {});

}  // namespace cht
