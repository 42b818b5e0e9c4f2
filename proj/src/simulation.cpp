#include "cht/simulation.hpp"

#include "cht/contrasts.hpp"
#include "cht/fdr.hpp"
#include "cht/parallel.hpp"
#include "cht/test_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cht {

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::Hierarchical: return "hierarchical";
        case Scenario::NoMainEffects: return "no_main_effects";
        case Scenario::AntiHierarchical: return "anti_hierarchical";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    for (Scenario s : {Scenario::Hierarchical, Scenario::NoMainEffects, Scenario::AntiHierarchical})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

bool GroundTruth::is_interaction(const Pair& pr) const {
    return std::binary_search(true_interactions.begin(), true_interactions.end(), pr);
}

namespace {

std::vector<Index> iota_vector(Index p) {
    std::vector<Index> v(static_cast<std::size_t>(p));
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

// Each hub gets `per_hub` partners, dealt from the shuffled pool in turn so
// that partner degrees stay as even as possible.
void attach_stars(const std::vector<Index>& hubs, std::vector<Index> pool, Index per_hub, std::mt19937_64& rng,
                  std::vector<Pair>& out) {
    if (static_cast<Index>(pool.size()) < per_hub) throw DomainError("too few features to attach interactions");
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t next = 0;
    for (Index hub : hubs) {
        std::set<Index> mine;
        while (static_cast<Index>(mine.size()) < per_hub) {
            const Index partner = pool[next++ % pool.size()];
            if (mine.insert(partner).second) out.push_back(make_pair_ordered(hub, partner));
        }
    }
}

}  // namespace

GroundTruth make_ground_truth(const ScenarioConfig& config, std::mt19937_64& rng) {
    const Index p = config.p;
    if (p < 2) throw DomainError("need at least two features");
    if (config.n_main < 0 || config.ints_per_main < 0) throw DomainError("counts must be non-negative");
    GroundTruth truth;
    auto order = iota_vector(p);
    std::shuffle(order.begin(), order.end(), rng);

    const Index n_hub = config.n_main;
    switch (config.scenario) {
        case Scenario::Hierarchical: {
            if (n_hub >= p) throw DomainError("n_main must be smaller than p");
            std::vector<Index> mains(order.begin(), order.begin() + n_hub);
            std::vector<Index> rest(order.begin() + n_hub, order.end());
            truth.true_main = mains;
            attach_stars(mains, rest, config.ints_per_main, rng, truth.true_interactions);
            break;
        }
        case Scenario::AntiHierarchical: {
            if (2 * n_hub >= p) throw DomainError("p too small for disjoint main and hub features");
            std::vector<Index> mains(order.begin(), order.begin() + n_hub);
            std::vector<Index> hubs(order.begin() + n_hub, order.begin() + 2 * n_hub);
            std::vector<Index> rest(order.begin() + 2 * n_hub, order.end());
            truth.true_main = mains;
            attach_stars(hubs, rest, config.ints_per_main, rng, truth.true_interactions);
            break;
        }
        case Scenario::NoMainEffects: {
            // Same number of pairs, placed at random with at most 3 per feature.
            const std::size_t target = static_cast<std::size_t>(n_hub * config.ints_per_main);
            const Index max_degree = 3;
            if (static_cast<std::size_t>(p * max_degree / 2) < target) throw DomainError("too many interactions for p");
            std::vector<Index> degree(static_cast<std::size_t>(p), 0);
            std::set<Pair> chosen;
            std::uniform_int_distribution<Index> pick(0, p - 1);
            for (std::size_t attempts = 0; chosen.size() < target; ++attempts) {
                if (attempts > 1000 * target) throw DomainError("could not place interactions under the degree cap");
                const Index a = pick(rng), b = pick(rng);
                if (a == b || degree[a] >= max_degree || degree[b] >= max_degree) continue;
                if (!chosen.insert(make_pair_ordered(a, b)).second) continue;
                ++degree[a];
                ++degree[b];
            }
            truth.true_interactions.assign(chosen.begin(), chosen.end());
            break;
        }
    }
    std::sort(truth.true_main.begin(), truth.true_main.end());
    std::sort(truth.true_interactions.begin(), truth.true_interactions.end());
    return truth;
}

ClassedDataset sample_gaussian_classes(Index n, Index p, const GroundTruth& truth, double delta, double rho,
                                       std::mt19937_64& rng) {
    if (n < 4) throw DomainError("need at least 4 observations");
    const Index n1 = n / 2;
    const Index n2 = n - n1;
    Matrix<double> x(n, p);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::normal_distribution<double> normal;
    Index row = 0;
    for (int label : {1, 2}) {
        const double sign = label == 1 ? 1.0 : -1.0;
        Vector<double> mean = Vector<double>::Zero(p);
        for (Index j : truth.true_main) mean(j) = sign * delta / 2;
        Matrix<double> cov = Matrix<double>::Identity(p, p);
        for (const auto& [j, k] : truth.true_interactions) cov(j, k) = cov(k, j) = sign * rho / 2;
        const Eigen::LLT<Matrix<double>> llt(cov);
        if (llt.info() != Eigen::Success)
            throw DomainError("class covariance is not positive definite; reduce the interaction strength");
        const Matrix<double> L = llt.matrixL();
        const Index count = label == 1 ? n1 : n2;
        Vector<double> e(p);
        for (Index i = 0; i < count; ++i, ++row) {
            for (Index j = 0; j < p; ++j) e(j) = normal(rng);
            x.row(row) = (mean + L * e).transpose();
            y[static_cast<std::size_t>(row)] = label;
        }
    }
    return make_dataset(std::move(x), std::move(y));
}

SimulatedData generate_scenario(const ScenarioConfig& config) {
    auto truth_rng = substream(config.seed, 0, 0x7472757468);
    auto data_rng = substream(config.seed, 0, 0x64617461);
    auto truth = make_ground_truth(config, truth_rng);
    auto data = sample_gaussian_classes(config.n, config.p, truth, config.main_effect_size,
                                        config.interaction_strength, data_rng);
    return {std::move(data), std::move(truth)};
}

std::vector<std::size_t> false_counts(const std::vector<Pair>& ranking, const GroundTruth& truth) {
    std::vector<std::size_t> out(ranking.size());
    std::size_t f = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        if (!truth.is_interaction(ranking[r])) ++f;
        out[r] = f;
    }
    return out;
}

std::size_t true_positives_at_fdp(const std::vector<Pair>& ranking, const GroundTruth& truth, double max_fdp) {
    const auto f = false_counts(ranking, truth);
    std::size_t best = 0;
    for (std::size_t r = 1; r <= f.size(); ++r)
        if (static_cast<double>(f[r - 1]) <= max_fdp * static_cast<double>(r)) best = r - f[r - 1];
    return best;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t rep) { return substream(seed, rep, 0x726570)(); }

FdpCurves run_fdr_experiment(const ScenarioConfig& config, const std::vector<Method>& methods, std::size_t max_rank,
                             const ExperimentOptions& options) {
    if (options.reps < 1) throw DomainError("reps must be at least 1");
    const std::size_t n_pairs = static_cast<std::size_t>(config.p * (config.p - 1) / 2);
    if (max_rank < 1 || max_rank > n_pairs) throw DomainError("max_rank must be between 1 and the number of pairs");
    // fdp[rep][method][rank]
    std::vector<std::vector<std::vector<double>>> fdp(options.reps);
    parallel_for(options.reps, options.threads, [&](std::size_t rep) {
        ScenarioConfig c = config;
        c.seed = replicate_seed(config.seed, rep);
        const auto sim = generate_scenario(c);
        const auto contrasts = compute_all_contrasts(sim.data);
        for (Method m : methods) {
            const auto f = false_counts(rank_pairs(contrasts, m, options.screening_quantile), sim.truth);
            std::vector<double> curve(max_rank);
            for (std::size_t r = 1; r <= max_rank; ++r)
                curve[r - 1] = static_cast<double>(f[r - 1]) / static_cast<double>(r);
            fdp[rep].push_back(std::move(curve));
        }
    });
    FdpCurves out;
    out.methods = methods;
    out.reps = options.reps;
    out.mean_fdp.assign(methods.size(), std::vector<double>(max_rank, 0.0));
    for (const auto& rep : fdp)
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (std::size_t r = 0; r < max_rank; ++r) out.mean_fdp[m][r] += rep[m][r];
    for (auto& curve : out.mean_fdp)
        for (auto& v : curve) v /= static_cast<double>(options.reps);
    return out;
}

std::vector<PowerRow> run_power_experiment(const ScenarioConfig& config, const std::vector<Index>& ns,
                                           const std::vector<double>& deltas, const std::vector<Method>& methods,
                                           double max_fdp, const ExperimentOptions& options) {
    if (options.reps < 1) throw DomainError("reps must be at least 1");
    struct Cell {
        Index n;
        double delta;
    };
    std::vector<Cell> cells;
    for (Index n : ns)
        for (double d : deltas) cells.push_back({n, d});
    const std::size_t n_jobs = cells.size() * options.reps;
    // tp[job][method]
    std::vector<std::vector<double>> tp(n_jobs);
    parallel_for(n_jobs, options.threads, [&](std::size_t job) {
        const Cell& cell = cells[job / options.reps];
        ScenarioConfig c = config;
        c.n = cell.n;
        c.main_effect_size = cell.delta;
        c.seed = replicate_seed(config.seed, job % options.reps);
        const auto sim = generate_scenario(c);
        const auto contrasts = compute_all_contrasts(sim.data);
        for (Method m : methods)
            tp[job].push_back(static_cast<double>(
                true_positives_at_fdp(rank_pairs(contrasts, m, options.screening_quantile), sim.truth, max_fdp)));
    });
    std::vector<PowerRow> out;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        for (std::size_t m = 0; m < methods.size(); ++m) {
            double sum = 0, sum_sq = 0;
            for (std::size_t r = 0; r < options.reps; ++r) {
                const double v = tp[ci * options.reps + r][m];
                sum += v;
                sum_sq += v * v;
            }
            const double reps = static_cast<double>(options.reps);
            const double mean = sum / reps;
            const double var = options.reps > 1 ? std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1)) : 0.0;
            out.push_back({cells[ci].n, cells[ci].delta, methods[m], mean, std::sqrt(var / reps)});
        }
    return out;
}

FdrAccuracy run_fdr_estimation_experiment(const ScenarioConfig& config, std::size_t permutations,
                                          const ExperimentOptions& options) {
    if (options.reps < 1) throw DomainError("reps must be at least 1");
    const std::size_t n_pairs = static_cast<std::size_t>(config.p * (config.p - 1) / 2);
    // Per replicate: estimate and true FDP by rejection set size (NaN when
    // ties make a size unreachable).
    std::vector<std::vector<double>> est(options.reps), truth_fdp(options.reps);
    parallel_for(options.reps, options.threads, [&](std::size_t rep) {
        ScenarioConfig c = config;
        c.seed = replicate_seed(config.seed, rep);
        const auto sim = generate_scenario(c);
        const auto contrasts = compute_all_contrasts(sim.data);
        FdrOptions fo;
        fo.permutations = permutations;
        fo.seed = c.seed;
        const auto curve = estimate_fdr(sim.data, contrasts, fo);
        const auto f = false_counts(rank_pairs(contrasts, Method::Cht), sim.truth);
        est[rep].assign(n_pairs, std::nan(""));
        truth_fdp[rep].assign(n_pairs, std::nan(""));
        for (std::size_t g = 0; g < curve.lambda_grid.size(); ++g) {
            const std::size_t r = curve.observed_exceed[g];
            if (r == 0) continue;
            est[rep][r - 1] = curve.fdr_hat[g];
            truth_fdp[rep][r - 1] = static_cast<double>(f[r - 1]) / static_cast<double>(r);
        }
    });
    FdrAccuracy out;
    out.reps = options.reps;
    out.permutations = permutations;
    out.mean_estimate.assign(n_pairs, 0.0);
    out.mean_true_fdp.assign(n_pairs, 0.0);
    for (std::size_t r = 0; r < n_pairs; ++r) {
        std::size_t seen = 0;
        for (std::size_t rep = 0; rep < options.reps; ++rep) {
            if (std::isnan(est[rep][r])) continue;
            out.mean_estimate[r] += est[rep][r];
            out.mean_true_fdp[r] += truth_fdp[rep][r];
            ++seen;
        }
        if (seen == 0) {
            out.mean_estimate[r] = out.mean_true_fdp[r] = std::nan("");
        } else {
            out.mean_estimate[r] /= static_cast<double>(seen);
            out.mean_true_fdp[r] /= static_cast<double>(seen);
        }
    }
    return out;
}

}  // namespace cht
