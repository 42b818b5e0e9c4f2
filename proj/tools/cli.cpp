#include "cli.hpp"

#include "cht/baselines.hpp"
#include "cht/contrasts.hpp"
#include "cht/dataset.hpp"
#include "cht/fdr.hpp"
#include "cht/format.hpp"
#include "cht/parallel.hpp"
#include "cht/row_solver.hpp"
#include "cht/simulation.hpp"
#include "cht/test_stats.hpp"
#include "cht/verification.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cht::cli {

namespace {

using json = nlohmann::ordered_json;

struct Common {
    std::string input;
    std::string output;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool json = false;
    bool no_header = false;
    Index label_column = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_input) {
    if (with_input) {
        sub->add_option("--input", c.input, "CSV file: class label column plus numeric features")->check(CLI::ExistingFile);
        sub->add_flag("--no-header", c.no_header, "Input has no header row");
        sub->add_option("--label-column", c.label_column, "Zero-based column holding labels 1/2")
            ->check(CLI::NonNegativeNumber);
    }
    sub->add_option("--output", c.output, "Write results here instead of standard output");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads (default: $CHT_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--json", c.json, "Emit JSON instead of TSV");
}

// JSON has no infinity; such values are written as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0;
        const auto* first = item.data();
        const auto* last = item.data() + item.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw InputError("invalid number '" + item + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) throw InputError(what + " is empty");
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::vector<Method> parse_methods(const std::string& text) {
    std::vector<Method> out;
    for (const auto& name : split_list(text)) {
        const auto m = parse_method(name);
        if (!m) throw InputError("unknown method '" + name + "' (cht, all_pairs, screen_strong, screen_weak)");
        out.push_back(*m);
    }
    if (out.empty()) throw InputError("no methods given");
    return out;
}

ClassedDataset load_input(const Common& c) {
    if (c.input.empty()) throw InputError("--input is required");
    return load_csv(c.input, {!c.no_header, c.label_column});
}

// ---- test -----------------------------------------------------------------

struct TestArgs {
    std::size_t top = 0;
};

void cmd_test(const Common& c, const TestArgs& a, unsigned threads, std::ostream& out) {
    const auto data = load_input(c);
    ContrastOptions co;
    co.threads = threads;
    const auto contrasts = compute_all_contrasts(data, co);
    const auto stats = compute_test_statistics(contrasts, threads);
    if (!c.json) {
        write_statistics_tsv(out, contrasts, stats, data.feature_names, a.top);
        return;
    }
    const auto& names = data.feature_names;
    std::vector<Index> order(static_cast<std::size_t>(stats.p()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return stats.lambda_main(x) > stats.lambda_main(y); });
    json j;
    j["main"] = json::array();
    for (Index f : order)
        j["main"].push_back({{"feature", names[static_cast<std::size_t>(f)]},
                             {"w", number(contrasts.w(f))},
                             {"lambda_hat", number(stats.lambda_main(f))}});
    const std::size_t n_pairs = static_cast<std::size_t>(stats.p() * (stats.p() - 1) / 2);
    j["interaction"] = json::array();
    for (const auto& [fj, fk] : top_pairs(stats.lambda_int, a.top == 0 ? n_pairs : a.top))
        j["interaction"].push_back({{"j", names[static_cast<std::size_t>(fj)]},
                                    {"k", names[static_cast<std::size_t>(fk)]},
                                    {"z", number(contrasts.z(fj, fk))},
                                    {"lambda_jk", number(stats.lambda_int_asym(fj, fk))},
                                    {"lambda_kj", number(stats.lambda_int_asym(fk, fj))},
                                    {"lambda_prime", number(stats.lambda_int(fj, fk))}});
    out << j.dump(2) << '\n';
}

// ---- fdr ------------------------------------------------------------------

struct FdrArgs {
    std::size_t permutations = 100;
    std::string grid = "auto";
};

std::vector<double> read_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open grid file '" + path + "'");
    std::vector<double> grid;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        grid.push_back(parse_reals(line, "grid file")[0]);
    }
    if (grid.empty()) throw InputError("grid file '" + path + "' has no values");
    return grid;
}

void cmd_fdr(const Common& c, const FdrArgs& a, unsigned threads, std::ostream& out) {
    const auto data = load_input(c);
    ContrastOptions co;
    co.threads = threads;
    const auto contrasts = compute_all_contrasts(data, co);
    FdrOptions fo;
    fo.permutations = a.permutations;
    fo.seed = c.seed;
    fo.threads = threads;
    if (a.grid != "auto") fo.lambda_grid = read_grid(a.grid);
    const auto curve = estimate_fdr(data, contrasts, fo);
    if (!c.json) {
        write_fdr_tsv(out, curve);
        return;
    }
    json j;
    j["permutations"] = curve.permutations;
    j["seed"] = curve.seed;
    j["rows"] = json::array();
    for (std::size_t g = 0; g < curve.lambda_grid.size(); ++g)
        j["rows"].push_back({{"lambda", number(curve.lambda_grid[g])},
                             {"observed_count", curve.observed_exceed[g]},
                             {"null_mean", number(curve.null_exceed_mean[g])},
                             {"fdr_hat", number(curve.fdr_hat[g])}});
    out << j.dump(2) << '\n';
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string experiment = "fdr";
    std::string scenario = "hierarchical";
    Index n = 200;
    Index p = 50;
    Index mains = 5;
    Index ints_per_main = 9;
    std::size_t reps = 10;
    double delta = kStrongMainEffect;
    double rho = kDefaultInteraction;
    std::string methods = "cht,all_pairs,screen_strong,screen_weak";
    std::size_t max_rank = 20;
    std::string ns = "100,200,500,1000";
    std::string deltas;  // empty: weak, moderate, strong
    double max_fdp = 0.2;
    std::size_t permutations = 100;
    std::string truth_path;
};

void cmd_simulate(const Common& c, const SimulateArgs& a, unsigned threads, std::ostream& out) {
    const auto scenario = parse_scenario(a.scenario);
    if (!scenario) throw InputError("unknown scenario '" + a.scenario + "' (hierarchical, no_main_effects, anti_hierarchical)");
    ScenarioConfig config;
    config.scenario = *scenario;
    config.n = a.n;
    config.p = a.p;
    config.n_main = a.mains;
    config.ints_per_main = a.ints_per_main;
    config.main_effect_size = a.delta;
    config.interaction_strength = a.rho;
    config.seed = c.seed;
    ExperimentOptions eo;
    eo.reps = a.reps;
    eo.threads = threads;

    auto header = [&](std::ostream& o) {
        ScenarioConfig first = config;
        first.seed = replicate_seed(config.seed, 0);
        const auto sim = generate_scenario(first);
        o << "# scenario=" << to_string(config.scenario) << " n=" << config.n << " p=" << config.p
          << " reps=" << a.reps << " delta=" << format_real(config.main_effect_size)
          << " rho=" << format_real(config.interaction_strength) << " seed=" << config.seed
          << " true_interactions=" << sim.truth.true_interactions.size() << '\n';
        return sim.truth.true_interactions.size();
    };

    if (a.experiment == "data") {
        const auto sim = generate_scenario(config);
        if (!a.truth_path.empty()) {
            std::ofstream t(a.truth_path);
            if (!t) throw InputError("cannot write '" + a.truth_path + "'");
            t << "kind\tj\tk\n";
            for (Index j : sim.truth.true_main) t << "main\t" << sim.data.feature_names[j] << "\t\n";
            for (const auto& [j, k] : sim.truth.true_interactions)
                t << "interaction\t" << sim.data.feature_names[j] << '\t' << sim.data.feature_names[k] << '\n';
        }
        write_csv(out, sim.data);
        return;
    }
    if (a.experiment == "fdr") {
        const auto methods = parse_methods(a.methods);
        const auto curves = run_fdr_experiment(config, methods, a.max_rank, eo);
        if (c.json) {
            json j;
            j["scenario"] = std::string(to_string(config.scenario));
            j["reps"] = a.reps;
            j["seed"] = config.seed;
            for (std::size_t m = 0; m < methods.size(); ++m) {
                json curve = json::array();
                for (double v : curves.mean_fdp[m]) curve.push_back(number(v));
                j["mean_fdp"][std::string(to_string(methods[m]))] = curve;
            }
            out << j.dump(2) << '\n';
            return;
        }
        header(out);
        out << "rank";
        for (Method m : methods) out << '\t' << to_string(m);
        out << '\n';
        for (std::size_t r = 0; r < a.max_rank; ++r) {
            out << r + 1;
            for (std::size_t m = 0; m < methods.size(); ++m) out << '\t' << format_real(curves.mean_fdp[m][r]);
            out << '\n';
        }
        return;
    }
    if (a.experiment == "power") {
        std::vector<Index> ns;
        for (double v : parse_reals(a.ns, "--ns")) ns.push_back(static_cast<Index>(v));
        const auto deltas = a.deltas.empty()
                                ? std::vector<double>{kWeakMainEffect, kModerateMainEffect, kStrongMainEffect}
                                : parse_reals(a.deltas, "--deltas");
        const auto rows = run_power_experiment(config, ns, deltas, parse_methods(a.methods), a.max_fdp, eo);
        if (c.json) {
            json j = json::array();
            for (const auto& r : rows)
                j.push_back({{"n", r.n},
                             {"delta", number(r.main_effect_size)},
                             {"method", std::string(to_string(r.method))},
                             {"mean_true_positives", number(r.mean_true_positives)},
                             {"se", number(r.se_true_positives)}});
            out << j.dump(2) << '\n';
            return;
        }
        header(out);
        out << "n\tdelta\tmethod\tmean_true_positives\tse\n";
        for (const auto& r : rows)
            out << r.n << '\t' << format_real(r.main_effect_size) << '\t' << to_string(r.method) << '\t'
                << format_real(r.mean_true_positives) << '\t' << format_real(r.se_true_positives) << '\n';
        return;
    }
    if (a.experiment == "estimate") {
        const auto acc = run_fdr_estimation_experiment(config, a.permutations, eo);
        if (c.json) {
            json j = json::array();
            for (std::size_t r = 0; r < acc.mean_estimate.size(); ++r)
                if (!std::isnan(acc.mean_estimate[r]))
                    j.push_back({{"rejections", r + 1},
                                 {"mean_fdr_hat", acc.mean_estimate[r]},
                                 {"mean_true_fdp", acc.mean_true_fdp[r]}});
            out << j.dump(2) << '\n';
            return;
        }
        header(out);
        out << "rejections\tmean_fdr_hat\tmean_true_fdp\n";
        for (std::size_t r = 0; r < acc.mean_estimate.size(); ++r)
            if (!std::isnan(acc.mean_estimate[r]))
                out << r + 1 << '\t' << format_real(acc.mean_estimate[r]) << '\t'
                    << format_real(acc.mean_true_fdp[r]) << '\n';
        return;
    }
    throw InputError("unknown experiment '" + a.experiment + "' (fdr, power, estimate, data)");
}

// ---- path -----------------------------------------------------------------

struct PathArgs {
    std::string w;
    std::string z;
    Index row = -1;
    std::size_t points = 200;
};

void cmd_path(const Common& c, const PathArgs& a, std::ostream& out) {
    double w = 0;
    Vector<double> z;
    std::vector<std::string> names;
    if (!c.input.empty()) {
        if (!a.w.empty() || !a.z.empty()) throw InputError("give either --input with --row or --w with --z");
        const auto data = load_input(c);
        if (a.row < 0 || a.row >= data.features()) throw InputError("--row must index a feature of the input");
        const auto contrasts = compute_all_contrasts(data);
        w = contrasts.w(a.row);
        z = off_diagonal_row(contrasts.z, a.row);
        for (Index k = 0; k < data.features(); ++k)
            if (k != a.row) names.push_back(data.feature_names[static_cast<std::size_t>(k)]);
    } else {
        if (a.w.empty() || a.z.empty()) throw InputError("path needs --w and --z, or --input and --row");
        w = parse_reals(a.w, "--w").front();
        const auto zs = parse_reals(a.z, "--z");
        z = Eigen::Map<const Vector<double>>(zs.data(), static_cast<Index>(zs.size()));
        for (std::size_t k = 0; k < zs.size(); ++k) names.push_back(std::to_string(k + 1));
    }
    if (a.points < 2) throw InputError("--points must be at least 2");
    double top = std::max(std::abs(w), (std::abs(w) + (z.size() ? z.cwiseAbs().maxCoeff() : 0.0)) / 2);
    if (!(top > 0)) top = 1;
    top *= 1.0 + 1.0 / static_cast<double>(a.points);
    std::vector<double> grid;
    for (std::size_t i = 0; i < a.points; ++i)
        grid.push_back(top * static_cast<double>(a.points - i) / static_cast<double>(a.points));
    const auto path = solve_path(w, z, grid);
    if (c.json) {
        json j;
        j["w"] = number(w);
        j["steps"] = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& s = path[i];
            json theta = json::array();
            for (Index k = 0; k < z.size(); ++k) theta.push_back(number(s.solution.theta(k)));
            j["steps"].push_back({{"lambda", number(grid[i])},
                                  {"case", std::string(to_string(s.solution.case_label))},
                                  {"beta", number(s.solution.beta())},
                                  {"alpha", number(s.certificate.alpha)},
                                  {"theta", theta}});
        }
        out << j.dump(2) << '\n';
        return;
    }
    out << "lambda\tcase\tbeta\talpha";
    for (const auto& n : names) out << "\ttheta_" << n;
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& s = path[i];
        out << format_real(grid[i]) << '\t' << to_string(s.solution.case_label) << '\t'
            << format_real(s.solution.beta()) << '\t' << format_real(s.certificate.alpha);
        for (Index k = 0; k < z.size(); ++k) out << '\t' << format_real(s.solution.theta(k));
        out << '\n';
    }
}

// ---- stability ------------------------------------------------------------

struct StabilityArgs {
    std::string method = "cht";
    std::size_t topk = 10;
    std::size_t bootstrap = 0;
    std::size_t splits = 0;
    std::size_t kmax = 0;
};

void cmd_stability(const Common& c, const StabilityArgs& a, unsigned threads, std::ostream& out) {
    const auto method = parse_method(a.method);
    if (!method) throw InputError("unknown method '" + a.method + "'");
    if ((a.bootstrap == 0) == (a.splits == 0)) throw InputError("give exactly one of --bootstrap B or --splits R");
    const auto data = load_input(c);
    ResamplingOptions ro;
    ro.seed = c.seed;
    ro.threads = threads;
    if (a.bootstrap > 0) {
        const auto freq = bootstrap_topk_frequency(data, *method, a.topk, a.bootstrap, ro);
        const auto& names = data.feature_names;
        if (c.json) {
            json j = json::array();
            for (const auto& f : freq)
                j.push_back({{"j", names[static_cast<std::size_t>(f.pair.j)]},
                             {"k", names[static_cast<std::size_t>(f.pair.k)]},
                             {"frequency", f.frequency}});
            out << j.dump(2) << '\n';
            return;
        }
        out << "# method=" << to_string(*method) << " bootstrap=" << a.bootstrap << " topk=" << a.topk
            << " seed=" << c.seed << '\n';
        out << "j\tk\tfrequency\n";
        for (const auto& f : freq)
            out << names[static_cast<std::size_t>(f.pair.j)] << '\t' << names[static_cast<std::size_t>(f.pair.k)]
                << '\t' << format_real(f.frequency) << '\n';
        return;
    }
    const std::size_t kmax = a.kmax == 0 ? a.topk : a.kmax;
    const auto overlap = split_half_overlap(data, *method, kmax, a.splits, ro);
    if (c.json) {
        json j = json::array();
        for (std::size_t k = 0; k < overlap.size(); ++k) j.push_back({{"k", k + 1}, {"overlap", overlap[k]}});
        out << j.dump(2) << '\n';
        return;
    }
    out << "# method=" << to_string(*method) << " splits=" << a.splits << " seed=" << c.seed << '\n';
    out << "k\toverlap\n";
    for (std::size_t k = 0; k < overlap.size(); ++k) out << k + 1 << '\t' << format_real(overlap[k]) << '\n';
}

// ---- shrinkage-curve ------------------------------------------------------

struct ShrinkageArgs {
    std::string mode = "normal";
    std::string w = "0,0.5,1,1.5,2,3";
    std::size_t count = 50;
    std::size_t points = 100;
    double zmax = 4;
};

void cmd_shrinkage(const Common& c, const ShrinkageArgs& a, std::ostream& out) {
    if (a.count < 1) throw InputError("--count must be at least 1");
    const auto ws = parse_reals(a.w, "--w");
    auto rng = substream(c.seed, 0, 0x7368726b);
    struct Row {
        double w, z, lambda_hat;
    };
    std::vector<Row> rows;
    if (a.mode == "normal") {
        // Every one of the `count` interactions is a curve point.
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector<double> z(static_cast<Index>(a.count));
        for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
        std::vector<Index> order(static_cast<std::size_t>(z.size()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return std::abs(z(x)) < std::abs(z(y)); });
        for (double w : ws) {
            const auto e = entry_points_row(w, z);
            for (Index k : order) rows.push_back({w, std::abs(z(k)), e.nu_k(k)});
        }
    } else if (a.mode == "spike") {
        // count - 1 small interactions and one whose size sweeps (0, zmax].
        if (a.points < 1) throw InputError("--points must be at least 1");
        std::normal_distribution<double> small(0.0, 0.5);
        Vector<double> z(static_cast<Index>(a.count));
        for (Index k = 1; k < z.size(); ++k) z(k) = small(rng);
        for (double w : ws)
            for (std::size_t i = 1; i <= a.points; ++i) {
                z(0) = a.zmax * static_cast<double>(i) / static_cast<double>(a.points);
                rows.push_back({w, z(0), entry_points_row(w, z).nu_k(0)});
            }
    } else {
        throw InputError("unknown mode '" + a.mode + "' (normal, spike)");
    }
    if (c.json) {
        json j = json::array();
        for (const auto& r : rows) j.push_back({{"w", r.w}, {"z", r.z}, {"lambda_hat", r.lambda_hat}});
        out << j.dump(2) << '\n';
        return;
    }
    out << "# mode=" << a.mode << " count=" << a.count << " seed=" << c.seed << '\n';
    out << "w\tz\tlambda_hat\n";
    for (const auto& r : rows)
        out << format_real(r.w) << '\t' << format_real(r.z) << '\t' << format_real(r.lambda_hat) << '\n';
}

// ---- oracle-check ---------------------------------------------------------

struct OracleArgs {
    std::size_t instances = 1000;
    double grid = 1e-3;
};

bool cmd_oracle(const Common& c, const OracleArgs& a, unsigned threads, std::ostream& out) {
    OracleCheckOptions o;
    o.instances = a.instances;
    o.seed = c.seed;
    o.grid = a.grid;
    o.threads = threads;
    const auto report = run_oracle_check(o);
    write_report_json(out, report);
    return report.failures.empty();
}

}  // namespace

unsigned threads_from_environment() {
    if (const char* env = std::getenv("CHT_THREADS")) {
        unsigned v = 0;
        const std::string s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return default_threads();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convex hierarchical testing of pairwise interactions in two-class data", "cht"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cht 1.0.0");

    Common common;
    TestArgs test_args;
    FdrArgs fdr_args;
    SimulateArgs sim_args;
    PathArgs path_args;
    StabilityArgs stab_args;
    ShrinkageArgs shrink_args;
    OracleArgs oracle_args;

    auto* test = app.add_subcommand("test", "Main-effect and interaction statistics for a CSV");
    add_common(test, common, true);
    test->add_option("--top", test_args.top, "Keep only the top k interactions (0 = all)");

    auto* fdr = app.add_subcommand("fdr", "Permutation FDR estimate along a lambda grid");
    add_common(fdr, common, true);
    fdr->add_option("--permutations", fdr_args.permutations, "Number of label permutations")
        ->check(CLI::PositiveNumber);
    fdr->add_option("--grid", fdr_args.grid, "'auto' or a file with one descending lambda per line");

    auto* sim = app.add_subcommand("simulate", "Simulated scenarios and experiments");
    add_common(sim, common, false);
    sim->add_option("--experiment", sim_args.experiment, "fdr | power | estimate | data");
    sim->add_option("--scenario", sim_args.scenario, "hierarchical | no_main_effects | anti_hierarchical");
    sim->add_option("--n", sim_args.n, "Observations")->check(CLI::PositiveNumber);
    sim->add_option("--p", sim_args.p, "Features")->check(CLI::PositiveNumber);
    sim->add_option("--mains", sim_args.mains, "Features carrying interaction hubs")->check(CLI::NonNegativeNumber);
    sim->add_option("--ints-per-main", sim_args.ints_per_main, "True interactions per hub")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--reps", sim_args.reps, "Replications")->check(CLI::PositiveNumber);
    sim->add_option("--delta", sim_args.delta, "Main effect size (class mean difference)");
    sim->add_option("--rho", sim_args.rho, "Interaction strength (class correlation difference)");
    sim->add_option("--methods", sim_args.methods, "Comma list of cht, all_pairs, screen_strong, screen_weak");
    sim->add_option("--max-rank", sim_args.max_rank, "Ranks reported by the fdr experiment");
    sim->add_option("--ns", sim_args.ns, "Sample sizes for the power experiment");
    sim->add_option("--deltas", sim_args.deltas, "Main effect sizes for the power experiment");
    sim->add_option("--max-fdp", sim_args.max_fdp, "FDP bound for the power experiment");
    sim->add_option("--permutations", sim_args.permutations, "Permutations for the estimate experiment")
        ->check(CLI::PositiveNumber);
    sim->add_option("--truth", sim_args.truth_path, "With --experiment data: write the true effects here");

    auto* path = app.add_subcommand("path", "Solution path of one row over a descending lambda grid");
    add_common(path, common, true);
    path->add_option("--w", path_args.w, "Main-effect contrast");
    path->add_option("--z", path_args.z, "Comma list of interaction contrasts");
    path->add_option("--row", path_args.row, "Feature index (0-based) when reading --input");
    path->add_option("--points", path_args.points, "Grid points");

    auto* stab = app.add_subcommand("stability", "Bootstrap top-k frequencies or split-half overlap");
    add_common(stab, common, true);
    stab->add_option("--method", stab_args.method, "cht | all_pairs | screen_strong | screen_weak");
    stab->add_option("--topk", stab_args.topk, "Top pairs recorded per sample")->check(CLI::PositiveNumber);
    auto* boot = stab->add_option("--bootstrap", stab_args.bootstrap, "Bootstrap samples")->check(CLI::PositiveNumber);
    auto* splits = stab->add_option("--splits", stab_args.splits, "Random halvings")->check(CLI::PositiveNumber);
    boot->excludes(splits);
    stab->add_option("--kmax", stab_args.kmax, "Largest k for split overlap (default --topk)");

    auto* shrink = app.add_subcommand("shrinkage-curve", "Interaction statistic against |z| for several w");
    add_common(shrink, common, false);
    shrink->add_option("--mode", shrink_args.mode, "normal | spike");
    shrink->add_option("--w", shrink_args.w, "Comma list of main effects");
    shrink->add_option("--count", shrink_args.count, "Interactions in the row");
    shrink->add_option("--points", shrink_args.points, "Spike sizes (spike mode)");
    shrink->add_option("--zmax", shrink_args.zmax, "Largest spike size (spike mode)");

    auto* oracle = app.add_subcommand("oracle-check", "Compare closed forms with the brute-force oracle");
    add_common(oracle, common, false);
    oracle->add_option("--instances", oracle_args.instances, "Random rows")->check(CLI::PositiveNumber);
    oracle->add_option("--grid", oracle_args.grid, "Entry-point grid step")->check(CLI::PositiveNumber);

    // CLI11 consumes arguments from the back.
    std::vector<std::string> reversed;
    if (args.size() > 1) reversed.assign(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "cht 1.0.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << e.what() << '\n';
        return 2;
    }

    const unsigned threads = common.threads > 0 ? common.threads : threads_from_environment();
    std::ostringstream buffer;
    buffer.precision(17);
    bool ok = true;
    try {
        if (test->parsed()) cmd_test(common, test_args, threads, buffer);
        else if (fdr->parsed()) cmd_fdr(common, fdr_args, threads, buffer);
        else if (sim->parsed()) cmd_simulate(common, sim_args, threads, buffer);
        else if (path->parsed()) cmd_path(common, path_args, buffer);
        else if (stab->parsed()) cmd_stability(common, stab_args, threads, buffer);
        else if (shrink->parsed()) cmd_shrinkage(common, shrink_args, buffer);
        else if (oracle->parsed()) ok = cmd_oracle(common, oracle_args, threads, buffer);
    } catch (const Error& e) {
        err << "error[" << e.category() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error[internal]: " << e.what() << '\n';
        return 1;
    }
    if (!common.output.empty()) {
        std::ofstream file(common.output, std::ios::binary);
        if (!file || !(file << buffer.str())) {
            err << "error[io]: cannot write '" << common.output << "'\n";
            return 1;
        }
    } else {
        out << buffer.str();
    }
    if (!ok) {
        err << "error[verification]: oracle check reported failures\n";
        return 3;
    }
    return 0;
}

}  // namespace cht::cli
