#include "cht/verification.hpp"

#include "cht/parallel.hpp"
#include "cht/test_stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace cht {

namespace {

constexpr double kNonzero = 1e-9;

// theta = S(z, t) computed here rather than through the solver's helpers.
Vector<double> shrink(const Vector<double>& z, double t) {
    Vector<double> out(z.size());
    for (Index k = 0; k < z.size(); ++k) {
        const double m = std::abs(z(k)) - t;
        out(k) = m > 0 ? std::copysign(m, z(k)) : 0.0;
    }
    return out;
}

double objective(double w, const Vector<double>& z, double lambda, double bp, double bm, const Vector<double>& theta) {
    const double r = w - (bp - bm);
    double f = 0.5 * r * r + lambda * (bp + bm);
    for (Index k = 0; k < z.size(); ++k) {
        const double d = z(k) - theta(k);
        f += 0.5 * d * d + lambda * std::abs(theta(k));
    }
    return f;
}

// Best (b+, b-) for a fixed theta with T = ||theta||_1: minimize
// 1/2 (w - b)^2 + lambda max(|b|, T) over b, then b+ + b- = max(|b|, T).
OracleSolution best_beta(double w, const Vector<double>& z, double lambda, Vector<double> theta) {
    const double T = theta.lpNorm<1>();
    double b;
    if (std::abs(w) - lambda >= T) {
        b = std::copysign(std::abs(w) - lambda, w);
    } else {
        b = std::clamp(w, -T, T);
    }
    const double s = std::max(std::abs(b), T);
    OracleSolution out;
    out.beta_plus = (s + b) / 2;
    out.beta_minus = (s - b) / 2;
    out.objective = objective(w, z, lambda, out.beta_plus, out.beta_minus, theta);
    out.theta = std::move(theta);
    return out;
}

OracleSolution at_alpha(double w, const Vector<double>& z, double lambda, double alpha) {
    return best_beta(w, z, lambda, shrink(z, lambda + alpha));
}

// alpha in [0, lambda] where ||S(z, lambda + alpha)||_1 = level, by bisection
// (the left side is non-increasing); NaN when not bracketed.
double alpha_at_level(const Vector<double>& z, double lambda, double level) {
    auto g = [&](double a) { return shrink(z, lambda + a).lpNorm<1>() - level; };
    double lo = 0, hi = lambda;
    if (g(lo) < 0 || g(hi) > 0) return std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

OracleSolution golden_section(double w, const Vector<double>& z, double lambda, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = at_alpha(w, z, lambda, c).objective, fd = at_alpha(w, z, lambda, d).objective;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, lambda); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = at_alpha(w, z, lambda, c).objective;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = at_alpha(w, z, lambda, d).objective;
        }
    }
    return at_alpha(w, z, lambda, 0.5 * (a + b));
}

// Euclidean projection onto {x >= 0, a'x <= 0}, a = (-1, -1, 1, ..., 1).
void project(Vector<double>& y) {
    const Index n = y.size();
    auto a = [](Index i) { return i < 2 ? -1.0 : 1.0; };
    auto slack = [&](double mu) {
        double s = 0;
        for (Index i = 0; i < n; ++i) s += a(i) * std::max(y(i) - mu * a(i), 0.0);
        return s;
    };
    double mu = 0;
    if (slack(0) > 0) {
        double lo = 0, hi = 1;
        while (slack(hi) > 0) hi *= 2;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (slack(mid) > 0 ? lo : hi) = mid;
        }
        mu = hi;
    }
    for (Index i = 0; i < n; ++i) y(i) = std::max(y(i) - mu * a(i), 0.0);
}

OracleSolution polish(double w, const Vector<double>& z, double lambda, const OracleSolution& start, int iterations) {
    const Index m = z.size();
    Vector<double> x(2 + 2 * m);
    x(0) = start.beta_plus;
    x(1) = start.beta_minus;
    for (Index k = 0; k < m; ++k) {
        x(2 + k) = std::max(start.theta(k), 0.0);
        x(2 + m + k) = std::max(-start.theta(k), 0.0);
    }
    auto unpack = [&](const Vector<double>& v) {
        OracleSolution s;
        s.beta_plus = v(0);
        s.beta_minus = v(1);
        s.theta = v.segment(2, m) - v.segment(2 + m, m);
        s.objective = objective(w, z, lambda, s.beta_plus, s.beta_minus, s.theta);
        return s;
    };
    OracleSolution best = start;
    const double step = 0.5;  // gradient Lipschitz constant is 2
    Vector<double> grad(x.size());
    for (int it = 0; it < iterations; ++it) {
        const double r = (x(0) - x(1)) - w;
        grad(0) = r + lambda;
        grad(1) = -r + lambda;
        for (Index k = 0; k < m; ++k) {
            const double d = (x(2 + k) - x(2 + m + k)) - z(k);
            grad(2 + k) = d + lambda;
            grad(2 + m + k) = -d + lambda;
        }
        x -= step * grad;
        project(x);
    }
    OracleSolution end = unpack(x);
    if (end.objective < best.objective) best = std::move(end);
    return best;
}

}  // namespace

OracleSolution oracle_solve_row(double w, const Vector<double>& z, double lambda, const OracleOptions& options) {
    if (!(lambda > 0)) throw DomainError("lambda must be positive");
    if (!(options.alpha_resolution > 0)) throw DomainError("alpha resolution must be positive");
    std::vector<double> alphas;
    const auto steps = static_cast<std::size_t>(std::ceil(1.0 / options.alpha_resolution));
    for (std::size_t i = 0; i <= steps; ++i) alphas.push_back(std::min(lambda, lambda * static_cast<double>(i) / steps));
    // Breakpoints: where a coordinate of theta switches off, and where the
    // theta budget meets |w| or |w| - lambda.
    for (Index k = 0; k < z.size(); ++k) {
        const double a = std::abs(z(k)) - lambda;
        if (a >= 0 && a <= lambda) alphas.push_back(a);
    }
    for (double level : {std::abs(w), std::abs(w) - lambda})
        if (level >= 0) {
            const double a = alpha_at_level(z, lambda, level);
            if (!std::isnan(a)) alphas.push_back(a);
        }
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    std::size_t arg = 0;
    OracleSolution best = at_alpha(w, z, lambda, alphas[0]);
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        auto cand = at_alpha(w, z, lambda, alphas[i]);
        if (cand.objective < best.objective) {
            best = std::move(cand);
            arg = i;
        }
    }
    // Refine between the neighbours of the best grid point.
    const double lo = alphas[arg == 0 ? 0 : arg - 1];
    const double hi = alphas[std::min(arg + 1, alphas.size() - 1)];
    for (auto [a, b] : {std::pair{lo, alphas[arg]}, std::pair{alphas[arg], hi}}) {
        if (b <= a) continue;
        auto cand = golden_section(w, z, lambda, a, b);
        if (cand.objective < best.objective) best = std::move(cand);
    }
    if (options.polish_iterations > 0) best = polish(w, z, lambda, best, options.polish_iterations);
    return best;
}

std::vector<double> entry_grid(double w, const Vector<double>& z, double step) {
    if (!(step > 0)) throw DomainError("grid step must be positive");
    const double top = std::max(std::abs(w), z.size() ? z.cwiseAbs().maxCoeff() : 0.0) + 1.0;
    std::vector<double> grid;
    for (std::size_t g = 0;; ++g) {
        const double l = top - static_cast<double>(g) * step;
        if (l <= 0) break;
        grid.push_back(l);
    }
    return grid;
}

OracleEntryPoints oracle_entry_points(double w, const Vector<double>& z, const std::vector<double>& lambda_grid) {
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end(), std::greater<double>()))
        throw DomainError("lambda grid must be descending");
    OracleEntryPoints out;
    out.nu_k = Vector<double>::Zero(z.size());
    std::vector<bool> found(static_cast<std::size_t>(z.size()), false);
    bool main_found = false;
    Index remaining = z.size();
    OracleOptions coarse;
    coarse.alpha_resolution = 1.0 / 64;
    coarse.polish_iterations = 0;
    for (double lambda : lambda_grid) {
        if (main_found && remaining == 0) break;
        if (!(lambda > 0)) continue;
        const auto s = oracle_solve_row(w, z, lambda, coarse);
        if (!main_found && s.beta_plus + s.beta_minus > kNonzero) {
            out.nu = lambda;
            main_found = true;
        }
        for (Index k = 0; k < z.size(); ++k)
            if (!found[static_cast<std::size_t>(k)] && std::abs(s.theta(k)) > kNonzero) {
                out.nu_k(k) = lambda;
                found[static_cast<std::size_t>(k)] = true;
                --remaining;
            }
    }
    return out;
}

ProbeResult uniqueness_probe(double w, const Vector<double>& z, double lambda, const RowSolution<double>& solution,
                             int trials, std::uint64_t seed) {
    const Index m = z.size();
    auto rng = substream(seed, 0, 0x70726f6265);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> log_radius(std::log(1e-6), std::log(1e-3));
    ProbeResult out;
    out.min_change = std::numeric_limits<double>::infinity();
    const double bp0 = solution.beta_plus, bm0 = solution.beta_minus;
    for (int t = 0; t < trials; ++t) {
        Vector<double> d(2 + m);
        for (Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
        d *= std::exp(log_radius(rng)) / d.norm();
        double bp = std::max(0.0, bp0 + d(0));
        double bm = std::max(0.0, bm0 + d(1));
        const Vector<double> theta = solution.theta + d.tail(m);
        const double excess = theta.lpNorm<1>() - (bp + bm);
        if (excess > 0) (w >= 0 ? bp : bm) += excess;
        // Objective difference assembled term by term to avoid cancellation.
        const double b0 = bp0 - bm0, b1 = bp - bm;
        double change = 0.5 * (b0 - b1) * (2 * w - b0 - b1) + lambda * ((bp - bp0) + (bm - bm0));
        for (Index k = 0; k < m; ++k) {
            const double t0 = solution.theta(k), t1 = theta(k);
            change += 0.5 * (t0 - t1) * (2 * z(k) - t0 - t1) + lambda * (std::abs(t1) - std::abs(t0));
        }
        out.min_change = std::min(out.min_change, change);
        if (!(change > 0) && out.passed) {
            out.passed = false;
            out.witness = {bp, bm};
            out.witness.insert(out.witness.end(), theta.data(), theta.data() + m);
            out.witness_change = change;
        }
    }
    return out;
}

OracleReport run_oracle_check(const OracleCheckOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    struct Outcome {
        double coord = 0, entry = 0, gap = 0, kkt = 0;
        std::vector<std::string> reasons;
        double w = 0, lambda = 0;
        std::vector<double> z;
    };
    std::vector<Outcome> outcomes(options.instances);
    parallel_for(options.instances, options.threads, [&](std::size_t i) {
        auto rng = substream(options.seed, i, 0x6f7261636c65);
        std::uniform_int_distribution<int> dim(1, 10);
        std::normal_distribution<double> normal(0.0, 2.0);
        const Index m = dim(rng);
        const double w = normal(rng);
        Vector<double> z(m);
        for (Index k = 0; k < m; ++k) z(k) = normal(rng);
        const double scale = std::max(std::abs(w), z.cwiseAbs().maxCoeff());
        const double lambda = std::uniform_real_distribution<double>(0.02, 1.2)(rng) * scale;

        Outcome& o = outcomes[i];
        o.w = w;
        o.lambda = lambda;
        o.z.assign(z.data(), z.data() + m);
        auto fail = [&](std::string why) { o.reasons.push_back(std::move(why)); };

        const auto closed = solve_row(w, z, lambda);
        const auto& sol = closed.solution;
        const auto oracle = oracle_solve_row(w, z, lambda);
        o.kkt = closed.certificate.max_residual();
        o.gap = row_objective(w, z, lambda, sol) - oracle.objective;
        o.coord = std::max({std::abs(sol.beta_plus - oracle.beta_plus), std::abs(sol.beta_minus - oracle.beta_minus),
                            (sol.theta - oracle.theta).cwiseAbs().maxCoeff()});
        if (o.kkt > 1e-10) fail("kkt residual " + std::to_string(o.kkt));
        if (o.gap > 1e-9) fail("closed form objective exceeds oracle by " + std::to_string(o.gap));
        if (o.coord > 1e-6) fail("coordinate discrepancy " + std::to_string(o.coord));
        const double wrong_sign = w >= 0 ? oracle.beta_minus - oracle.beta_plus : oracle.beta_plus - oracle.beta_minus;
        if (wrong_sign > 1e-6) fail("main effect against the sign of w");

        const auto entry = entry_points_row(w, z);
        const auto approx = oracle_entry_points(w, z, entry_grid(w, z, options.grid));
        o.entry = std::max(std::abs(entry.nu - approx.nu), (entry.nu_k - approx.nu_k).cwiseAbs().maxCoeff());
        if (o.entry > options.grid * (1 + 1e-9)) fail("entry point discrepancy " + std::to_string(o.entry));

        const auto probe = uniqueness_probe(w, z, lambda, sol, options.probe_trials, options.seed + i);
        if (!probe.passed) fail("objective does not increase near the solution");
    });
    OracleReport report;
    report.instances = options.instances;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        report.max_coordinate_discrepancy = std::max(report.max_coordinate_discrepancy, o.coord);
        report.max_entry_discrepancy = std::max(report.max_entry_discrepancy, o.entry);
        report.max_objective_gap = std::max(report.max_objective_gap, o.gap);
        report.max_kkt_residual = std::max(report.max_kkt_residual, o.kkt);
        for (const auto& why : o.reasons) report.failures.push_back({i, o.w, o.z, o.lambda, why});
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_report_json(std::ostream& out, const OracleReport& report) {
    nlohmann::ordered_json j;
    j["instances"] = report.instances;
    j["max_coordinate_discrepancy"] = report.max_coordinate_discrepancy;
    j["max_entry_discrepancy"] = report.max_entry_discrepancy;
    j["max_objective_gap"] = report.max_objective_gap;
    j["max_kkt_residual"] = report.max_kkt_residual;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : report.failures)
        j["failures"].push_back({{"instance", f.instance}, {"w", f.w}, {"z", f.z}, {"lambda", f.lambda}, {"reason", f.reason}});
    out << j.dump(2) << '\n';
}

}  // namespace cht
