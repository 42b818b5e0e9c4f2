#include "cht/baselines.hpp"

#include "cht/parallel.hpp"
#include "cht/test_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace cht {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Cht: return "cht";
        case Method::AllPairs: return "all_pairs";
        case Method::ScreenStrong: return "screen_strong";
        case Method::ScreenWeak: return "screen_weak";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : {Method::Cht, Method::AllPairs, Method::ScreenStrong, Method::ScreenWeak})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

Matrix<double> all_pairs_stats(const ContrastSet& contrasts) {
    Matrix<double> out = contrasts.z.cwiseAbs();
    out.diagonal().setZero();
    return out;
}

double screening_threshold(const Vector<double>& w, double quantile) {
    if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("screening quantile must lie strictly inside (0, 1)");
    std::vector<double> mags(w.size());
    for (Index j = 0; j < w.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(w(j));
    std::sort(mags.begin(), mags.end());
    const auto k = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(mags.size())));
    if (k == 0) return -std::numeric_limits<double>::infinity();
    return mags[k - 1];
}

ScreeningResult screen_two_stage(const ContrastSet& contrasts, const ScreeningConfig& config) {
    ScreeningResult out;
    out.threshold = screening_threshold(contrasts.w, config.quantile);
    const Index p = contrasts.p();
    out.statistics = Matrix<double>::Zero(p, p);
    for (const auto& [j, k] : all_pairs(p)) {
        const bool pj = std::abs(contrasts.w(j)) > out.threshold;
        const bool pk = std::abs(contrasts.w(k)) > out.threshold;
        const bool keep = config.mode == ScreeningMode::Strong ? (pj && pk) : (pj || pk);
        if (!keep) continue;
        out.candidates.push_back({j, k});
        out.statistics(j, k) = out.statistics(k, j) = std::abs(contrasts.z(j, k));
    }
    return out;
}

namespace {

std::vector<Pair> rank_screened(const ContrastSet& contrasts, ScreeningMode mode, double quantile) {
    const auto screened = screen_two_stage(contrasts, {quantile, mode});
    const Matrix<double> mags = all_pairs_stats(contrasts);
    std::vector<Pair> first = screened.candidates;
    std::vector<Pair> rest;
    std::set<Pair> kept(first.begin(), first.end());
    for (const auto& pr : all_pairs(contrasts.p()))
        if (!kept.contains(pr)) rest.push_back(pr);
    auto before = [&](const Pair& a, const Pair& b) {
        const double sa = mags(a.j, a.k);
        const double sb = mags(b.j, b.k);
        if (sa != sb) return sa > sb;
        return a < b;
    };
    std::sort(first.begin(), first.end(), before);
    std::sort(rest.begin(), rest.end(), before);
    first.insert(first.end(), rest.begin(), rest.end());
    return first;
}

// Stratified draw: `pick` chooses the rows taken from each class.
template <typename Pick>
ClassedDataset draw_stratified(const ClassedDataset& data, std::mt19937_64& rng, Pick&& pick) {
    std::vector<Index> rows1, rows2;
    for (Index i = 0; i < data.rows(); ++i) (data.y[static_cast<std::size_t>(i)] == 1 ? rows1 : rows2).push_back(i);
    std::vector<Index> rows = pick(rows1, rng);
    const auto more = pick(rows2, rng);
    rows.insert(rows.end(), more.begin(), more.end());
    return subset_rows(data, rows);
}

// Retries `attempt` while it hits zero spread.
template <typename Attempt>
auto with_retries(int max_retries, Attempt&& attempt) {
    for (int tries = 0;; ++tries) {
        try {
            return attempt();
        } catch (const DegenerateError&) {
            if (tries + 1 >= max_retries)
                throw DegenerateError("resample still degenerate after " + std::to_string(max_retries) + " draws");
        }
    }
}

std::vector<Pair> top_k_of(const ClassedDataset& data, Method method, std::size_t k, double quantile) {
    auto ranked = rank_pairs(compute_all_contrasts(data), method, quantile);
    ranked.resize(std::min(k, ranked.size()));
    return ranked;
}

double overlap_fraction(const std::vector<Pair>& a, const std::vector<Pair>& b, std::size_t k) {
    std::set<Pair> sa(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t shared = 0;
    for (std::size_t i = 0; i < k; ++i) shared += sa.count(b[i]);
    return static_cast<double>(shared) / static_cast<double>(k);
}

std::vector<double> overlap_curve(const std::vector<Pair>& a, const std::vector<Pair>& b, std::size_t k_max) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= k_max; ++k) out.push_back(overlap_fraction(a, b, k));
    return out;
}

}  // namespace

std::vector<Pair> rank_pairs(const ContrastSet& contrasts, Method method, double screening_quantile,
                             unsigned threads) {
    const std::size_t n_pairs = static_cast<std::size_t>(contrasts.p() * (contrasts.p() - 1) / 2);
    switch (method) {
        case Method::Cht: return top_pairs(compute_test_statistics(contrasts, threads).lambda_int, n_pairs);
        case Method::AllPairs: return top_pairs(all_pairs_stats(contrasts), n_pairs);
        case Method::ScreenStrong: return rank_screened(contrasts, ScreeningMode::Strong, screening_quantile);
        case Method::ScreenWeak: return rank_screened(contrasts, ScreeningMode::Weak, screening_quantile);
    }
    return {};
}

std::vector<PairFrequency> bootstrap_topk_frequency(const ClassedDataset& data, Method method, std::size_t k,
                                                    std::size_t B, const ResamplingOptions& options) {
    if (B < 1) throw DomainError("bootstrap count must be at least 1");
    if (k < 1) throw DomainError("top-k must be at least 1");
    std::vector<std::vector<Pair>> tops(B);
    parallel_for(B, options.threads, [&](std::size_t b) {
        auto rng = substream(options.seed, b, 0x626f6f74);
        tops[b] = with_retries(options.max_retries, [&] {
            const auto sample = draw_stratified(data, rng, [](const std::vector<Index>& rows, std::mt19937_64& g) {
                std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
                std::vector<Index> out(rows.size());
                for (auto& r : out) r = rows[pick(g)];
                return out;
            });
            return top_k_of(sample, method, k, options.screening_quantile);
        });
    });
    std::map<Pair, std::size_t> counts;
    for (const auto& top : tops)
        for (const auto& pr : top) ++counts[pr];
    std::vector<PairFrequency> out;
    for (const auto& [pr, c] : counts) out.push_back({pr, static_cast<double>(c) / static_cast<double>(B)});
    std::stable_sort(out.begin(), out.end(),
                     [](const PairFrequency& a, const PairFrequency& b) { return a.frequency > b.frequency; });
    return out;
}

std::vector<double> split_overlap(const ClassedDataset& data, const std::vector<Index>& half_a,
                                  const std::vector<Index>& half_b, Method method, std::size_t k_max,
                                  double screening_quantile) {
    const std::size_t n_pairs = static_cast<std::size_t>(data.features() * (data.features() - 1) / 2);
    if (k_max < 1 || k_max > n_pairs) throw DomainError("k_max must be between 1 and the number of pairs");
    const auto a = top_k_of(subset_rows(data, half_a), method, k_max, screening_quantile);
    const auto b = top_k_of(subset_rows(data, half_b), method, k_max, screening_quantile);
    return overlap_curve(a, b, k_max);
}

std::vector<double> split_half_overlap(const ClassedDataset& data, Method method, std::size_t k_max,
                                       std::size_t reps, const ResamplingOptions& options) {
    if (reps < 1) throw DomainError("split repetitions must be at least 1");
    const std::size_t n_pairs = static_cast<std::size_t>(data.features() * (data.features() - 1) / 2);
    if (k_max < 1 || k_max > n_pairs) throw DomainError("k_max must be between 1 and the number of pairs");
    if (data.n1 < 4 || data.n2 < 4) throw DomainError("each class needs at least 4 rows to split in half");
    std::vector<std::vector<double>> curves(reps);
    parallel_for(reps, options.threads, [&](std::size_t r) {
        auto rng = substream(options.seed, r, 0x73706c74);
        curves[r] = with_retries(options.max_retries, [&] {
            std::vector<Index> half_a, half_b;
            for (int label : {1, 2}) {
                std::vector<Index> rows;
                for (Index i = 0; i < data.rows(); ++i)
                    if (data.y[static_cast<std::size_t>(i)] == label) rows.push_back(i);
                std::shuffle(rows.begin(), rows.end(), rng);
                const auto half = rows.size() / 2;
                half_a.insert(half_a.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(half));
                half_b.insert(half_b.end(), rows.begin() + static_cast<std::ptrdiff_t>(half), rows.end());
            }
            return split_overlap(data, half_a, half_b, method, k_max, options.screening_quantile);
        });
    });
    std::vector<double> mean(k_max, 0.0);
    for (const auto& c : curves)
        for (std::size_t k = 0; k < k_max; ++k) mean[k] += c[k];
    for (auto& m : mean) m /= static_cast<double>(reps);
    return mean;
}

}  // namespace cht
