#include "cht/contrasts.hpp"

#include "cht/format.hpp"
#include "cht/parallel.hpp"

#include <cmath>
#include <ostream>

namespace cht {

namespace {

inline std::size_t class_row(int label) { return label == 1 ? 0 : 1; }

double scale_factor(Index n1, Index n2) {
    return std::sqrt(1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
}

void require_pair(const ClassMoments& moments, Index j, Index k) {
    const Index p = moments.pooled_sd.size();
    if (j < 0 || k < 0 || j >= p || k >= p) throw DomainError("feature index out of range");
    if (j == k) throw DomainError("interaction requires two distinct features");
}

}  // namespace

ClassMoments compute_moments(const ClassedDataset& data) {
    const Index p = data.features();
    const double n[2] = {static_cast<double>(data.n1), static_cast<double>(data.n2)};

    for (const auto& report : validate(data))
        throw DegenerateError("feature '" + report.feature_name + "' is constant within class " +
                              std::to_string(report.class_label));

    ClassMoments m;
    m.mean = Matrix<double>::Zero(2, p);
    m.sd = Matrix<double>::Zero(2, p);
    m.pooled_sd.resize(p);
    for (Index i = 0; i < data.rows(); ++i)
        m.mean.row(static_cast<Index>(class_row(data.y[static_cast<std::size_t>(i)]))) += data.x.row(i);
    m.mean.row(0) /= n[0];
    m.mean.row(1) /= n[1];

    Matrix<double> ss = Matrix<double>::Zero(2, p);
    for (Index i = 0; i < data.rows(); ++i) {
        const auto c = static_cast<Index>(class_row(data.y[static_cast<std::size_t>(i)]));
        ss.row(c) += (data.x.row(i) - m.mean.row(c)).cwiseAbs2();
    }
    for (Index j = 0; j < p; ++j) {
        m.sd(0, j) = std::sqrt(ss(0, j) / (n[0] - 1.0));
        m.sd(1, j) = std::sqrt(ss(1, j) / (n[1] - 1.0));
        m.pooled_sd(j) = std::sqrt((ss(0, j) + ss(1, j)) / (n[0] + n[1] - 2.0));
        if (!(m.sd(0, j) > 0.0) || !(m.sd(1, j) > 0.0))
            throw DegenerateError("feature '" + data.feature_names[static_cast<std::size_t>(j)] +
                                  "' has zero within-class standard deviation");
    }
    return m;
}

double main_contrast(const ClassedDataset& data, const ClassMoments& moments, Index j) {
    if (j < 0 || j >= moments.pooled_sd.size()) throw DomainError("feature index out of range");
    return (moments.mean(0, j) - moments.mean(1, j)) / (moments.pooled_sd(j) * scale_factor(data.n1, data.n2));
}

Vector<double> interaction_observations(const ClassedDataset& data, const ClassMoments& moments, Index j, Index k) {
    require_pair(moments, j, k);
    Vector<double> out(data.rows());
    for (Index i = 0; i < data.rows(); ++i) {
        const auto c = static_cast<Index>(class_row(data.y[static_cast<std::size_t>(i)]));
        out(i) = (data.x(i, j) - moments.mean(c, j)) * (data.x(i, k) - moments.mean(c, k)) /
                 (moments.sd(c, j) * moments.sd(c, k));
    }
    return out;
}

double interaction_contrast(const Vector<double>& values, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(values.size()) != labels.size())
        throw DomainError("values and labels differ in length");
    double sum[2] = {0.0, 0.0};
    Index count[2] = {0, 0};
    for (Index i = 0; i < values.size(); ++i) {
        const auto c = class_row(labels[static_cast<std::size_t>(i)]);
        sum[c] += values(i);
        ++count[c];
    }
    if (count[0] < 1 || count[1] < 1 || count[0] + count[1] < 3)
        throw DomainError("both classes must be present with at least three observations in total");
    const double mean[2] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
    double ss[2] = {0.0, 0.0};
    for (Index i = 0; i < values.size(); ++i) {
        const auto c = class_row(labels[static_cast<std::size_t>(i)]);
        const double d = values(i) - mean[c];
        ss[c] += d * d;
    }
    const double pooled = std::sqrt((ss[0] + ss[1]) / static_cast<double>(count[0] + count[1] - 2));
    if (!(pooled > 0.0)) throw DegenerateError("interaction values have zero pooled standard deviation");
    return (mean[0] - mean[1]) / (pooled * scale_factor(count[0], count[1]));
}

std::vector<Pair> all_pairs(Index p) {
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) pairs.push_back({j, k});
    return pairs;
}

ContrastSet compute_all_contrasts(const ClassedDataset& data, const ContrastOptions& options) {
    const ClassMoments moments = compute_moments(data);
    const Index p = data.features();
    ContrastSet out;
    out.w.resize(p);
    for (Index j = 0; j < p; ++j) out.w(j) = main_contrast(data, moments, j);
    out.z = Matrix<double>::Zero(p, p);

    const auto pairs = all_pairs(p);
    std::vector<double> stats(pairs.size());
    if (options.mode == ContrastMode::Materialized) {
        const std::size_t bytes = pairs.size() * static_cast<std::size_t>(data.rows()) * sizeof(double);
        if (bytes > options.cache_budget_bytes)
            throw DomainError("materialized interaction table needs " + std::to_string(bytes) +
                              " bytes, over the budget of " + std::to_string(options.cache_budget_bytes));
        Matrix<double> table(data.rows(), static_cast<Index>(pairs.size()));
        parallel_for(pairs.size(), options.threads, [&](std::size_t c) {
            table.col(static_cast<Index>(c)) = interaction_observations(data, moments, pairs[c].j, pairs[c].k);
        });
        parallel_for(pairs.size(), options.threads, [&](std::size_t c) {
            stats[c] = interaction_contrast(table.col(static_cast<Index>(c)), data.y);
        });
    } else {
        parallel_for(pairs.size(), options.threads, [&](std::size_t c) {
            stats[c] = interaction_contrast(interaction_observations(data, moments, pairs[c].j, pairs[c].k), data.y);
        });
    }
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        out.z(pairs[c].j, pairs[c].k) = stats[c];
        out.z(pairs[c].k, pairs[c].j) = stats[c];
    }
    return out;
}

InteractionCache::InteractionCache(const ClassedDataset& data, const ClassMoments& moments, std::size_t budget_bytes)
    : data_(data), moments_(moments) {
    const Index p = data.features();
    const std::size_t n_pairs = static_cast<std::size_t>(p * (p - 1) / 2);
    const std::size_t per_pair = static_cast<std::size_t>(data.rows()) * sizeof(double);
    cached_ = per_pair == 0 ? n_pairs : std::min(n_pairs, budget_bytes / per_pair);
    columns_.resize(cached_);
    const auto pairs = all_pairs(p);
    for (std::size_t c = 0; c < cached_; ++c)
        columns_[c] = interaction_observations(data, moments, pairs[c].j, pairs[c].k);
}

std::size_t InteractionCache::pair_slot(Index j, Index k) const {
    const auto p = static_cast<std::size_t>(data_.features());
    const auto a = static_cast<std::size_t>(std::min(j, k));
    const auto b = static_cast<std::size_t>(std::max(j, k));
    return a * p - a * (a + 1) / 2 + (b - a - 1);
}

const Vector<double>& InteractionCache::get(Index j, Index k, Vector<double>& scratch) const {
    const std::size_t slot = pair_slot(j, k);
    if (slot < cached_) return columns_[slot];
    scratch = interaction_observations(data_, moments_, j, k);
    return scratch;
}

void write_contrasts_tsv(std::ostream& out, const ContrastSet& contrasts, const std::vector<std::string>& names) {
    out << "# main\nfeature\tw\n";
    for (Index j = 0; j < contrasts.p(); ++j)
        out << names[static_cast<std::size_t>(j)] << '\t' << format_real(contrasts.w(j)) << '\n';
    out << "# interaction\nfeature_j\tfeature_k\tz\n";
    for (const auto& [j, k] : all_pairs(contrasts.p()))
        out << names[static_cast<std::size_t>(j)] << '\t' << names[static_cast<std::size_t>(k)] << '\t'
            << format_real(contrasts.z(j, k)) << '\n';
}

}  // namespace cht
