#pragma once

#include "cht/dataset.hpp"
#include "cht/parallel.hpp"

#include <random>

namespace cht::testing {

// Gaussian dataset with balanced classes; features independent of class.
inline ClassedDataset random_dataset(Index n, Index p, std::uint64_t seed, double shift = 0.0) {
    auto rng = substream(seed, 0, 99);
    std::normal_distribution<double> normal;
    Matrix<double> x(n, p);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : 2;
        for (Index j = 0; j < p; ++j) x(i, j) = normal(rng) + (i < n / 2 ? shift : 0.0);
    }
    return make_dataset(std::move(x), std::move(y));
}

inline Vector<double> vec(std::initializer_list<double> v) {
    Vector<double> out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace cht::testing
