#pragma once

// Exact solver for the single-row problem
//
//   minimize  1/2 (w - (b+ - b-))^2 + 1/2 ||z - theta||^2 + lambda (b+ + b-) + lambda ||theta||_1
//   s.t.      b+, b- >= 0,  ||theta||_1 <= b+ + b-
//
// The solution is theta = S(z, lambda + alpha) for a hierarchy multiplier
// alpha in [0, lambda]; every quantity below is a piecewise-linear function of
// a threshold over the sorted magnitudes |z_k|, so knots and alpha are found
// by scanning breakpoints rather than by iteration. Internally everything is
// computed for |w| and signs are restored at the end.

#include "cht/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string_view>
#include <vector>

namespace cht {

enum class RowCase {
    Zero,              // III: everything zero
    MainOnly,          // I(i): hierarchy constraint loose, alpha = 0
    HierarchyActive,   // I(ii): constraint tight, 0 < alpha <= lambda
    BothSigns,         // II: b+ > 0 and b- > 0, alpha = lambda
};

inline std::string_view to_string(RowCase c) {
    switch (c) {
        case RowCase::Zero: return "III";
        case RowCase::MainOnly: return "I(i)";
        case RowCase::HierarchyActive: return "I(ii)";
        case RowCase::BothSigns: return "II";
    }
    return "?";
}

enum class Regime { BigMain, Moderate, BigInteraction };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::BigMain: return "BigMain";
        case Regime::Moderate: return "Moderate";
        case Regime::BigInteraction: return "BigInteraction";
    }
    return "?";
}

template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar t) {
    const Scalar m = std::abs(x) - t;
    if (!(m > Scalar(0))) return Scalar(0);
    return x < Scalar(0) ? -m : m;
}

template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar t) {
    using Scalar = typename Derived::Scalar;
    return z.unaryExpr([t](Scalar x) { return soft_threshold(x, t); }).eval();
}

/// |z_k| sorted in decreasing order with running sums, for exact evaluation
/// of t -> ||S(z, t)||_1 and its level crossings.
template <typename Scalar>
class SortedMagnitudes {
public:
    template <typename Derived>
    explicit SortedMagnitudes(const Eigen::MatrixBase<Derived>& z) {
        mags_.resize(static_cast<std::size_t>(z.size()));
        for (Index k = 0; k < z.size(); ++k) mags_[static_cast<std::size_t>(k)] = std::abs(z(k));
        std::sort(mags_.begin(), mags_.end(), std::greater<Scalar>());
        prefix_.assign(mags_.size() + 1, Scalar(0));
        for (std::size_t k = 0; k < mags_.size(); ++k) prefix_[k + 1] = prefix_[k] + mags_[k];
    }

    Index size() const { return static_cast<Index>(mags_.size()); }
    Scalar max() const { return mags_.empty() ? Scalar(0) : mags_.front(); }
    Scalar l1() const { return prefix_.back(); }
    const std::vector<Scalar>& values() const { return mags_; }

    /// Number of magnitudes strictly greater than t.
    std::size_t count_above(Scalar t) const {
        return static_cast<std::size_t>(
            std::upper_bound(mags_.begin(), mags_.end(), t, std::greater<Scalar>()) - mags_.begin());
    }

    /// Sum of magnitudes strictly greater than t.
    Scalar sum_above(Scalar t) const { return prefix_[count_above(t)]; }

    /// ||S(z, t)||_1 for t >= 0.
    Scalar shrunk_l1(Scalar t) const {
        const std::size_t c = count_above(t);
        return prefix_[c] - static_cast<Scalar>(c) * t;
    }

    /// Smallest t >= 0 with ||S(z, t)||_1 + slope * t <= level, assuming the
    /// left side is non-increasing up to the crossing. Infinity if none.
    Scalar first_crossing(Scalar slope, Scalar level) const {
        const std::size_t m = mags_.size();
        const Scalar inf = std::numeric_limits<Scalar>::infinity();
        // Segment with k active terms: t in [mags_[k], mags_[k-1]], where the
        // function equals prefix_[k] + (slope - k) t.
        for (std::size_t k = m + 1; k-- > 0;) {
            const Scalar lo = k == m ? Scalar(0) : mags_[k];
            const Scalar rate = slope - static_cast<Scalar>(k);
            if (prefix_[k] + rate * lo <= level) return lo;
            if (k == 0) {
                if (!(rate < Scalar(0))) return inf;
                return std::max(lo, (level - prefix_[k]) / rate);
            }
            const Scalar hi = mags_[k - 1];
            if (prefix_[k] + rate * hi <= level) return std::clamp((level - prefix_[k]) / rate, lo, hi);
        }
        return inf;
    }

private:
    std::vector<Scalar> mags_;
    std::vector<Scalar> prefix_;
};

/// Values of lambda at which the shape of the solution path changes.
template <typename Scalar>
struct Knots {
    Scalar lam1;  // min{l >= 0 : ||S(z,l)||_1 + l <= |w|}
    Scalar lam2;  // max of the same set
    Scalar lam3;  // max{l >= 0 : ||S(z,2l)||_1 >= |w|}; infinite when w = 0 or ||z||_1 < |w|
    Scalar lam4;  // (|w| + ||z||_inf) / 2
    Regime regime;
};

template <typename Scalar>
Knots<Scalar> compute_knots(Scalar w, const Vector<Scalar>& z) {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    const Scalar a = std::abs(w);
    const SortedMagnitudes<Scalar> mags(z);
    Knots<Scalar> knots{inf, inf, inf, (a + mags.max()) / Scalar(2), Regime::BigInteraction};
    if (mags.l1() < a) {
        knots.regime = Regime::BigMain;
    } else if (mags.max() <= a) {
        knots.regime = Regime::Moderate;
    }
    if (mags.max() <= a) {
        knots.lam2 = a;
        knots.lam1 = mags.l1() <= a ? Scalar(0) : mags.first_crossing(Scalar(1), a);
    }
    if (a > Scalar(0) && mags.l1() >= a) knots.lam3 = mags.first_crossing(Scalar(0), a) / Scalar(2);
    return knots;
}

/// Root of f(alpha) = ||S(z, lambda + alpha)||_1 - |w| + lambda - alpha on
/// (max(0, lambda - |w|), lambda]. Throws DomainError when lambda is outside
/// the range where such a root exists.
template <typename Scalar>
Scalar solve_alpha(Scalar w, const Vector<Scalar>& z, Scalar lambda) {
    const Scalar a = std::abs(w);
    const SortedMagnitudes<Scalar> mags(z);
    // With t = lambda + alpha the root condition reads ||S(z,t)||_1 - t = |w| - 2 lambda.
    const Scalar t = mags.first_crossing(Scalar(-1), a - Scalar(2) * lambda);
    const Scalar alpha = t - lambda;
    const Scalar lo = std::max(Scalar(0), lambda - a);
    const Scalar slack = Scalar(1024) * std::numeric_limits<Scalar>::epsilon() *
                         std::max({Scalar(1), lambda, a, mags.max()});
    if (!(alpha >= lo - slack && alpha <= lambda + slack))
        throw DomainError("lambda is outside the active-hierarchy range: no multiplier in (" + std::to_string(double(lo)) +
                          ", " + std::to_string(double(lambda)) + "]");
    return std::clamp(alpha, lo, lambda);
}

template <typename Scalar>
struct RowSolution {
    Scalar beta_plus = 0;
    Scalar beta_minus = 0;
    Vector<Scalar> theta;
    RowCase case_label = RowCase::Zero;

    Scalar beta() const { return beta_plus - beta_minus; }
};

/// Dual variables and the violation of each optimality line:
/// [0..2] stationarity (b+, b-, theta), [3..5] complementary slackness
/// (gamma+, gamma-, alpha), [6] primal and [7] dual feasibility.
template <typename Scalar>
struct KktCertificate {
    Scalar alpha = 0;
    Scalar gamma_plus = 0;
    Scalar gamma_minus = 0;
    Vector<Scalar> subgrad;
    std::array<Scalar, 8> residuals{};

    Scalar max_residual() const { return *std::max_element(residuals.begin(), residuals.end()); }
};

template <typename Scalar>
std::array<Scalar, 8> kkt_residual_lines(Scalar w, const Vector<Scalar>& z, Scalar lambda,
                                         const RowSolution<Scalar>& sol, const KktCertificate<Scalar>& cert) {
    using std::abs;
    const Scalar b = sol.beta_plus - sol.beta_minus;
    const Scalar budget = sol.beta_plus + sol.beta_minus;
    const Scalar theta_l1 = sol.theta.template lpNorm<1>();
    std::array<Scalar, 8> r{};
    r[0] = abs((b - w) + lambda - cert.gamma_plus - cert.alpha);
    r[1] = abs(-(b - w) + lambda - cert.gamma_minus - cert.alpha);
    r[2] = z.size() == 0 ? Scalar(0)
                         : (sol.theta - z + (lambda + cert.alpha) * cert.subgrad).cwiseAbs().maxCoeff();
    r[3] = abs(cert.gamma_plus * sol.beta_plus);
    r[4] = abs(cert.gamma_minus * sol.beta_minus);
    r[5] = abs(cert.alpha * (theta_l1 - budget));
    r[6] = std::max({Scalar(0), theta_l1 - budget, -sol.beta_plus, -sol.beta_minus});
    Scalar dual = std::max({Scalar(0), -cert.gamma_plus, -cert.gamma_minus, -cert.alpha});
    for (Index k = 0; k < z.size(); ++k) {
        const Scalar s = cert.subgrad(k);
        dual = std::max(dual, abs(s) - Scalar(1));
        if (sol.theta(k) != Scalar(0)) dual = std::max(dual, abs(s - (sol.theta(k) > 0 ? Scalar(1) : Scalar(-1))));
    }
    r[7] = dual;
    return r;
}

/// Largest violation over all optimality lines.
template <typename Scalar>
Scalar kkt_residuals(Scalar w, const Vector<Scalar>& z, Scalar lambda, const RowSolution<Scalar>& sol,
                     const KktCertificate<Scalar>& cert) {
    const auto r = kkt_residual_lines(w, z, lambda, sol, cert);
    return *std::max_element(r.begin(), r.end());
}

template <typename Scalar>
Scalar row_objective(Scalar w, const Vector<Scalar>& z, Scalar lambda, Scalar beta_plus, Scalar beta_minus,
                     const Vector<Scalar>& theta) {
    const Scalar r = w - (beta_plus - beta_minus);
    return Scalar(0.5) * r * r + Scalar(0.5) * (z - theta).squaredNorm() + lambda * (beta_plus + beta_minus) +
           lambda * theta.template lpNorm<1>();
}

template <typename Scalar>
Scalar row_objective(Scalar w, const Vector<Scalar>& z, Scalar lambda, const RowSolution<Scalar>& sol) {
    return row_objective(w, z, lambda, sol.beta_plus, sol.beta_minus, sol.theta);
}

template <typename Scalar>
struct SolvedRow {
    RowSolution<Scalar> solution;
    KktCertificate<Scalar> certificate;
};

/// Exact solution and optimality certificate at a fixed lambda > 0.
template <typename Scalar>
SolvedRow<Scalar> solve_row(Scalar w, const Vector<Scalar>& z, Scalar lambda) {
    if (!(lambda > Scalar(0)) || !std::isfinite(lambda)) throw DomainError("lambda must be positive and finite");
    const Scalar a = std::abs(w);
    const SortedMagnitudes<Scalar> mags(z);
    const Knots<Scalar> knots = compute_knots(w, z);

    // Case II holds iff ||S(z, 2 lambda)||_1 > |w|: below lam3, or below
    // ||z||_inf / 2 when w = 0 (where lam3 is reported as infinite).
    Scalar both_signs_below = Scalar(0);
    if (knots.regime != Regime::BigMain) both_signs_below = a > Scalar(0) ? knots.lam3 : mags.max() / Scalar(2);

    RowSolution<Scalar> sol;
    KktCertificate<Scalar> cert;
    Scalar bp = 0, bm = 0, gp = 0, gm = 0, alpha = 0;  // in the w >= 0 orientation
    if (lambda >= std::max(a, knots.lam4)) {
        sol.case_label = RowCase::Zero;
        alpha = std::max(Scalar(0), mags.max() - lambda);
        gp = lambda - a - alpha;
        gm = lambda + a - alpha;
    } else if (knots.lam1 <= lambda && lambda < a) {
        sol.case_label = RowCase::MainOnly;
        bp = a - lambda;
        gm = Scalar(2) * lambda;
    } else if (lambda < both_signs_below) {
        sol.case_label = RowCase::BothSigns;
        alpha = lambda;
        const Scalar budget = mags.shrunk_l1(Scalar(2) * lambda);
        bp = (budget + a) / Scalar(2);
        bm = (budget - a) / Scalar(2);
    } else {
        sol.case_label = RowCase::HierarchyActive;
        alpha = solve_alpha(w, z, lambda);
        bp = a - lambda + alpha;
        gm = Scalar(2) * (lambda - alpha);
    }
    sol.theta = soft_threshold(z, lambda + alpha);
    const bool flip = w < Scalar(0);
    sol.beta_plus = flip ? bm : bp;
    sol.beta_minus = flip ? bp : bm;
    cert.alpha = alpha;
    cert.gamma_plus = flip ? gm : gp;
    cert.gamma_minus = flip ? gp : gm;
    cert.subgrad.resize(z.size());
    for (Index k = 0; k < z.size(); ++k) {
        if (sol.theta(k) != Scalar(0)) {
            cert.subgrad(k) = sol.theta(k) > Scalar(0) ? Scalar(1) : Scalar(-1);
        } else {
            cert.subgrad(k) = std::clamp(z(k) / (lambda + alpha), Scalar(-1), Scalar(1));
        }
    }
    cert.residuals = kkt_residual_lines(w, z, lambda, sol, cert);
    return {std::move(sol), std::move(cert)};
}

/// Solutions along a lambda grid (any order).
template <typename Scalar>
std::vector<SolvedRow<Scalar>> solve_path(Scalar w, const Vector<Scalar>& z, const std::vector<Scalar>& lambdas) {
    std::vector<SolvedRow<Scalar>> out;
    out.reserve(lambdas.size());
    for (Scalar lambda : lambdas) out.push_back(solve_row(w, z, lambda));
    return out;
}

}  // namespace cht
