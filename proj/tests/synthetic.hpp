// Synthetic problems shared by the selection tests and the acceptance run.
#ifndef RFSC_TESTS_SYNTHETIC_HPP
#define RFSC_TESTS_SYNTHETIC_HPP

#include "rfsc/dataset.hpp"
#include "rfsc/estimator.hpp"
#include "rfsc/features.hpp"
#include "rfsc/seeding.hpp"
#include "rfsc/selection.hpp"

#include <algorithm>
#include <cmath>

namespace synth {

struct Problem {
    Eigen::MatrixXd u;  // N x N_f in [0,1]
    rfsc::BinaryTargets targets;
};

// Noiseless labels from a sparse polynomial: y = sign(theta . phi_planted(u)),
// rejecting samples inside a margin band so the classes are well separated.
inline Problem planted(const rfsc::RegressorSet& rs, const std::vector<std::size_t>& terms,
                       const Eigen::VectorXd& theta, Eigen::Index n, double margin, std::uint64_t seed) {
    rfsc::Rng rng(seed);
    const auto nf = static_cast<Eigen::Index>(rs.input_width());
    Problem p;
    p.u.resize(n, nf);
    p.targets.class_index = 1;
    p.targets.y.resize(n);
    Eigen::Index k = 0;
    Eigen::VectorXd row(nf);
    while (k < n) {
        for (auto& v : row) v = rng.uniform();
        const Eigen::VectorXd phi = rs.evaluate(row);
        double s = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) s += theta(static_cast<Eigen::Index>(t)) * phi(static_cast<Eigen::Index>(terms[t]));
        if (std::abs(s) < margin) continue;
        p.u.row(k) = row;
        p.targets.y(k) = s > 0.0 ? 1.0 : -1.0;
        ++k;
    }
    return p;
}

// Labels drawn from a logistic model on the planted terms; overlapping classes.
inline Problem noisy(const rfsc::RegressorSet& rs, const std::vector<std::size_t>& terms, const Eigen::VectorXd& theta,
                     Eigen::Index n, std::uint64_t seed) {
    rfsc::Rng rng(seed);
    const auto nf = static_cast<Eigen::Index>(rs.input_width());
    Problem p;
    p.u.resize(n, nf);
    p.targets.class_index = 1;
    p.targets.y.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < nf; ++j) p.u(k, j) = rng.uniform();
        const Eigen::VectorXd phi = rs.evaluate(p.u.row(k).transpose());
        double s = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) s += theta(static_cast<Eigen::Index>(t)) * phi(static_cast<Eigen::Index>(terms[t]));
        p.targets.y(k) = rng.uniform() < 1.0 / (1.0 + std::exp(-s)) ? 1.0 : -1.0;
    }
    return p;
}

// Best training J over every subset of the candidate set, each subset
// estimated and pruned exactly like a sampled structure.
inline double exhaustive_best_J(const rfsc::RegressorSet& rs, const Problem& p, const rfsc::FitConfig& cfg) {
    const rfsc::DesignSource src(rs, p.u);
    const std::size_t nr = rs.size();
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nr); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t j = 0; j < nr; ++j)
            if (mask >> j & 1U) s.push_back(j);
        const Eigen::MatrixXd d = src.columns(s);
        best = std::max(best, rfsc::estimate_structure(s, d, p.targets.y, cfg).J);
    }
    return best;
}

}  // namespace synth

#endif  // RFSC_TESTS_SYNTHETIC_HPP
