#include "rfsc/features.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rfsc {

namespace {

// Appends all non-decreasing index sequences of the given length over
// `pool` (which is sorted), in lexicographic order.
void append_multisets(std::span<const std::size_t> pool, std::size_t length, std::size_t start,
                      std::vector<std::size_t>& prefix, std::vector<Monomial>& out) {
    if (prefix.size() == length) {
        out.push_back(Monomial{prefix});
        return;
    }
    for (std::size_t i = start; i < pool.size(); ++i) {
        prefix.push_back(pool[i]);
        append_multisets(pool, length, i, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::string Monomial::to_string() const {
    if (factors.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i > 0) out += '*';
        out += 'u';
        out += std::to_string(factors[i] + 1);
    }
    return out;
}

Monomial Monomial::parse(const std::string& text) {
    Monomial m;
    if (text == "1") return m;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, '*')) {
        if (part.size() < 2 || part[0] != 'u') throw std::invalid_argument("bad monomial '" + text + "'");
        std::size_t pos = 0;
        const unsigned long v = std::stoul(part.substr(1), &pos);
        if (pos != part.size() - 1 || v == 0) throw std::invalid_argument("bad monomial '" + text + "'");
        m.factors.push_back(v - 1);
    }
    std::sort(m.factors.begin(), m.factors.end());
    return m;
}

std::size_t regressor_count(std::size_t n_features, std::size_t max_degree) {
    // C(n+m, m) computed incrementally; each partial product is an integer
    std::size_t c = 1;
    for (std::size_t k = 1; k <= max_degree; ++k) c = c * (n_features + k) / k;
    return c;
}

RegressorSet enumerate(std::span<const std::size_t> features, std::size_t input_width, std::size_t max_degree) {
    RegressorSet rs;
    rs.features_.assign(features.begin(), features.end());
    std::sort(rs.features_.begin(), rs.features_.end());
    rs.features_.erase(std::unique(rs.features_.begin(), rs.features_.end()), rs.features_.end());
    for (std::size_t f : rs.features_) {
        if (f >= input_width) throw std::out_of_range("enumerate: feature index beyond input width");
    }
    rs.max_degree_ = max_degree;
    rs.input_width_ = input_width;
    rs.monomials_.reserve(regressor_count(rs.features_.size(), max_degree));
    std::vector<std::size_t> prefix;
    for (std::size_t l = 0; l <= max_degree; ++l) {
        append_multisets(rs.features_, l, 0, prefix, rs.monomials_);
    }
    return rs;
}

RegressorSet enumerate(std::size_t n_features, std::size_t max_degree) {
    std::vector<std::size_t> all(n_features);
    for (std::size_t i = 0; i < n_features; ++i) all[i] = i;
    return enumerate(all, n_features, max_degree);
}

RegressorSet from_monomials(std::vector<Monomial> monomials, std::size_t input_width) {
    RegressorSet rs;
    rs.input_width_ = input_width;
    std::vector<std::size_t> feats;
    for (auto& m : monomials) {
        std::sort(m.factors.begin(), m.factors.end());
        for (std::size_t f : m.factors) {
            if (f >= input_width) throw std::out_of_range("from_monomials: feature index beyond input width");
            feats.push_back(f);
        }
        rs.max_degree_ = std::max(rs.max_degree_, m.degree());
    }
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
    rs.features_ = std::move(feats);
    rs.monomials_ = std::move(monomials);
    return rs;
}

std::size_t RegressorSet::find(const Monomial& m) const {
    const auto it = std::find(monomials_.begin(), monomials_.end(), m);
    return static_cast<std::size_t>(it - monomials_.begin());
}

Eigen::VectorXd RegressorSet::evaluate(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    if (static_cast<std::size_t>(u.size()) != input_width_) {
        throw std::invalid_argument("evaluate: input has " + std::to_string(u.size()) + " features, expected " +
                                    std::to_string(input_width_));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(monomials_.size()));
    for (std::size_t j = 0; j < monomials_.size(); ++j) {
        double v = 1.0;
        for (std::size_t f : monomials_[j].factors) v *= u(static_cast<Eigen::Index>(f));
        out(static_cast<Eigen::Index>(j)) = v;
    }
    return out;
}

Eigen::MatrixXd RegressorSet::evaluate_subset(std::span<const std::size_t> selected,
                                              const Eigen::Ref<const Eigen::MatrixXd>& data) const {
    if (static_cast<std::size_t>(data.cols()) != input_width_) {
        throw std::invalid_argument("evaluate_subset: data has " + std::to_string(data.cols()) +
                                    " columns, expected " + std::to_string(input_width_));
    }
    Eigen::MatrixXd out(data.rows(), static_cast<Eigen::Index>(selected.size()));
    for (std::size_t c = 0; c < selected.size(); ++c) {
        const std::size_t j = selected[c];
        if (j >= monomials_.size()) throw std::out_of_range("evaluate_subset: regressor index out of range");
        auto col = out.col(static_cast<Eigen::Index>(c));
        col.setOnes();
        for (std::size_t f : monomials_[j].factors) {
            col.array() *= data.col(static_cast<Eigen::Index>(f)).array();
        }
    }
    return out;
}

Eigen::MatrixXd RegressorSet::evaluate_all(const Eigen::Ref<const Eigen::MatrixXd>& data) const {
    std::vector<std::size_t> all(monomials_.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    return evaluate_subset(all, data);
}

DesignSource::DesignSource(const RegressorSet& regressors, const Eigen::MatrixXd& data, std::size_t budget_bytes)
    : regressors_(&regressors), data_(&data) {
    const std::size_t bytes = regressors.size() * static_cast<std::size_t>(data.rows()) * sizeof(double);
    if (bytes <= budget_bytes) {
        full_ = regressors.evaluate_all(data);
        materialized_ = true;
    }
}

Eigen::MatrixXd DesignSource::columns(std::span<const std::size_t> selected) const {
    if (!materialized_) return regressors_->evaluate_subset(selected, *data_);
    Eigen::MatrixXd out(full_.rows(), static_cast<Eigen::Index>(selected.size()));
    for (std::size_t c = 0; c < selected.size(); ++c) {
        if (selected[c] >= regressors_->size()) throw std::out_of_range("columns: regressor index out of range");
        out.col(static_cast<Eigen::Index>(c)) = full_.col(static_cast<Eigen::Index>(selected[c]));
    }
    return out;
}

}  // namespace rfsc
