#ifndef RFSC_FEATURES_HPP
#define RFSC_FEATURES_HPP

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rfsc {

/// A product of features. Factors are 0-based column indices of the
/// original feature matrix, sorted ascending and possibly repeated; the
/// empty product is the constant regressor.
struct Monomial {
    std::vector<std::size_t> factors;

    [[nodiscard]] std::size_t degree() const { return factors.size(); }
    [[nodiscard]] bool is_constant() const { return factors.empty(); }

    /// "1", "u3", "u3*u17" (1-based feature numbers).
    [[nodiscard]] std::string to_string() const;
    static Monomial parse(const std::string& text);

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// The candidate regressors of a polynomial expansion, ordered by degree
/// then lexicographically on the factor list. The first entry is always
/// the constant.
class RegressorSet {
public:
    RegressorSet() = default;

    [[nodiscard]] std::size_t size() const { return monomials_.size(); }
    [[nodiscard]] const Monomial& operator[](std::size_t j) const { return monomials_[j]; }
    [[nodiscard]] const std::vector<Monomial>& monomials() const { return monomials_; }

    /// Original feature columns the expansion is built on.
    [[nodiscard]] const std::vector<std::size_t>& features() const { return features_; }
    [[nodiscard]] std::size_t max_degree() const { return max_degree_; }

    /// Width of the input rows evaluate() expects.
    [[nodiscard]] std::size_t input_width() const { return input_width_; }

    /// Regressor values for one normalized input row.
    [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& u) const;

    /// One column per selected regressor, in the given order.
    [[nodiscard]] Eigen::MatrixXd evaluate_subset(std::span<const std::size_t> selected,
                                                  const Eigen::Ref<const Eigen::MatrixXd>& data) const;

    [[nodiscard]] Eigen::MatrixXd evaluate_all(const Eigen::Ref<const Eigen::MatrixXd>& data) const;

    /// Index of a monomial, or size() when absent.
    [[nodiscard]] std::size_t find(const Monomial& m) const;

    friend RegressorSet enumerate(std::size_t n_features, std::size_t max_degree);
    friend RegressorSet enumerate(std::span<const std::size_t> features, std::size_t input_width,
                                  std::size_t max_degree);
    friend RegressorSet from_monomials(std::vector<Monomial> monomials, std::size_t input_width);

private:
    std::vector<Monomial> monomials_;
    std::vector<std::size_t> features_;
    std::size_t max_degree_ = 0;
    std::size_t input_width_ = 0;
};

/// All monomials of degree 0..max_degree over features 0..n_features-1.
RegressorSet enumerate(std::size_t n_features, std::size_t max_degree);

/// All monomials of degree 0..max_degree over a subset of the columns of an
/// input_width-wide feature matrix.
RegressorSet enumerate(std::span<const std::size_t> features, std::size_t input_width, std::size_t max_degree);

/// Rebuilds a set from an explicit list, e.g. when loading a stored model.
RegressorSet from_monomials(std::vector<Monomial> monomials, std::size_t input_width);

/// C(n + m, m), the number of monomials of degree <= m in n variables.
std::size_t regressor_count(std::size_t n_features, std::size_t max_degree);

/// Column provider for design matrices. Materializes every regressor up
/// front when the full matrix fits the byte budget, otherwise builds the
/// requested columns on demand.
class DesignSource {
public:
    static constexpr std::size_t default_budget_bytes = std::size_t{256} << 20;

    DesignSource(const RegressorSet& regressors, const Eigen::MatrixXd& data,
                 std::size_t budget_bytes = default_budget_bytes);

    [[nodiscard]] Eigen::MatrixXd columns(std::span<const std::size_t> selected) const;
    [[nodiscard]] std::size_t n_samples() const { return static_cast<std::size_t>(data_->rows()); }
    [[nodiscard]] bool materialized() const { return materialized_; }

private:
    const RegressorSet* regressors_;
    const Eigen::MatrixXd* data_;
    Eigen::MatrixXd full_;
    bool materialized_ = false;
};

}  // namespace rfsc

#endif  // RFSC_FEATURES_HPP
