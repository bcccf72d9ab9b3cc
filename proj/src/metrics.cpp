#include "rfsc/metrics.hpp"

#include <string>

namespace rfsc {

ConfusionMatrix::ConfusionMatrix(int n_classes) : n_(n_classes) {
    if (n_classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_classes), 0);
}

ConfusionMatrix::ConfusionMatrix(int n_classes, std::span<const int> predicted, std::span<const int> actual)
    : ConfusionMatrix(n_classes) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("confusion matrix: length mismatch");
    for (std::size_t k = 0; k < predicted.size(); ++k) add(predicted[k], actual[k]);
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    ConfusionMatrix cm(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw std::invalid_argument("confusion matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) {
            cm.add(static_cast<int>(i) + 1, static_cast<int>(j) + 1, rows[i][j]);
        }
    }
    return cm;
}

void ConfusionMatrix::add(int predicted, int actual, std::int64_t count) {
    if (predicted < 1 || predicted > n_ || actual < 1 || actual > n_) {
        throw std::out_of_range("confusion matrix: class id outside 1.." + std::to_string(n_));
    }
    if (count < 0) throw std::invalid_argument("confusion matrix: negative count");
    counts_[static_cast<std::size_t>((predicted - 1) * n_ + (actual - 1))] += count;
}

std::int64_t ConfusionMatrix::operator()(int predicted, int actual) const {
    return counts_.at(static_cast<std::size_t>((predicted - 1) * n_ + (actual - 1)));
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t s = 0;
    for (int i = 1; i <= n_; ++i) s += (*this)(i, i);
    return s;
}

std::int64_t ConfusionMatrix::row_total(int predicted) const {
    std::int64_t s = 0;
    for (int j = 1; j <= n_; ++j) s += (*this)(predicted, j);
    return s;
}

std::int64_t ConfusionMatrix::col_total(int actual) const {
    std::int64_t s = 0;
    for (int i = 1; i <= n_; ++i) s += (*this)(i, actual);
    return s;
}

double accuracy(const ConfusionMatrix& cm) {
    const auto n = cm.total();
    if (n <= 0) throw evaluation_error("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

double kappa(const ConfusionMatrix& cm) {
    const double n = static_cast<double>(cm.total());
    if (n <= 0) throw evaluation_error("kappa of an empty confusion matrix");
    double chance = 0.0;
    for (int i = 1; i <= cm.n_classes(); ++i) {
        chance += static_cast<double>(cm.row_total(i)) * static_cast<double>(cm.col_total(i));
    }
    const double agree = static_cast<double>(cm.trace());
    const double denom = n * n - chance;
    if (denom == 0.0) {
        if (agree == n) return 1.0;
        throw evaluation_error("kappa undefined: chance agreement is total");
    }
    return (n * agree - chance) / denom;
}

}  // namespace rfsc
