#ifndef RFSC_METRICS_HPP
#define RFSC_METRICS_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rfsc {

class evaluation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// counts(predicted, actual), class ids 1..n.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_classes);
    ConfusionMatrix(int n_classes, std::span<const int> predicted, std::span<const int> actual);

    /// Row-major rows of predicted classes.
    static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

    void add(int predicted, int actual, std::int64_t count = 1);

    [[nodiscard]] int n_classes() const { return n_; }
    [[nodiscard]] std::int64_t operator()(int predicted, int actual) const;
    [[nodiscard]] std::int64_t total() const;
    [[nodiscard]] std::int64_t trace() const;
    [[nodiscard]] std::int64_t row_total(int predicted) const;
    [[nodiscard]] std::int64_t col_total(int actual) const;

private:
    int n_;
    std::vector<std::int64_t> counts_;
};

double accuracy(const ConfusionMatrix& cm);

/// Cohen's kappa. When the chance-agreement denominator vanishes, returns
/// 1 for perfect agreement and throws evaluation_error otherwise.
double kappa(const ConfusionMatrix& cm);

}  // namespace rfsc

#endif  // RFSC_METRICS_HPP
