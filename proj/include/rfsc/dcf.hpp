#ifndef RFSC_DCF_HPP
#define RFSC_DCF_HPP

#include "rfsc/dataset.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

namespace rfsc {

/// Distance-correlation screening of features against a class target.
namespace dcf {

/// Squared empirical distance covariance of two samples of equal length.
/// O(N^2) time, O(N) memory.
double distance_covariance_sq(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Rejection threshold (Phi^-1(1 - alpha_d / 2))^2.
double threshold(double alpha_d);

struct TestResult {
    double statistic = 0.0;  // N * dcov^2 / S
    double s = 0.0;          // product of the grand means of |x_r - x_s| and |y_r - y_s|
    bool rejected = false;   // dependence detected
};

TestResult independence_test(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             double alpha_d);

struct Result {
    int class_index = 0;
    double alpha_d = 0.0;
    double threshold = 0.0;
    std::vector<double> statistic;  // one per feature
    std::vector<std::size_t> kept;  // ascending feature indices

    [[nodiscard]] bool is_kept(std::size_t feature) const;
};

Result filter_features(const Dataset& ds, const BinaryTargets& targets, double alpha_d);

/// Tab-separated report: feature, name, statistic, threshold, kept.
void write_report(std::ostream& os, const Result& result, const std::vector<std::string>& feature_names);

}  // namespace dcf
}  // namespace rfsc

#endif  // RFSC_DCF_HPP
