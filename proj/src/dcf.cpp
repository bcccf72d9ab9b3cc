#include "rfsc/dcf.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rfsc::dcf {

namespace {

struct Centering {
    Eigen::VectorXd row_mean;
    double grand_mean = 0.0;
};

Centering distance_means(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const Eigen::Index n = v.size();
    Centering c;
    c.row_mean = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) s += std::abs(v(r) - v(t));
        c.row_mean(r) = s / static_cast<double>(n);
    }
    c.grand_mean = c.row_mean.mean();
    return c;
}

}  // namespace

double distance_covariance_sq(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("distance_covariance_sq: length mismatch");
    const Eigen::Index n = x.size();
    if (n < 2) throw std::invalid_argument("distance_covariance_sq: need at least 2 samples");

    // The distance matrices are symmetric, so row and column means coincide
    // and (1/N^2) sum A_rs B_rs expands to
    //   mean(a b) - 2 mean_r(abar_r bbar_r) + abar.. bbar..
    const Centering a = distance_means(x);
    const Centering b = distance_means(y);
    double cross = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index s = 0; s < n; ++s) cross += std::abs(x(r) - x(s)) * std::abs(y(r) - y(s));
    }
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    const double v = cross / nn - 2.0 * a.row_mean.dot(b.row_mean) / static_cast<double>(n) + a.grand_mean * b.grand_mean;
    if (v < 0.0 && v > -1e-12) return 0.0;
    return v;
}

double threshold(double alpha_d) {
    if (!(alpha_d > 0.0 && alpha_d < 1.0)) throw std::invalid_argument("alpha_d must lie in (0,1)");
    const boost::math::normal_distribution<double> standard;
    const double z = boost::math::quantile(standard, 1.0 - alpha_d / 2.0);
    return z * z;
}

TestResult independence_test(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             double alpha_d) {
    const double thr = threshold(alpha_d);
    const Centering a = distance_means(x);
    const Centering b = distance_means(y);
    TestResult out;
    out.s = a.grand_mean * b.grand_mean;
    if (out.s <= 0.0) return out;
    const double n = static_cast<double>(x.size());
    out.statistic = n * distance_covariance_sq(x, y) / out.s;
    out.rejected = out.statistic > thr;
    return out;
}

bool Result::is_kept(std::size_t feature) const {
    return std::binary_search(kept.begin(), kept.end(), feature);
}

Result filter_features(const Dataset& ds, const BinaryTargets& targets, double alpha_d) {
    if (static_cast<std::size_t>(targets.y.size()) != ds.n_samples()) {
        throw std::invalid_argument("filter_features: target length does not match sample count");
    }
    Result res;
    res.class_index = targets.class_index;
    res.alpha_d = alpha_d;
    res.threshold = threshold(alpha_d);
    res.statistic.resize(ds.n_features());
    for (std::size_t p = 0; p < ds.n_features(); ++p) {
        const TestResult t = independence_test(ds.features.col(static_cast<Eigen::Index>(p)), targets.y, alpha_d);
        res.statistic[p] = t.statistic;
        if (t.rejected) res.kept.push_back(p);
    }
    return res;
}

void write_report(std::ostream& os, const Result& result, const std::vector<std::string>& feature_names) {
    os << "# class " << result.class_index << " alpha_d " << result.alpha_d << " threshold " << result.threshold
       << " kept " << result.kept.size() << "/" << result.statistic.size() << "\n";
    os << "feature\tname\tstatistic\tthreshold\tstatus\n";
    for (std::size_t p = 0; p < result.statistic.size(); ++p) {
        os << (p + 1) << '\t' << (p < feature_names.size() ? feature_names[p] : "u" + std::to_string(p + 1)) << '\t'
           << result.statistic[p] << '\t' << result.threshold << '\t' << (result.is_kept(p) ? "kept" : "dropped")
           << "\n";
    }
}

}  // namespace rfsc::dcf
