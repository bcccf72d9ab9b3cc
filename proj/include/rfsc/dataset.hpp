#ifndef RFSC_DATASET_HPP
#define RFSC_DATASET_HPP

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfsc {

/// Thrown for malformed or inconsistent input data.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maps the class tokens found in a file to contiguous ids 1..N_c,
/// in order of first appearance.
struct LabelMap {
    std::vector<std::string> names;  // names[i] is the token of class i + 1

    [[nodiscard]] int n_classes() const { return static_cast<int>(names.size()); }
    [[nodiscard]] int id_of(const std::string& token) const;  // 0 if unknown
    int intern(const std::string& token);
};

/// Un-normalized samples as read from disk.
struct RawDataset {
    Eigen::MatrixXd features;  // N x N_f
    std::vector<int> labels;   // class ids in 1..N_c
    std::vector<std::string> feature_names;
    LabelMap label_map;

    [[nodiscard]] std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
    [[nodiscard]] std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
    [[nodiscard]] int n_classes() const { return label_map.n_classes(); }

    /// Rows selected by index, keeping the label map and names.
    [[nodiscard]] RawDataset subset(std::span<const std::size_t> rows) const;

    /// Throws data_error if the invariants (N >= 1, N_f >= 1, every class
    /// present, labels in range) do not hold.
    void validate() const;
};

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
};

struct NormParams {
    std::vector<FeatureRange> ranges;

    [[nodiscard]] std::size_t size() const { return ranges.size(); }
};

/// Features scaled to [0,1] with the ranges used to scale them.
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    int n_classes = 0;
    NormParams norm_params;

    [[nodiscard]] std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
    [[nodiscard]] std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
};

struct BinaryTargets {
    int class_index = 0;
    Eigen::VectorXd y;  // +1 / -1
};

struct FoldPlan {
    int n_folds = 0;
    std::vector<int> assignments;  // fold id in 1..n_folds per sample

    [[nodiscard]] std::vector<std::size_t> test_indices(int fold) const;
    [[nodiscard]] std::vector<std::size_t> train_indices(int fold) const;
};

/// Reads comma, semicolon, tab or blank separated numeric rows with the
/// class token in the last column. A first row whose feature columns do
/// not parse as numbers is taken as a header.
RawDataset read_delimited(const std::filesystem::path& path);
RawDataset parse_delimited(const std::string& text, const std::string& source = "<memory>");

/// Reads rows without a class column (for prediction).
Eigen::MatrixXd read_unlabeled(const std::filesystem::path& path, std::size_t n_features);

/// Min-max scaling per column; constant columns map to zero.
Dataset normalize(const RawDataset& raw);

/// Applies a stored scaling to one row, clamping to [0,1].
Eigen::VectorXd apply_normalization(const Eigen::Ref<const Eigen::VectorXd>& raw_row, const NormParams& params);
Eigen::MatrixXd apply_normalization_rows(const Eigen::Ref<const Eigen::MatrixXd>& raw_rows, const NormParams& params);

BinaryTargets recode(std::span<const int> labels, int n_classes, int class_index);
inline BinaryTargets recode(const Dataset& ds, int class_index) {
    return recode(ds.labels, ds.n_classes, class_index);
}

/// Classes that receive a dedicated binary model: only class 1 when there
/// are two classes, every class otherwise.
std::vector<int> modelled_classes(int n_classes);

FoldPlan stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed);

}  // namespace rfsc

#endif  // RFSC_DATASET_HPP
