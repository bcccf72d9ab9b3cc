#ifndef RFSC_CLASSIFIER_HPP
#define RFSC_CLASSIFIER_HPP

#include "rfsc/dataset.hpp"
#include "rfsc/estimator.hpp"
#include "rfsc/features.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rfsc {

/// One binary (class vs rest) model.
struct ClassModel {
    int class_index = 0;
    std::vector<std::size_t> kept_features;  // after screening; all features when screening is off
    RegressorSet regressors;
    FittedModel model;

    /// Score on one normalized row.
    [[nodiscard]] double score(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    [[nodiscard]] Eigen::VectorXd scores(const Eigen::Ref<const Eigen::MatrixXd>& normalized) const;
    [[nodiscard]] std::vector<Monomial> selected_monomials() const;
};

struct Explanation {
    double y_plus = 0.0;
    double y_minus = 0.0;
    double delta = 0.0;
    std::vector<std::pair<Monomial, double>> supporting;  // signed contribution per selected term

    [[nodiscard]] double score() const { return y_plus - y_minus; }
};

struct ModelSize {
    std::size_t n_attributes = 0;
    std::size_t n_regressors = 0;
};

struct Prediction {
    int class_id = 0;
    std::vector<double> scores;  // one per class model
};

class Classifier {
public:
    Classifier() = default;
    Classifier(std::vector<ClassModel> models, NormParams norm, LabelMap labels, std::vector<std::string> feature_names);

    [[nodiscard]] const std::vector<ClassModel>& models() const { return models_; }
    [[nodiscard]] const NormParams& norm_params() const { return norm_; }
    [[nodiscard]] const LabelMap& label_map() const { return labels_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const { return feature_names_; }
    [[nodiscard]] std::size_t n_features() const { return norm_.size(); }
    [[nodiscard]] int n_classes() const { return labels_.n_classes(); }

    /// Free-form training metadata stored with the model.
    nlohmann::json& metadata() { return metadata_; }
    [[nodiscard]] const nlohmann::json& metadata() const { return metadata_; }

    [[nodiscard]] Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& raw_row) const;
    [[nodiscard]] Prediction predict_normalized(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    [[nodiscard]] std::vector<int> predict_all(const Eigen::Ref<const Eigen::MatrixXd>& raw_rows) const;

    /// Splits the score of class `class_index` by coefficient sign.
    [[nodiscard]] Explanation explain(const Eigen::Ref<const Eigen::VectorXd>& raw_row, int class_index) const;

    [[nodiscard]] ModelSize model_size() const;

    [[nodiscard]] nlohmann::json to_json() const;
    static Classifier from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static Classifier load(const std::filesystem::path& path);

private:
    [[nodiscard]] const ClassModel& model_for(int class_index) const;

    std::vector<ClassModel> models_;
    NormParams norm_;
    LabelMap labels_;
    std::vector<std::string> feature_names_;
    nlohmann::json metadata_ = nlohmann::json::object();
};

/// Splits theta . phi into positive and negative parts.
Explanation decompose(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& phi,
                      const std::vector<Monomial>& terms);

}  // namespace rfsc

#endif  // RFSC_CLASSIFIER_HPP
