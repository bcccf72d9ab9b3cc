#include "rfsc/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace rfsc {

namespace {

constexpr const char* kFormat = "rfsc-model";
constexpr int kVersion = 1;

}  // namespace

double ClassModel::score(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    double s = 0.0;
    for (std::size_t c = 0; c < model.selected.size(); ++c) {
        double phi = 1.0;
        for (std::size_t f : regressors[model.selected[c]].factors) phi *= u(static_cast<Eigen::Index>(f));
        s += model.theta(static_cast<Eigen::Index>(c)) * phi;
    }
    return s;
}

Eigen::VectorXd ClassModel::scores(const Eigen::Ref<const Eigen::MatrixXd>& normalized) const {
    if (model.empty()) return Eigen::VectorXd::Constant(normalized.rows(), -1.0);
    return regressors.evaluate_subset(model.selected, normalized) * model.theta;
}

std::vector<Monomial> ClassModel::selected_monomials() const {
    std::vector<Monomial> out;
    out.reserve(model.selected.size());
    for (std::size_t j : model.selected) out.push_back(regressors[j]);
    return out;
}

Classifier::Classifier(std::vector<ClassModel> models, NormParams norm, LabelMap labels,
                       std::vector<std::string> feature_names)
    : models_(std::move(models)), norm_(std::move(norm)), labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
    const auto expected = modelled_classes(labels_.n_classes());
    if (models_.size() != expected.size()) throw std::invalid_argument("classifier: wrong number of class models");
    for (std::size_t i = 0; i < models_.size(); ++i) {
        const ClassModel& cm = models_[i];
        if (cm.class_index != expected[i]) throw std::invalid_argument("classifier: class models out of order");
        for (std::size_t j : cm.model.selected) {
            if (j >= cm.regressors.size()) throw std::invalid_argument("classifier: regressor index out of range");
        }
        if (cm.model.theta.size() != static_cast<Eigen::Index>(cm.model.selected.size())) {
            throw std::invalid_argument("classifier: coefficient count mismatch");
        }
    }
}

const ClassModel& Classifier::model_for(int class_index) const {
    for (const auto& m : models_) {
        if (m.class_index == class_index) return m;
    }
    throw std::out_of_range("no model for class " + std::to_string(class_index));
}

Prediction Classifier::predict_normalized(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    Prediction p;
    for (const auto& m : models_) p.scores.push_back(m.model.empty() ? -1.0 : m.score(u));
    if (models_.size() == 1) {
        p.class_id = p.scores.front() > 0.0 ? 1 : 2;
        return p;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.scores.size(); ++i) {
        if (p.scores[i] > p.scores[best]) best = i;
    }
    p.class_id = models_[best].class_index;
    return p;
}

Prediction Classifier::predict(const Eigen::Ref<const Eigen::VectorXd>& raw_row) const {
    return predict_normalized(apply_normalization(raw_row, norm_));
}

std::vector<int> Classifier::predict_all(const Eigen::Ref<const Eigen::MatrixXd>& raw_rows) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(raw_rows.rows()));
    for (Eigen::Index r = 0; r < raw_rows.rows(); ++r) out.push_back(predict(raw_rows.row(r).transpose()).class_id);
    return out;
}

Explanation decompose(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::VectorXd>& phi,
                      const std::vector<Monomial>& terms) {
    if (theta.size() != phi.size() || static_cast<std::size_t>(theta.size()) != terms.size()) {
        throw std::invalid_argument("decompose: length mismatch");
    }
    Explanation e;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double c = theta(j) * phi(j);
        if (theta(j) > 0.0) {
            e.y_plus += c;
        } else {
            e.y_minus -= c;
        }
        e.supporting.emplace_back(terms[static_cast<std::size_t>(j)], c);
    }
    const double top = std::max(e.y_plus, e.y_minus);
    e.delta = top > 0.0 ? (e.y_plus - e.y_minus) / top : 0.0;
    return e;
}

Explanation Classifier::explain(const Eigen::Ref<const Eigen::VectorXd>& raw_row, int class_index) const {
    if (class_index < 1 || class_index > n_classes()) {
        throw std::out_of_range("explain: class " + std::to_string(class_index) + " outside 1.." +
                                std::to_string(n_classes()));
    }
    const Eigen::VectorXd u = apply_normalization(raw_row, norm_);
    // with two classes the single model scores class 1; class 2 is its negation
    const bool negate = models_.size() == 1 && class_index == 2;
    const ClassModel& cm = negate ? models_.front() : model_for(class_index);
    const auto terms = cm.selected_monomials();
    Eigen::VectorXd phi(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t c = 0; c < terms.size(); ++c) {
        double v = 1.0;
        for (std::size_t f : terms[c].factors) v *= u(static_cast<Eigen::Index>(f));
        phi(static_cast<Eigen::Index>(c)) = v;
    }
    return decompose(negate ? Eigen::VectorXd(-cm.model.theta) : cm.model.theta, phi, terms);
}

ModelSize Classifier::model_size() const {
    std::set<std::size_t> attributes;
    std::set<std::vector<std::size_t>> regressors;
    for (const auto& cm : models_) {
        for (const auto& m : cm.selected_monomials()) {
            attributes.insert(m.factors.begin(), m.factors.end());
            regressors.insert(m.factors);
        }
    }
    return {attributes.size(), regressors.size()};
}

nlohmann::json Classifier::to_json() const {
    using nlohmann::json;
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["labels"] = labels_.names;
    doc["feature_names"] = feature_names_;
    json ranges = json::array();
    for (const auto& r : norm_.ranges) ranges.push_back({r.min, r.max});
    doc["norm_params"] = ranges;
    json models = json::array();
    for (const auto& cm : models_) {
        json jm;
        jm["class"] = cm.class_index;
        json kept = json::array();
        for (std::size_t f : cm.kept_features) kept.push_back(f + 1);
        jm["kept_features"] = kept;
        jm["max_degree"] = cm.regressors.max_degree();
        jm["n_candidates"] = cm.regressors.size();
        json terms = json::array();
        for (std::size_t c = 0; c < cm.model.selected.size(); ++c) {
            const auto ci = static_cast<Eigen::Index>(c);
            json t;
            t["index"] = cm.model.selected[c];
            t["monomial"] = cm.regressors[cm.model.selected[c]].to_string();
            t["theta"] = cm.model.theta(ci);
            t["sigma"] = cm.model.sigma.size() > ci ? cm.model.sigma(ci) : 0.0;
            terms.push_back(t);
        }
        jm["terms"] = terms;
        jm["J"] = cm.model.J;
        jm["loss"] = cm.model.loss;
        jm["converged"] = cm.model.converged;
        models.push_back(jm);
    }
    doc["models"] = models;
    doc["metadata"] = metadata_;
    return doc;
}

Classifier Classifier::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != kFormat) throw std::runtime_error("not an rfsc model document");
    if (doc.value("version", 0) != kVersion) throw std::runtime_error("unsupported model version");
    LabelMap labels;
    labels.names = doc.at("labels").get<std::vector<std::string>>();
    NormParams norm;
    for (const auto& r : doc.at("norm_params")) norm.ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    const std::size_t nf = norm.size();

    std::vector<ClassModel> models;
    for (const auto& jm : doc.at("models")) {
        ClassModel cm;
        cm.class_index = jm.at("class").get<int>();
        for (const auto& f : jm.at("kept_features")) {
            const auto v = f.get<std::size_t>();
            if (v < 1 || v > nf) throw std::runtime_error("model: kept feature out of range");
            cm.kept_features.push_back(v - 1);
        }
        cm.regressors = enumerate(cm.kept_features, nf, jm.at("max_degree").get<std::size_t>());
        const auto& terms = jm.at("terms");
        cm.model.theta.resize(static_cast<Eigen::Index>(terms.size()));
        cm.model.sigma.resize(static_cast<Eigen::Index>(terms.size()));
        for (std::size_t c = 0; c < terms.size(); ++c) {
            const auto& t = terms[c];
            const auto idx = t.at("index").get<std::size_t>();
            if (idx >= cm.regressors.size() ||
                cm.regressors[idx] != Monomial::parse(t.at("monomial").get<std::string>())) {
                throw std::runtime_error("model: term index does not match its monomial");
            }
            cm.model.selected.push_back(idx);
            cm.model.theta(static_cast<Eigen::Index>(c)) = t.at("theta").get<double>();
            cm.model.sigma(static_cast<Eigen::Index>(c)) = t.at("sigma").get<double>();
        }
        cm.model.J = jm.at("J").get<double>();
        cm.model.loss = jm.at("loss").get<double>();
        cm.model.converged = jm.at("converged").get<bool>();
        models.push_back(std::move(cm));
    }
    Classifier clf(std::move(models), std::move(norm), std::move(labels),
                   doc.value("feature_names", std::vector<std::string>{}));
    if (doc.contains("metadata")) clf.metadata_ = doc.at("metadata");
    return clf;
}

void Classifier::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return from_json(nlohmann::json::parse(in));
}

}  // namespace rfsc
