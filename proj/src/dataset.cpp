#include "rfsc/dataset.hpp"

#include "rfsc/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string_view>

namespace rfsc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    const auto is_blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    const auto is_sep = [](char c) { return c == ',' || c == ';'; };
    while (i < line.size()) {
        while (i < line.size() && is_blank(line[i])) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !is_blank(line[j]) && !is_sep(line[j])) ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
        while (i < line.size() && is_blank(line[i])) ++i;
        if (i < line.size() && is_sep(line[i])) {
            ++i;
            // a trailing separator leaves an empty field, which is malformed
            std::size_t k = i;
            while (k < line.size() && is_blank(line[k])) ++k;
            if (k >= line.size() || is_sep(line[k])) out.emplace_back();
        }
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool is_skippable(std::string_view line) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string_view::npos) return true;
    return line[pos] == '#' || line[pos] == '@' || line[pos] == '%';
}

std::string located(const std::string& source, std::size_t line_no, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line_no << ": " << msg;
    return os.str();
}

}  // namespace

int LabelMap::id_of(const std::string& token) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == token) return static_cast<int>(i) + 1;
    }
    return 0;
}

int LabelMap::intern(const std::string& token) {
    if (const int id = id_of(token); id != 0) return id;
    names.push_back(token);
    return static_cast<int>(names.size());
}

RawDataset RawDataset::subset(std::span<const std::size_t> rows) const {
    RawDataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(labels.at(rows[i]));
    }
    out.feature_names = feature_names;
    out.label_map = label_map;
    return out;
}

void RawDataset::validate() const {
    if (features.rows() < 1) throw data_error("dataset has no samples");
    if (features.cols() < 1) throw data_error("dataset has no feature columns");
    if (labels.size() != n_samples()) throw data_error("label count does not match sample count");
    const int nc = n_classes();
    std::vector<int> seen(static_cast<std::size_t>(nc) + 1, 0);
    for (int c : labels) {
        if (c < 1 || c > nc) throw data_error("label " + std::to_string(c) + " outside 1.." + std::to_string(nc));
        ++seen[static_cast<std::size_t>(c)];
    }
    for (int c = 1; c <= nc; ++c) {
        if (seen[static_cast<std::size_t>(c)] == 0) throw data_error("class " + std::to_string(c) + " has no samples");
    }
    if (!features.allFinite()) throw data_error("non-finite feature value");
}

RawDataset parse_delimited(const std::string& text, const std::string& source) {
    RawDataset raw;
    std::vector<double> values;
    std::size_t n_cols = 0;
    std::size_t n_rows = 0;
    bool first = true;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_skippable(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() < 2) {
            throw data_error(located(source, line_no, "expected at least one feature and a class column"));
        }
        if (first) {
            first = false;
            n_cols = fields.size();
            bool numeric = true;
            for (std::size_t c = 0; c + 1 < fields.size(); ++c) numeric = numeric && parse_number(fields[c]).has_value();
            if (!numeric) {
                for (std::size_t c = 0; c + 1 < fields.size(); ++c) raw.feature_names.emplace_back(fields[c]);
                continue;
            }
        }
        if (fields.size() != n_cols) {
            std::ostringstream os;
            os << "expected " << n_cols << " columns, found " << fields.size();
            throw data_error(located(source, line_no, os.str()));
        }
        for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
            const auto v = parse_number(fields[c]);
            if (!v) {
                throw data_error(located(source, line_no,
                                         "column " + std::to_string(c + 1) + " is not numeric: '" +
                                             std::string(fields[c]) + "'"));
            }
            values.push_back(*v);
        }
        const std::string_view tok = fields.back();
        if (tok.empty()) throw data_error(located(source, line_no, "empty class label"));
        raw.labels.push_back(raw.label_map.intern(std::string(tok)));
        ++n_rows;
    }
    if (n_rows == 0) throw data_error(source + ": no data rows");

    const std::size_t nf = n_cols - 1;
    raw.features.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(nf));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < nf; ++c) {
            raw.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * nf + c];
        }
    }
    if (raw.feature_names.empty()) {
        for (std::size_t c = 0; c < nf; ++c) raw.feature_names.push_back("u" + std::to_string(c + 1));
    }
    raw.validate();
    return raw;
}

RawDataset read_delimited(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_delimited(buf.str(), path.string());
}

Eigen::MatrixXd read_unlabeled(const std::filesystem::path& path, std::size_t n_features) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n_rows = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_skippable(line)) continue;
        auto fields = split_fields(line);
        // a trailing class column is tolerated and ignored
        if (fields.size() == n_features + 1) fields.pop_back();
        if (fields.size() != n_features) {
            throw data_error(located(path.string(), line_no,
                                     "expected " + std::to_string(n_features) + " feature columns, found " +
                                         std::to_string(fields.size())));
        }
        std::vector<double> row;
        bool numeric = true;
        for (auto f : fields) {
            const auto v = parse_number(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw data_error(located(path.string(), line_no, "non-numeric feature value"));
        }
        first = false;
        values.insert(values.end(), row.begin(), row.end());
        ++n_rows;
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_features; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * n_features + c];
        }
    }
    return out;
}

Dataset normalize(const RawDataset& raw) {
    Dataset ds;
    ds.labels = raw.labels;
    ds.n_classes = raw.n_classes();
    ds.features.resize(raw.features.rows(), raw.features.cols());
    ds.norm_params.ranges.resize(raw.n_features());
    for (Eigen::Index c = 0; c < raw.features.cols(); ++c) {
        const auto col = raw.features.col(c);
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        ds.norm_params.ranges[static_cast<std::size_t>(c)] = {lo, hi};
        if (hi > lo) {
            ds.features.col(c) = ((col.array() - lo) / (hi - lo)).matrix();
        } else {
            ds.features.col(c).setZero();
        }
    }
    return ds;
}

Eigen::VectorXd apply_normalization(const Eigen::Ref<const Eigen::VectorXd>& raw_row, const NormParams& params) {
    if (static_cast<std::size_t>(raw_row.size()) != params.size()) {
        throw std::invalid_argument("apply_normalization: row has " + std::to_string(raw_row.size()) +
                                    " features, expected " + std::to_string(params.size()));
    }
    Eigen::VectorXd out(raw_row.size());
    for (Eigen::Index i = 0; i < raw_row.size(); ++i) {
        const auto& r = params.ranges[static_cast<std::size_t>(i)];
        const double span = r.max - r.min;
        out(i) = span > 0.0 ? std::clamp((raw_row(i) - r.min) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

Eigen::MatrixXd apply_normalization_rows(const Eigen::Ref<const Eigen::MatrixXd>& raw_rows, const NormParams& params) {
    Eigen::MatrixXd out(raw_rows.rows(), raw_rows.cols());
    for (Eigen::Index r = 0; r < raw_rows.rows(); ++r) {
        out.row(r) = apply_normalization(Eigen::VectorXd(raw_rows.row(r).transpose()), params).transpose();
    }
    return out;
}

BinaryTargets recode(std::span<const int> labels, int n_classes, int class_index) {
    if (class_index < 1 || class_index > n_classes) {
        throw std::out_of_range("recode: class " + std::to_string(class_index) + " outside 1.." +
                                std::to_string(n_classes));
    }
    BinaryTargets t;
    t.class_index = class_index;
    t.y.resize(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        t.y(static_cast<Eigen::Index>(k)) = labels[k] == class_index ? 1.0 : -1.0;
    }
    return t;
}

std::vector<int> modelled_classes(int n_classes) {
    if (n_classes <= 2) return {1};
    std::vector<int> out(static_cast<std::size_t>(n_classes));
    std::iota(out.begin(), out.end(), 1);
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < assignments.size(); ++k) {
        if (assignments[k] == fold) out.push_back(k);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < assignments.size(); ++k) {
        if (assignments[k] != fold) out.push_back(k);
    }
    return out;
}

FoldPlan stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
    if (static_cast<std::size_t>(n_folds) > labels.size()) {
        throw std::invalid_argument("stratified_folds: " + std::to_string(n_folds) + " folds for " +
                                    std::to_string(labels.size()) + " samples");
    }
    const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    Rng rng(derive_seed(seed, {0x666f6c64ULL}));

    // Shuffle within each class, then deal the concatenated class lists
    // round-robin so both fold sizes and per-class fold counts differ by at
    // most one.
    std::vector<std::size_t> order;
    order.reserve(labels.size());
    for (int c = 1; c <= n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (labels[k] == c) members.push_back(k);
        }
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng.below(i)]);
        }
        order.insert(order.end(), members.begin(), members.end());
    }

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.assignments.assign(labels.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(n_folds)) + 1;
    }
    return plan;
}

}  // namespace rfsc
