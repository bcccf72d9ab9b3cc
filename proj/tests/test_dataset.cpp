#include "rfsc/dataset.hpp"
#include "rfsc/seeding.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

using namespace rfsc;

namespace {

RawDataset make_raw(const Eigen::MatrixXd& x, std::vector<int> labels) {
    RawDataset raw;
    raw.features = x;
    raw.labels = std::move(labels);
    int n = *std::max_element(raw.labels.begin(), raw.labels.end());
    for (int c = 1; c <= n; ++c) raw.label_map.intern(std::to_string(c));
    return raw;
}

// fold sizes and per-class fold counts differ by at most one, folds cover 0..N-1
void check_fold_invariants(const FoldPlan& plan, const std::vector<int>& labels) {
    const int k = plan.n_folds;
    REQUIRE(plan.assignments.size() == labels.size());
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    std::map<int, std::vector<int>> per_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int f = plan.assignments[i];
        REQUIRE(f >= 1);
        REQUIRE(f <= k);
        ++size[static_cast<std::size_t>(f - 1)];
        auto& v = per_class[labels[i]];
        v.resize(static_cast<std::size_t>(k), 0);
        ++v[static_cast<std::size_t>(f - 1)];
    }
    auto [lo, hi] = std::minmax_element(size.begin(), size.end());
    CHECK(*hi - *lo <= 1);
    for (auto& [c, v] : per_class) {
        auto [a, b] = std::minmax_element(v.begin(), v.end());
        CHECK(*b - *a <= 1);
    }
    std::set<std::size_t> seen;
    for (int f = 1; f <= k; ++f) {
        auto test = plan.test_indices(f);
        auto train = plan.train_indices(f);
        CHECK(test.size() + train.size() == labels.size());
        for (auto i : test) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == labels.size());
}

}  // namespace

TEST_CASE("normalize maps column extremes to 0 and 1") {
    Eigen::MatrixXd x(3, 3);
    x << 2, 0, 3,
         6, 1, 3,
         10, 0.5, 3;
    Dataset ds = normalize(make_raw(x, {1, 2, 1}));
    CHECK(ds.features(0, 0) == 0.0);
    CHECK(ds.features(1, 0) == 0.5);
    CHECK(ds.features(2, 0) == 1.0);
    CHECK(ds.features(0, 1) == 0.0);
    CHECK(ds.features(1, 1) == 1.0);
    CHECK(ds.features(2, 1) == 0.5);
    // constant column
    CHECK(ds.features.col(2).isZero());
    CHECK(ds.norm_params.ranges[0].min == 2.0);
    CHECK(ds.norm_params.ranges[0].max == 10.0);
    CHECK(ds.n_classes == 2);
}

TEST_CASE("normalization is idempotent and bounded") {
    Rng rng(5);
    Eigen::MatrixXd x(40, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 100.0 * rng.uniform() - 30.0;
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[static_cast<std::size_t>(i)] = 1 + i % 3;
    Dataset a = normalize(make_raw(x, labels));
    for (Eigen::Index j = 0; j < a.features.cols(); ++j) {
        CHECK(a.features.col(j).minCoeff() == 0.0);
        CHECK(a.features.col(j).maxCoeff() == 1.0);
    }
    Dataset b = normalize(make_raw(a.features, labels));
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("apply_normalization reuses training ranges and clamps") {
    NormParams p;
    p.ranges = {{2.0, 10.0}};
    Eigen::VectorXd v(1);
    v << 6.0;
    CHECK(apply_normalization(v, p)(0) == 0.5);
    v << 12.0;
    CHECK(apply_normalization(v, p)(0) == 1.0);
    v << 2.0;
    CHECK(apply_normalization(v, p)(0) == 0.0);
    v << -5.0;
    CHECK(apply_normalization(v, p)(0) == 0.0);
    Eigen::VectorXd wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS((void)apply_normalization(wrong, p), std::invalid_argument);
}

TEST_CASE("recode produces one-vs-rest targets") {
    std::vector<int> labels{1, 2, 3, 2};
    BinaryTargets t = recode(labels, 3, 2);
    CHECK(t.class_index == 2);
    CHECK(t.y(0) == -1);
    CHECK(t.y(1) == 1);
    CHECK(t.y(2) == -1);
    CHECK(t.y(3) == 1);
    std::vector<int> same{2, 2, 2};
    CHECK((recode(same, 2, 2).y.array() == 1.0).all());
    CHECK_THROWS_AS(recode(labels, 3, 4), std::out_of_range);
    CHECK_THROWS_AS(recode(labels, 3, 0), std::out_of_range);
}

TEST_CASE("recode count of +1 equals class frequency") {
    Rng rng(11);
    std::vector<int> labels(200);
    for (auto& l : labels) l = 1 + static_cast<int>(rng.below(4));
    for (int c = 1; c <= 4; ++c) {
        const auto expected = std::count(labels.begin(), labels.end(), c);
        CHECK((recode(labels, 4, c).y.array() > 0).count() == expected);
    }
}

TEST_CASE("two classes train a single binary model") {
    CHECK(modelled_classes(2) == std::vector<int>{1});
    CHECK(modelled_classes(3) == std::vector<int>{1, 2, 3});
}

TEST_CASE("stratified folds on an Iris-shaped label vector") {
    std::vector<int> labels;
    for (int c = 1; c <= 3; ++c) labels.insert(labels.end(), 50, c);
    FoldPlan plan = stratified_folds(labels, 10, 42);
    check_fold_invariants(plan, labels);
    for (int f = 1; f <= 10; ++f) {
        auto test = plan.test_indices(f);
        CHECK(test.size() == 15);
        std::map<int, int> per;
        for (auto i : test) ++per[labels[i]];
        CHECK(per[1] == 5);
        CHECK(per[2] == 5);
        CHECK(per[3] == 5);
    }
    CHECK(stratified_folds(labels, 10, 42).assignments == plan.assignments);
}

TEST_CASE("stratified folds single class and edge sizes") {
    std::vector<int> one(10, 1);
    FoldPlan plan = stratified_folds(one, 5, 1);
    for (int f = 1; f <= 5; ++f) CHECK(plan.test_indices(f).size() == 2);
    CHECK_THROWS(stratified_folds(one, 11, 1));
    CHECK_THROWS(stratified_folds(one, 1, 1));
}

TEST_CASE("stratified fold invariants on random label vectors") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = 5 + static_cast<std::size_t>(rng.below(120));
        const int nc = 1 + static_cast<int>(rng.below(5));
        std::vector<int> labels(n);
        for (auto& l : labels) l = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(nc)));
        const int k = 2 + static_cast<int>(rng.below(std::min<std::uint64_t>(n - 1, 10)));
        check_fold_invariants(stratified_folds(labels, k, rng.next()), labels);
    }
}

TEST_CASE("parse_delimited handles headers, separators and string labels") {
    const std::string text =
        "a,b,class\n"
        "1.5,2,setosa\n"
        "# comment\n"
        "\n"
        "3,4.25,virginica\n"
        "5,6,setosa\n";
    RawDataset raw = parse_delimited(text);
    CHECK(raw.n_samples() == 3);
    CHECK(raw.n_features() == 2);
    CHECK(raw.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(raw.labels == std::vector<int>{1, 2, 1});
    CHECK(raw.label_map.names == std::vector<std::string>{"setosa", "virginica"});
    CHECK(raw.features(1, 1) == 4.25);

    RawDataset ws = parse_delimited("1 2 0\n3\t4 1\n");
    CHECK(ws.n_features() == 2);
    CHECK(ws.labels == std::vector<int>{1, 2});
    RawDataset semi = parse_delimited("1;2;x\n3;4;y\n");
    CHECK(semi.n_samples() == 2);
}

TEST_CASE("parse_delimited reports malformed rows with line numbers") {
    try {
        (void)parse_delimited("1,2,a\n3,oops,b\n", "f.csv");
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("f.csv:2") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_delimited("1,2,a\n3,b\n"), data_error);
    CHECK_THROWS_AS((void)parse_delimited(""), data_error);
}

TEST_CASE("bundled datasets have the expected shapes") {
    struct Shape {
        const char* file;
        std::size_t n, nf;
        int nc;
    };
    for (const Shape& s : {Shape{"iris.csv", 150, 4, 3}, Shape{"wine.csv", 178, 13, 3},
                           Shape{"wdbc.csv", 569, 30, 2}, Shape{"bupa.csv", 345, 6, 2},
                           Shape{"sonar.csv", 208, 60, 2}}) {
        CAPTURE(s.file);
        RawDataset raw = read_delimited(std::string(RFSC_DATA_DIR) + "/" + s.file);
        CHECK(raw.n_samples() == s.n);
        CHECK(raw.n_features() == s.nf);
        CHECK(raw.n_classes() == s.nc);
        raw.validate();
    }
    CHECK_THROWS_AS(read_delimited(std::string(RFSC_DATA_DIR) + "/missing.csv"), std::ios_base::failure);
}

TEST_CASE("validate rejects missing classes") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    RawDataset raw = make_raw(x, {1, 1});
    raw.label_map.intern("ghost");
    CHECK_THROWS_AS(raw.validate(), data_error);
}
