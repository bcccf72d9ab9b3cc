#include "rfsc/harness.hpp"
#include "rfsc/seeding.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

using namespace rfsc;

namespace {

// Two noisy blobs in three raw features, the third uninformative.
RawDataset blobs(std::size_t n, std::uint64_t seed, int classes = 2) {
    Rng rng(seed);
    RawDataset raw;
    raw.features.resize(static_cast<Eigen::Index>(n), 3);
    for (int c = 1; c <= classes; ++c) raw.label_map.intern("k" + std::to_string(c));
    raw.feature_names = {"a", "b", "c"};
    for (std::size_t k = 0; k < n; ++k) {
        const int c = 1 + static_cast<int>(k % static_cast<std::size_t>(classes));
        const auto r = static_cast<Eigen::Index>(k);
        raw.features(r, 0) = 10.0 * c + 6.0 * rng.uniform();
        raw.features(r, 1) = -3.0 * c + 4.0 * rng.uniform();
        raw.features(r, 2) = 100.0 * rng.uniform();
        raw.labels.push_back(c);
    }
    return raw;
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.rfsc.n_population = 20;
    cfg.rfsc.max_iterations = 25;
    return cfg;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

TEST_CASE("dcf mode parsing and the automatic rule") {
    CHECK(parse_dcf_mode("on") == DcfMode::on);
    CHECK(parse_dcf_mode("off") == DcfMode::off);
    CHECK(parse_dcf_mode("auto") == DcfMode::automatic);
    CHECK_THROWS_AS(parse_dcf_mode("maybe"), std::invalid_argument);
    CHECK(to_string(DcfMode::automatic) == "auto");

    TrainConfig cfg;
    CHECK_FALSE(cfg.dcf_enabled(4));
    CHECK_FALSE(cfg.dcf_enabled(15));
    CHECK(cfg.dcf_enabled(16));
    CHECK(cfg.dcf_enabled(60));
    cfg.dcf = DcfMode::on;
    CHECK(cfg.dcf_enabled(2));
    cfg.dcf = DcfMode::off;
    CHECK_FALSE(cfg.dcf_enabled(60));
}

TEST_CASE("training builds one model per modelled class") {
    const RawDataset two = blobs(40, 1);
    const TrainingRun a = train(two, quick_config(), 5);
    CHECK(a.classifier.models().size() == 1);
    CHECK(a.classes.size() == 1);
    CHECK_FALSE(a.classes[0].trace.empty());
    CHECK_FALSE(a.classes[0].screening.has_value());

    const RawDataset three = blobs(45, 2, 3);
    const TrainingRun b = train(three, quick_config(), 5, false);
    CHECK(b.classifier.models().size() == 3);
    for (const auto& cr : b.classes) CHECK(cr.trace.empty());

    TrainConfig screened = quick_config();
    screened.dcf = DcfMode::on;
    const TrainingRun c = train(two, screened, 5);
    REQUIRE(c.classes[0].screening.has_value());
    CHECK(c.classifier.models()[0].kept_features == c.classes[0].screening->kept);
}

TEST_CASE("best of several runs picks per class by the model ordering") {
    const RawDataset raw = blobs(45, 3, 3);
    std::vector<TrainingRun> runs;
    for (std::uint64_t s = 1; s <= 3; ++s) runs.push_back(train(raw, quick_config(), s, false));
    const std::vector<TrainingRun> copy = runs;
    const TrainingRun best = best_of(runs);
    for (std::size_t c = 0; c < 3; ++c) {
        const FittedModel& chosen = best.classifier.models()[c].model;
        for (const auto& r : copy) CHECK_FALSE(better_model(r.classifier.models()[c].model, chosen));
    }
    CHECK_THROWS(best_of({}));
}

TEST_CASE("cross-validation is deterministic and its aggregates follow the folds") {
    const RawDataset raw = blobs(60, 4);
    CvOptions opts;
    opts.n_folds = 5;
    opts.n_repeats = 2;
    opts.seed = 7;
    const CvReport a = run_cv(raw, quick_config(), opts);
    const CvReport b = run_cv(raw, quick_config(), opts);

    CHECK(a.trained_models == 10);
    REQUIRE(a.folds.size() == 5);
    REQUIRE(b.folds.size() == 5);
    std::size_t tested = 0;
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
        CHECK(a.folds[f].fold == static_cast<int>(f) + 1);
        CHECK(same_bits(a.folds[f].accuracy, b.folds[f].accuracy));
        CHECK(a.folds[f].n_regressors == b.folds[f].n_regressors);
        CHECK(a.folds[f].best_run == b.folds[f].best_run);
        CHECK(a.folds[f].best_run.size() == 1);
        CHECK(a.folds[f].best_run[0] >= 1);
        CHECK(a.folds[f].best_run[0] <= 2);
        tested += a.folds[f].n_test;
    }
    CHECK(tested == raw.n_samples());

    CvReport r = a;
    r.aggregate();
    double acc = 0.0, nr = 0.0;
    for (const auto& f : a.folds) {
        acc += f.accuracy;
        nr += static_cast<double>(f.n_regressors);
    }
    CHECK(r.J_a == doctest::Approx(acc / 5.0).epsilon(1e-15));
    CHECK(r.n_r == doctest::Approx(nr / 5.0).epsilon(1e-15));
    CHECK(r.J_a == a.J_a);

    std::ostringstream x, y;
    write_cv_tsv(x, a);
    write_cv_tsv(y, b);
    CHECK(x.str() == y.str());
    CHECK(x.str().rfind("fold\taccuracy\tkappa", 0) == 0);
    std::ostringstream table;
    write_cv_table(table, a);
    CHECK(table.str().find("J_a = ") != std::string::npos);
}

TEST_CASE("aggregates skip undefined kappa") {
    CvReport r;
    r.folds.resize(3);
    r.folds[0].accuracy = 1.0;
    r.folds[0].kappa = 1.0;
    r.folds[1].accuracy = 0.5;
    r.folds[1].kappa = std::nan("");
    r.folds[2].accuracy = 0.75;
    r.folds[2].kappa = 0.5;
    r.folds[2].n_regressors = 3;
    r.aggregate();
    CHECK(r.J_a == doctest::Approx(0.75));
    CHECK(r.K_a == doctest::Approx(0.75));
    CHECK(r.n_r == doctest::Approx(1.0));
}

TEST_CASE("leave-one-out on a tiny set") {
    const RawDataset raw = blobs(12, 5);
    CvOptions opts;
    opts.n_folds = 12;
    opts.n_repeats = 1;
    const CvReport r = run_cv(raw, quick_config(), opts);
    REQUIRE(r.folds.size() == 12);
    for (const auto& f : r.folds) {
        CHECK(f.n_test == 1);
        CHECK((f.accuracy == 0.0 || f.accuracy == 1.0));
    }
}

TEST_CASE("models of a fold never see its test rows") {
    const RawDataset raw = blobs(50, 6);
    CvOptions opts;
    opts.n_folds = 5;
    opts.n_repeats = 1;
    opts.seed = 3;

    std::map<int, nlohmann::json> clean, tampered;
    opts.on_fold_model = [&](int f, const TrainingRun& run) { clean[f] = run.classifier.to_json(); };
    (void)run_cv(raw, quick_config(), opts);

    // scramble the test features of fold 2 only (labels drive the fold
    // assignment, so they stay); its model must not change
    const FoldPlan plan = cv_plan(raw, opts);
    RawDataset changed = raw;
    for (std::size_t k : plan.test_indices(2)) {
        changed.features.row(static_cast<Eigen::Index>(k)) *= -7.0;
    }
    opts.on_fold_model = [&](int f, const TrainingRun& run) { tampered[f] = run.classifier.to_json(); };
    (void)run_cv(changed, quick_config(), opts);

    CHECK(clean.size() == 5);
    CHECK(clean[2] == tampered[2]);
    CHECK(clean[1] != tampered[1]);
}

TEST_CASE("cross-validation rejects bad options") {
    const RawDataset raw = blobs(20, 7);
    CvOptions opts;
    opts.n_repeats = 0;
    CHECK_THROWS(run_cv(raw, quick_config(), opts));
    opts.n_repeats = 1;
    opts.n_folds = 50;
    CHECK_THROWS(run_cv(raw, quick_config(), opts));
}
