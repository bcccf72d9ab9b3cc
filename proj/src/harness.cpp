#include "rfsc/harness.hpp"

#include "rfsc/metrics.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rfsc {

DcfMode parse_dcf_mode(const std::string& text) {
    if (text == "on") return DcfMode::on;
    if (text == "off") return DcfMode::off;
    if (text == "auto") return DcfMode::automatic;
    throw std::invalid_argument("dcf mode must be on, off or auto (got '" + text + "')");
}

std::string to_string(DcfMode mode) {
    switch (mode) {
        case DcfMode::on: return "on";
        case DcfMode::off: return "off";
        case DcfMode::automatic: return "auto";
    }
    return "auto";
}

bool TrainConfig::dcf_enabled(std::size_t n_features) const {
    switch (dcf) {
        case DcfMode::on: return true;
        case DcfMode::off: return false;
        case DcfMode::automatic: return n_features >= dcf_auto_min_features;
    }
    return false;
}

TrainingRun train(const RawDataset& raw, const TrainConfig& cfg, std::uint64_t seed, bool keep_traces) {
    raw.validate();
    const Dataset ds = normalize(raw);
    const std::size_t nf = ds.n_features();
    const bool screen = cfg.dcf_enabled(nf);

    TrainingRun run;
    std::vector<ClassModel> models;
    for (int c : modelled_classes(ds.n_classes)) {
        ClassRun cr;
        const BinaryTargets targets = recode(ds, c);
        std::vector<std::size_t> kept;
        if (screen) {
            cr.screening = dcf::filter_features(ds, targets, cfg.alpha_d);
            kept = cr.screening->kept;
        } else {
            for (std::size_t p = 0; p < nf; ++p) kept.push_back(p);
        }
        ClassModel cm;
        cm.class_index = c;
        cm.kept_features = kept;
        cm.regressors = enumerate(kept, nf, cfg.max_degree);

        RfscConfig rc = cfg.rfsc;
        rc.seed = derive_seed(seed, {static_cast<std::uint64_t>(c)});
        SelectionResult sel = select(targets, cm.regressors, ds.features, rc);
        cm.model = std::move(sel.model);
        cr.converged = sel.converged;
        if (keep_traces) cr.trace = std::move(sel.trace);
        cr.model = cm;
        models.push_back(std::move(cm));
        run.classes.push_back(std::move(cr));
    }
    run.classifier = Classifier(std::move(models), ds.norm_params, raw.label_map, raw.feature_names);
    return run;
}

TrainingRun best_of(std::vector<TrainingRun> runs) {
    if (runs.empty()) throw std::invalid_argument("best_of: no runs");
    TrainingRun& first = runs.front();
    std::vector<ClassModel> models = first.classifier.models();
    std::vector<ClassRun> classes = first.classes;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        const auto& cand = runs[r].classifier.models();
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (better_model(cand[i].model, models[i].model)) {
                models[i] = cand[i];
                classes[i] = runs[r].classes[i];
            }
        }
    }
    TrainingRun out;
    out.classifier = Classifier(std::move(models), first.classifier.norm_params(), first.classifier.label_map(),
                                first.classifier.feature_names());
    out.classes = std::move(classes);
    return out;
}

void CvReport::aggregate() {
    J_a = K_a = n_a = n_r = 0.0;
    if (folds.empty()) return;
    int n_kappa = 0;
    for (const auto& f : folds) {
        J_a += f.accuracy;
        if (std::isfinite(f.kappa)) {
            K_a += f.kappa;
            ++n_kappa;
        }
        n_a += static_cast<double>(f.n_attributes);
        n_r += static_cast<double>(f.n_regressors);
    }
    const double n = static_cast<double>(folds.size());
    J_a /= n;
    K_a = n_kappa > 0 ? K_a / n_kappa : std::numeric_limits<double>::quiet_NaN();
    n_a /= n;
    n_r /= n;
}

FoldPlan cv_plan(const RawDataset& raw, const CvOptions& opts) {
    return stratified_folds(raw.labels, opts.n_folds, derive_seed(opts.seed, {0x706c616eULL}));
}

CvReport run_cv(const RawDataset& raw, const TrainConfig& cfg, const CvOptions& opts) {
    raw.validate();
    if (opts.n_repeats < 1) throw std::invalid_argument("run_cv: need at least one repeat");
    const FoldPlan plan = cv_plan(raw, opts);

    struct Task {
        int fold;
        int repeat;
    };
    std::vector<Task> tasks;
    for (int f = 1; f <= opts.n_folds; ++f) {
        for (int r = 0; r < opts.n_repeats; ++r) tasks.push_back({f, r});
    }
    std::vector<RawDataset> train_sets;
    for (int f = 1; f <= opts.n_folds; ++f) train_sets.push_back(raw.subset(plan.train_indices(f)));

    std::vector<std::optional<TrainingRun>> results(tasks.size());
    std::vector<double> seconds(tasks.size(), 0.0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task t = tasks[i];
            try {
                const auto start = std::chrono::steady_clock::now();
                const std::uint64_t seed = derive_seed(
                    opts.seed, {static_cast<std::uint64_t>(t.fold), static_cast<std::uint64_t>(t.repeat)});
                results[i] = train(train_sets[static_cast<std::size_t>(t.fold - 1)], cfg, seed, false);
                seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                if (opts.progress) {
                    std::lock_guard lock(progress_mutex);
                    std::ostringstream os;
                    os << "fold " << t.fold << " repeat " << (t.repeat + 1) << " done in " << std::fixed
                       << std::setprecision(2) << seconds[i] << " s";
                    opts.progress(os.str());
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    try {
                        throw std::runtime_error("fold " + std::to_string(t.fold) + ", repeat " +
                                                 std::to_string(t.repeat + 1) + ": " + e.what());
                    } catch (...) {
                        failure = std::current_exception();
                    }
                }
                next.store(tasks.size());
            }
        }
    };

    const unsigned jobs = std::max(1u, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    CvReport report;
    report.n_folds = opts.n_folds;
    report.n_repeats = opts.n_repeats;
    report.seed = opts.seed;
    report.dcf_used = cfg.dcf_enabled(raw.n_features());
    report.trained_models = tasks.size();

    for (int f = 1; f <= opts.n_folds; ++f) {
        std::vector<TrainingRun> runs;
        FoldResult fr;
        fr.fold = f;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].fold != f) continue;
            runs.push_back(std::move(*results[i]));
            fr.seconds += seconds[i];
        }
        // remember which repeat supplied each class model
        std::vector<int> best(runs.front().classifier.models().size(), 0);
        for (std::size_t r = 1; r < runs.size(); ++r) {
            for (std::size_t c = 0; c < best.size(); ++c) {
                if (better_model(runs[r].classifier.models()[c].model,
                                 runs[static_cast<std::size_t>(best[c])].classifier.models()[c].model)) {
                    best[c] = static_cast<int>(r);
                }
            }
        }
        const TrainingRun chosen = best_of(std::move(runs));
        for (int b : best) fr.best_run.push_back(b + 1);
        for (const auto& cr : chosen.classes) {
            if (cr.screening) fr.screened_features.push_back(cr.screening->kept.size());
        }

        if (opts.on_fold_model) opts.on_fold_model(f, chosen);

        const auto test_idx = plan.test_indices(f);
        const RawDataset test = raw.subset(test_idx);
        const std::vector<int> predicted = chosen.classifier.predict_all(test.features);
        const ConfusionMatrix cm(raw.n_classes(), predicted, test.labels);
        fr.n_test = test_idx.size();
        fr.accuracy = accuracy(cm);
        try {
            fr.kappa = kappa(cm);
        } catch (const evaluation_error&) {
            fr.kappa = std::numeric_limits<double>::quiet_NaN();
        }
        const ModelSize size = chosen.classifier.model_size();
        fr.n_attributes = size.n_attributes;
        fr.n_regressors = size.n_regressors;
        report.folds.push_back(std::move(fr));
    }
    report.aggregate();
    return report;
}

void write_cv_table(std::ostream& os, const CvReport& report) {
    const auto flags = os.flags();
    os << "dataset: " << report.dataset << "  folds: " << report.n_folds << "  repeats: " << report.n_repeats
       << "  seed: " << report.seed << "  screening: " << (report.dcf_used ? "on" : "off") << "\n";
    os << std::left << std::setw(6) << "fold" << std::setw(12) << "accuracy" << std::setw(12) << "kappa"
       << std::setw(8) << "n_a" << std::setw(8) << "n_r" << std::setw(8) << "n_test" << "best_run\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& f : report.folds) {
        std::string runs;
        for (std::size_t i = 0; i < f.best_run.size(); ++i) runs += (i ? "," : "") + std::to_string(f.best_run[i]);
        os << std::setw(6) << f.fold << std::setw(12) << f.accuracy << std::setw(12) << f.kappa << std::setw(8)
           << f.n_attributes << std::setw(8) << f.n_regressors << std::setw(8) << f.n_test << runs << "\n";
    }
    os << "J_a = " << report.J_a << "   K_a = " << report.K_a << "   n_a = " << std::setprecision(2) << report.n_a
       << "   n_r = " << report.n_r << "   trained models = " << report.trained_models << "\n";
    os.flags(flags);
}

void write_cv_tsv(std::ostream& os, const CvReport& report) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "fold\taccuracy\tkappa\tn_attributes\tn_regressors\tn_test\tbest_run\tscreened_features\n";
    for (const auto& f : report.folds) {
        std::string runs, screened;
        for (std::size_t i = 0; i < f.best_run.size(); ++i) runs += (i ? "," : "") + std::to_string(f.best_run[i]);
        for (std::size_t i = 0; i < f.screened_features.size(); ++i) {
            screened += (i ? "," : "") + std::to_string(f.screened_features[i]);
        }
        os << f.fold << '\t' << f.accuracy << '\t' << f.kappa << '\t' << f.n_attributes << '\t' << f.n_regressors
           << '\t' << f.n_test << '\t' << runs << '\t' << (screened.empty() ? "-" : screened) << '\n';
    }
    os << "mean\t" << report.J_a << '\t' << report.K_a << '\t' << report.n_a << '\t' << report.n_r << "\t-\t-\t-\n";
    os.flags(flags);
    os.precision(prec);
}

}  // namespace rfsc
