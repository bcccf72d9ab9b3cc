// Command-line front end: inspect, dcf, train, cv, predict, explain.
//
// Exit codes: 0 success, 1 usage error, 2 I/O or input-format error,
// 3 numeric failure.

#include "rfsc/classifier.hpp"
#include "rfsc/dataset.hpp"
#include "rfsc/dcf.hpp"
#include "rfsc/harness.hpp"
#include "rfsc/metrics.hpp"
#include "rfsc/selection.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flag values; unset optionals fall back to the config file, then to the
/// built-in defaults.
struct Flags {
    std::string data;
    std::optional<std::string> config;
    std::optional<std::size_t> degree;
    std::optional<int> population;
    std::optional<int> iterations;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    std::optional<double> alpha_d;
    std::optional<double> mu_init;
    std::optional<std::string> dcf;
    std::optional<std::uint64_t> seed;
    std::optional<int> folds;
    std::optional<int> repeats;
    std::optional<unsigned> jobs;
    std::optional<std::string> out;
    std::string model;
    std::optional<int> class_index;
    bool quiet = false;
};

struct RunConfig {
    std::size_t degree = 2;
    int population = 100;
    int iterations = 300;
    double epsilon = 0.01;
    double alpha = 0.99;
    double alpha_d = 0.05;
    std::optional<double> mu_init;
    rfsc::DcfMode dcf = rfsc::DcfMode::automatic;
    std::uint64_t seed = 1;
    int folds = 10;
    int repeats = 10;

    [[nodiscard]] json to_json() const {
        json j;
        j["format"] = "rfsc-config";
        j["degree"] = degree;
        j["population"] = population;
        j["iterations"] = iterations;
        j["epsilon"] = epsilon;
        j["alpha"] = alpha;
        j["alpha_d"] = alpha_d;
        j["mu_init"] = mu_init ? json(*mu_init) : json("1/N_r");
        j["dcf"] = rfsc::to_string(dcf);
        j["seed"] = seed;
        j["folds"] = folds;
        j["repeats"] = repeats;
        return j;
    }

    void merge(const json& j) {
        degree = j.value("degree", degree);
        population = j.value("population", population);
        iterations = j.value("iterations", iterations);
        epsilon = j.value("epsilon", epsilon);
        alpha = j.value("alpha", alpha);
        alpha_d = j.value("alpha_d", alpha_d);
        if (j.contains("mu_init")) {
            if (j["mu_init"].is_number()) {
                mu_init = j["mu_init"].get<double>();
            } else {
                mu_init.reset();
            }
        }
        if (j.contains("dcf")) dcf = rfsc::parse_dcf_mode(j["dcf"].get<std::string>());
        seed = j.value("seed", seed);
        folds = j.value("folds", folds);
        repeats = j.value("repeats", repeats);
    }

    [[nodiscard]] rfsc::TrainConfig train_config() const {
        rfsc::TrainConfig tc;
        tc.max_degree = degree;
        tc.rfsc.n_population = population;
        tc.rfsc.max_iterations = iterations;
        tc.rfsc.epsilon = epsilon;
        tc.rfsc.mu_init = mu_init;
        tc.rfsc.fit.alpha = alpha;
        tc.dcf = dcf;
        tc.alpha_d = alpha_d;
        return tc;
    }
};

RunConfig resolve(const Flags& f) {
    RunConfig rc;
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw std::ios_base::failure("cannot open config " + *f.config);
        const json doc = json::parse(in);
        // a saved model carries the config it was trained with
        if (doc.value("format", "") == "rfsc-model") {
            rc.merge(doc.at("metadata").at("config"));
        } else {
            rc.merge(doc);
        }
    }
    if (f.degree) rc.degree = *f.degree;
    if (f.population) rc.population = *f.population;
    if (f.iterations) rc.iterations = *f.iterations;
    if (f.epsilon) rc.epsilon = *f.epsilon;
    if (f.alpha) rc.alpha = *f.alpha;
    if (f.alpha_d) rc.alpha_d = *f.alpha_d;
    if (f.mu_init) rc.mu_init = *f.mu_init;
    if (f.dcf) rc.dcf = rfsc::parse_dcf_mode(*f.dcf);
    if (f.seed) rc.seed = *f.seed;
    if (f.folds) rc.folds = *f.folds;
    if (f.repeats) rc.repeats = *f.repeats;

    rfsc::TrainConfig tc = rc.train_config();
    try {
        tc.rfsc.validate();
        (void)rfsc::dcf::threshold(rc.alpha_d);
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    if (rc.folds < 2) throw usage_error("--folds must be >= 2");
    if (rc.repeats < 1) throw usage_error("--repeats must be >= 1");
    return rc;
}

fs::path output_dir(const Flags& f) {
    fs::path dir;
    if (f.out) {
        dir = *f.out;
    } else {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        localtime_r(&now, &tm);
        std::ostringstream os;
        os << "rfsc-" << std::put_time(&tm, "%Y%m%d-%H%M%S");
        dir = os.str();
    }
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    return out;
}

unsigned job_count(const Flags& f) {
    if (f.jobs && *f.jobs > 0) return *f.jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_inspect(const Flags& f) {
    const rfsc::RawDataset raw = rfsc::read_delimited(f.data);
    const std::size_t degree = f.degree.value_or(2);
    std::cout << "samples: " << raw.n_samples() << "\nfeatures: " << raw.n_features()
              << "\nclasses: " << raw.n_classes() << "\n";
    std::vector<std::size_t> counts(static_cast<std::size_t>(raw.n_classes()), 0);
    for (int c : raw.labels) ++counts[static_cast<std::size_t>(c - 1)];
    for (int c = 1; c <= raw.n_classes(); ++c) {
        std::cout << "  class " << c << " (" << raw.label_map.names[static_cast<std::size_t>(c - 1)]
                  << "): " << counts[static_cast<std::size_t>(c - 1)] << "\n";
    }
    std::cout << "regressors at degree " << degree << ": " << rfsc::regressor_count(raw.n_features(), degree) << "\n";
    return kOk;
}

int cmd_dcf(const Flags& f) {
    const RunConfig rc = resolve(f);
    const rfsc::RawDataset raw = rfsc::read_delimited(f.data);
    const rfsc::Dataset ds = rfsc::normalize(raw);
    const fs::path dir = output_dir(f);
    std::ofstream out = open_out(dir / "dcf_report.tsv");
    for (int c : rfsc::modelled_classes(ds.n_classes)) {
        const auto res = rfsc::dcf::filter_features(ds, rfsc::recode(ds, c), rc.alpha_d);
        rfsc::dcf::write_report(out, res, raw.feature_names);
        if (!f.quiet) {
            std::cout << "class " << c << ": kept " << res.kept.size() << " of " << ds.n_features()
                      << " features (threshold " << res.threshold << ")\n";
        }
    }
    if (!f.quiet) std::cout << "report: " << (dir / "dcf_report.tsv").string() << "\n";
    return kOk;
}

int cmd_train(const Flags& f) {
    const RunConfig rc = resolve(f);
    const rfsc::RawDataset raw = rfsc::read_delimited(f.data);
    const fs::path dir = output_dir(f);
    const rfsc::TrainConfig tc = rc.train_config();

    std::vector<rfsc::TrainingRun> runs;
    for (int r = 0; r < rc.repeats; ++r) {
        runs.push_back(rfsc::train(raw, tc, rfsc::derive_seed(rc.seed, {0x747261696eULL, static_cast<std::uint64_t>(r)})));
    }
    rfsc::TrainingRun best = rfsc::best_of(std::move(runs));
    best.classifier.metadata()["config"] = rc.to_json();
    best.classifier.metadata()["dataset"] = f.data;
    best.classifier.metadata()["n_samples"] = raw.n_samples();
    best.classifier.save(dir / "model.json");

    for (const auto& cr : best.classes) {
        const std::string tag = "class" + std::to_string(cr.model.class_index);
        std::ofstream trace = open_out(dir / ("trace_" + tag + ".tsv"));
        rfsc::write_trace(trace, cr.trace);
        std::ofstream rips = open_out(dir / ("rips_" + tag + ".tsv"));
        rips << "iteration";
        for (const auto& m : cr.model.regressors.monomials()) rips << '\t' << m.to_string();
        rips << '\n';
        for (const auto& t : cr.trace) {
            rips << t.iteration;
            for (Eigen::Index j = 0; j < t.mu.size(); ++j) rips << '\t' << t.mu(j);
            rips << '\n';
        }
        if (cr.screening) {
            std::ofstream rep = open_out(dir / ("dcf_" + tag + ".tsv"));
            rfsc::dcf::write_report(rep, *cr.screening, raw.feature_names);
        }
    }

    const auto predicted = best.classifier.predict_all(raw.features);
    const rfsc::ConfusionMatrix cm(raw.n_classes(), predicted, raw.labels);
    if (!f.quiet) {
        for (const auto& cm_model : best.classifier.models()) {
            std::cout << "class " << cm_model.class_index << ": J=" << cm_model.model.J << " terms:";
            for (std::size_t c = 0; c < cm_model.model.selected.size(); ++c) {
                std::cout << ' ' << std::showpos << cm_model.model.theta(static_cast<Eigen::Index>(c))
                          << std::noshowpos << '*' << cm_model.regressors[cm_model.model.selected[c]].to_string();
            }
            std::cout << "\n";
        }
        const auto size = best.classifier.model_size();
        std::cout << "training accuracy: " << rfsc::accuracy(cm) << "\n"
                  << "attributes used: " << size.n_attributes << ", regressors used: " << size.n_regressors << "\n"
                  << "model: " << (dir / "model.json").string() << "\n";
    }
    return kOk;
}

int cmd_cv(const Flags& f) {
    const RunConfig rc = resolve(f);
    rfsc::RawDataset raw = rfsc::read_delimited(f.data);
    const fs::path dir = output_dir(f);
    rfsc::CvOptions opts;
    opts.n_folds = rc.folds;
    opts.n_repeats = rc.repeats;
    opts.seed = rc.seed;
    opts.jobs = job_count(f);
    if (!f.quiet) opts.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
    rfsc::CvReport report = rfsc::run_cv(raw, rc.train_config(), opts);
    report.dataset = fs::path(f.data).filename().string();

    std::ofstream table = open_out(dir / "cv_report.txt");
    rfsc::write_cv_table(table, report);
    std::ofstream tsv = open_out(dir / "cv_report.tsv");
    rfsc::write_cv_tsv(tsv, report);
    std::ofstream timing = open_out(dir / "cv_timing.tsv");
    timing << "fold\tseconds\n";
    for (const auto& fr : report.folds) timing << fr.fold << '\t' << fr.seconds << '\n';
    std::ofstream cfg = open_out(dir / "config.json");
    cfg << rc.to_json().dump(2) << '\n';
    if (!f.quiet) rfsc::write_cv_table(std::cout, report);
    return kOk;
}

struct LabeledRows {
    Eigen::MatrixXd features;
    std::vector<int> labels;  // empty when the file has no class column
};

LabeledRows read_rows(const std::string& path, const rfsc::Classifier& clf) {
    LabeledRows rows;
    rows.features = rfsc::read_unlabeled(path, clf.n_features());
    try {
        const rfsc::RawDataset raw = rfsc::read_delimited(path);
        if (raw.n_features() == clf.n_features()) {
            for (std::size_t k = 0; k < raw.n_samples(); ++k) {
                const std::string& token = raw.label_map.names[static_cast<std::size_t>(raw.labels[k] - 1)];
                rows.labels.push_back(clf.label_map().id_of(token));
            }
        }
    } catch (const rfsc::data_error&) {
        rows.labels.clear();
    }
    return rows;
}

int cmd_predict(const Flags& f) {
    const rfsc::Classifier clf = rfsc::Classifier::load(f.model);
    const LabeledRows rows = read_rows(f.data, clf);
    const fs::path dir = output_dir(f);
    std::ofstream out = open_out(dir / "predictions.tsv");
    out << std::setprecision(17) << "row\tpredicted";
    for (const auto& m : clf.models()) out << "\tscore_class" << m.class_index;
    out << '\n';
    std::vector<int> predicted;
    for (Eigen::Index r = 0; r < rows.features.rows(); ++r) {
        const rfsc::Prediction p = clf.predict(rows.features.row(r).transpose());
        predicted.push_back(p.class_id);
        out << (r + 1) << '\t' << clf.label_map().names[static_cast<std::size_t>(p.class_id - 1)];
        for (double s : p.scores) out << '\t' << s;
        out << '\n';
    }
    if (!f.quiet) std::cout << "predictions: " << (dir / "predictions.tsv").string() << "\n";
    const bool known = !rows.labels.empty() && std::find(rows.labels.begin(), rows.labels.end(), 0) == rows.labels.end();
    if (known) {
        const rfsc::ConfusionMatrix cm(clf.n_classes(), predicted, rows.labels);
        std::cout << "accuracy: " << rfsc::accuracy(cm) << "\n";
        try {
            std::cout << "kappa: " << rfsc::kappa(cm) << "\n";
        } catch (const rfsc::evaluation_error& e) {
            std::cout << "kappa: undefined (" << e.what() << ")\n";
        }
    }
    return kOk;
}

int cmd_explain(const Flags& f) {
    const rfsc::Classifier clf = rfsc::Classifier::load(f.model);
    const LabeledRows rows = read_rows(f.data, clf);
    const fs::path dir = output_dir(f);
    std::ofstream out = open_out(dir / "explain.tsv");
    out << std::setprecision(17) << "row\tclass\tscore\ty_plus\ty_minus\tdelta\tcontributions\n";
    std::vector<int> classes;
    if (f.class_index) {
        classes.push_back(*f.class_index);
    } else {
        for (const auto& m : clf.models()) classes.push_back(m.class_index);
    }
    for (Eigen::Index r = 0; r < rows.features.rows(); ++r) {
        for (int c : classes) {
            const rfsc::Explanation e = clf.explain(rows.features.row(r).transpose(), c);
            out << (r + 1) << '\t' << c << '\t' << e.score() << '\t' << e.y_plus << '\t' << e.y_minus << '\t'
                << e.delta << '\t';
            for (std::size_t i = 0; i < e.supporting.size(); ++i) {
                out << (i ? ";" : "") << e.supporting[i].first.to_string() << '=' << e.supporting[i].second;
            }
            out << '\n';
        }
    }
    if (!f.quiet) std::cout << "explanations: " << (dir / "explain.tsv").string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized feature selection and polynomial logistic classification"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--data", f.data, "Delimited data file, class label in the last column")->required();
        sub->add_option("--config", f.config, "JSON config (or a saved model) supplying defaults");
        sub->add_option("--out", f.out, "Output directory (default: timestamped)");
        sub->add_flag("--quiet", f.quiet, "Suppress console output");
    };
    auto add_training = [&](CLI::App* sub) {
        sub->add_option("--degree", f.degree, "Maximum monomial degree (default 2)");
        sub->add_option("--population", f.population, "Models extracted per iteration (default 100)");
        sub->add_option("--iterations", f.iterations, "Iteration limit (default 300)");
        sub->add_option("--epsilon", f.epsilon, "Stop when no probability moves more than this (default 0.01)");
        sub->add_option("--alpha", f.alpha, "Confidence of the coefficient t-test (default 0.99)");
        sub->add_option("--alpha-d", f.alpha_d, "Significance of the screening test (default 0.05)");
        sub->add_option("--mu-init", f.mu_init, "Initial inclusion probability (default 1/N_r)");
        sub->add_option("--dcf", f.dcf, "Distance-correlation screening: on, off, auto (default auto)")
            ->check(CLI::IsMember({"on", "off", "auto"}));
        sub->add_option("--seed", f.seed, "Random seed (default 1)");
        sub->add_option("--repeats", f.repeats, "Independent runs; the best is kept (default 10)");
    };

    auto* inspect = app.add_subcommand("inspect", "Summarize a dataset");
    inspect->add_option("--data", f.data, "Delimited data file")->required();
    inspect->add_option("--degree", f.degree, "Degree used for the regressor count");

    auto* dcf = app.add_subcommand("dcf", "Run distance-correlation screening and write a report");
    add_common(dcf);
    dcf->add_option("--alpha-d", f.alpha_d, "Significance of the screening test (default 0.05)");

    auto* train = app.add_subcommand("train", "Train a classifier on the whole file");
    add_common(train);
    add_training(train);

    auto* cv = app.add_subcommand("cv", "Stratified cross-validation");
    add_common(cv);
    add_training(cv);
    cv->add_option("--folds", f.folds, "Number of folds (default 10)");
    cv->add_option("--jobs", f.jobs, "Worker threads (default: hardware concurrency)");

    auto* predict = app.add_subcommand("predict", "Predict classes with a saved model");
    predict->add_option("--model", f.model, "Model file written by train")->required();
    predict->add_option("--data", f.data, "Rows to classify (class column optional)")->required();
    predict->add_option("--out", f.out, "Output directory");
    predict->add_flag("--quiet", f.quiet, "Suppress console output");

    auto* explain = app.add_subcommand("explain", "Split model scores into positive and negative parts");
    explain->add_option("--model", f.model, "Model file written by train")->required();
    explain->add_option("--data", f.data, "Rows to explain (class column optional)")->required();
    explain->add_option("--class", f.class_index, "Only this class (default: every modelled class)");
    explain->add_option("--out", f.out, "Output directory");
    explain->add_flag("--quiet", f.quiet, "Suppress console output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (inspect->parsed()) return cmd_inspect(f);
        if (dcf->parsed()) return cmd_dcf(f);
        if (train->parsed()) return cmd_train(f);
        if (cv->parsed()) return cmd_cv(f);
        if (predict->parsed()) return cmd_predict(f);
        if (explain->parsed()) return cmd_explain(f);
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const rfsc::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
