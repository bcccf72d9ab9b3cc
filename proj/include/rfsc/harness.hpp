#ifndef RFSC_HARNESS_HPP
#define RFSC_HARNESS_HPP

#include "rfsc/classifier.hpp"
#include "rfsc/dataset.hpp"
#include "rfsc/dcf.hpp"
#include "rfsc/selection.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfsc {

enum class DcfMode { off, on, automatic };

DcfMode parse_dcf_mode(const std::string& text);
std::string to_string(DcfMode mode);

struct TrainConfig {
    std::size_t max_degree = 2;
    RfscConfig rfsc;
    DcfMode dcf = DcfMode::automatic;
    double alpha_d = 0.05;
    std::size_t dcf_auto_min_features = 16;  // automatic mode screens when N_f > 15

    [[nodiscard]] bool dcf_enabled(std::size_t n_features) const;
};

struct ClassRun {
    ClassModel model;
    std::vector<IterationTrace> trace;
    bool converged = false;
    std::optional<dcf::Result> screening;
};

/// Fits one classifier on a raw training set: normalization, optional
/// screening, one selection run per modelled class.
struct TrainingRun {
    Classifier classifier;
    std::vector<ClassRun> classes;
};

TrainingRun train(const RawDataset& raw, const TrainConfig& cfg, std::uint64_t seed, bool keep_traces = true);

/// Picks, per class, the best of several runs on the same data.
TrainingRun best_of(std::vector<TrainingRun> runs);

struct FoldResult {
    int fold = 0;
    std::vector<int> best_run;  // per modelled class
    double accuracy = 0.0;
    double kappa = 0.0;  // NaN when undefined on this fold
    std::size_t n_attributes = 0;
    std::size_t n_regressors = 0;
    std::size_t n_test = 0;
    double seconds = 0.0;
    std::vector<std::size_t> screened_features;  // features kept per modelled class; empty without screening
};

struct CvReport {
    std::string dataset;
    int n_folds = 0;
    int n_repeats = 0;
    std::uint64_t seed = 0;
    bool dcf_used = false;
    std::vector<FoldResult> folds;
    double J_a = 0.0;
    double K_a = 0.0;
    double n_a = 0.0;
    double n_r = 0.0;
    std::size_t trained_models = 0;

    /// Recomputes the aggregates from the per-fold entries.
    void aggregate();
};

struct CvOptions {
    int n_folds = 10;
    int n_repeats = 10;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::function<void(const std::string&)> progress;
    // receives the per-fold classifier (best of the repeats) before it is tested
    std::function<void(int fold, const TrainingRun&)> on_fold_model;
};

/// The fold assignment run_cv uses for these options.
FoldPlan cv_plan(const RawDataset& raw, const CvOptions& opts);

CvReport run_cv(const RawDataset& raw, const TrainConfig& cfg, const CvOptions& opts);

void write_cv_table(std::ostream& os, const CvReport& report);
void write_cv_tsv(std::ostream& os, const CvReport& report);

}  // namespace rfsc

#endif  // RFSC_HARNESS_HPP
