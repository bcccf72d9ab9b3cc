#ifndef RFSC_SELECTION_HPP
#define RFSC_SELECTION_HPP

#include "rfsc/dataset.hpp"
#include "rfsc/estimator.hpp"
#include "rfsc/features.hpp"
#include "rfsc/seeding.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rfsc {

/// Regressor inclusion probabilities.
struct RipState {
    Eigen::VectorXd mu;
    int iteration = 0;
};

struct RfscConfig {
    int n_population = 100;
    int max_iterations = 300;
    double epsilon = 0.01;
    std::optional<double> mu_init;  // 1 / N_r when unset
    double final_threshold = 0.5;
    std::uint64_t seed = 1;
    FitConfig fit;

    void validate() const;
    [[nodiscard]] double initial_mu(std::size_t n_regressors) const;
};

struct IterationTrace {
    int iteration = 0;
    double mean_loss = 0.0;
    double ams_pre = 0.0;   // average structure size as sampled
    double ams_post = 0.0;  // average size after t-test pruning
    double J_max = 0.0;
    double J_mean = 0.0;
    double gamma = 0.0;
    double max_change = 0.0;
    int n_mu_above_half = 0;
    Eigen::VectorXd mu;  // after the update
};

struct ScoredStructure {
    std::vector<std::size_t> structure;
    double J = 0.0;
};

struct SelectionResult {
    FittedModel model;
    std::vector<IterationTrace> trace;
    RipState final_rips;
    bool converged = false;
};

/// Independent Bernoulli draw per regressor.
std::vector<std::size_t> sample_structure(const RipState& rip, Rng& rng);

/// Mean J of models containing j minus mean J of models lacking j; zero when
/// either group is empty.
Eigen::VectorXd importance(const std::vector<ScoredStructure>& population, std::size_t n_regressors);

double step_size(double J_max, double J_mean);

/// mu_j <- clamp(mu_j + gamma * I_j, 0, 1)
RipState update_rips(const RipState& rip, const Eigen::Ref<const Eigen::VectorXd>& importance, double gamma);

/// Regressors with mu_j >= threshold, ascending.
std::vector<std::size_t> threshold_structure(const RipState& rip, double threshold);

/// Runs the randomized selection loop for one binary target and returns
/// the model built from the final inclusion probabilities.
SelectionResult select(const BinaryTargets& targets, const RegressorSet& regressors, const Eigen::MatrixXd& data,
                       const RfscConfig& cfg);

/// Tab-separated trace, one row per iteration.
void write_trace(std::ostream& os, const std::vector<IterationTrace>& trace);

/// Strict weak order: higher J, then fewer regressors, then lower loss.
bool better_model(const FittedModel& a, const FittedModel& b);

}  // namespace rfsc

#endif  // RFSC_SELECTION_HPP
