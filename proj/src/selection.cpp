#include "rfsc/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace rfsc {

void RfscConfig::validate() const {
    if (n_population < 2) throw std::invalid_argument("population size must be >= 2");
    if (max_iterations < 1) throw std::invalid_argument("iteration limit must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (mu_init && !(*mu_init > 0.0 && *mu_init < 1.0)) throw std::invalid_argument("mu_init must lie in (0,1)");
    if (!(final_threshold > 0.0 && final_threshold <= 1.0)) {
        throw std::invalid_argument("final threshold must lie in (0,1]");
    }
    fit.validate();
}

double RfscConfig::initial_mu(std::size_t n_regressors) const {
    if (mu_init) return *mu_init;
    return n_regressors > 0 ? 1.0 / static_cast<double>(n_regressors) : 0.0;
}

std::vector<std::size_t> sample_structure(const RipState& rip, Rng& rng) {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < rip.mu.size(); ++j) {
        if (rng.bernoulli(rip.mu(j))) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

Eigen::VectorXd importance(const std::vector<ScoredStructure>& population, std::size_t n_regressors) {
    if (population.empty()) throw std::invalid_argument("importance: empty population");
    const auto nr = static_cast<Eigen::Index>(n_regressors);
    Eigen::VectorXd sum_in = Eigen::VectorXd::Zero(nr);
    Eigen::VectorXi count_in = Eigen::VectorXi::Zero(nr);
    double total = 0.0;
    for (const auto& s : population) {
        total += s.J;
        for (std::size_t j : s.structure) {
            if (j >= n_regressors) throw std::out_of_range("importance: regressor index out of range");
            sum_in(static_cast<Eigen::Index>(j)) += s.J;
            ++count_in(static_cast<Eigen::Index>(j));
        }
    }
    const int n = static_cast<int>(population.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nr);
    for (Eigen::Index j = 0; j < nr; ++j) {
        const int in = count_in(j);
        if (in == 0 || in == n) continue;
        out(j) = sum_in(j) / in - (total - sum_in(j)) / (n - in);
    }
    return out;
}

double step_size(double J_max, double J_mean) { return 1.0 / (10.0 * (J_max - J_mean) + 0.1); }

RipState update_rips(const RipState& rip, const Eigen::Ref<const Eigen::VectorXd>& importance, double gamma) {
    if (importance.size() != rip.mu.size()) throw std::invalid_argument("update_rips: length mismatch");
    RipState next;
    next.iteration = rip.iteration + 1;
    next.mu = (rip.mu + gamma * importance).cwiseMax(0.0).cwiseMin(1.0);
    return next;
}

std::vector<std::size_t> threshold_structure(const RipState& rip, double threshold) {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < rip.mu.size(); ++j) {
        if (rip.mu(j) >= threshold) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

bool better_model(const FittedModel& a, const FittedModel& b) {
    if (a.J != b.J) return a.J > b.J;
    if (a.size() != b.size()) return a.size() < b.size();
    return a.loss < b.loss;
}

namespace {

struct Outcome {
    double J = 0.0;
    double loss = 0.0;
    std::size_t size_pre = 0;
    std::size_t size_post = 0;
};

}  // namespace

SelectionResult select(const BinaryTargets& targets, const RegressorSet& regressors, const Eigen::MatrixXd& data,
                       const RfscConfig& cfg) {
    cfg.validate();
    if (static_cast<Eigen::Index>(data.rows()) != targets.y.size()) {
        throw std::invalid_argument("select: data rows do not match target length");
    }
    const DesignSource source(regressors, data);
    const std::size_t nr = regressors.size();
    const Eigen::VectorXd& y = targets.y;

    SelectionResult result;
    RipState rip;
    rip.mu = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nr), cfg.initial_mu(nr));

    for (int it = 0; it < cfg.max_iterations; ++it) {
        std::vector<ScoredStructure> population(static_cast<std::size_t>(cfg.n_population));
        std::map<std::vector<std::size_t>, Outcome> memo;
        IterationTrace tr;
        tr.iteration = it + 1;
        tr.J_max = -1.0;

        for (int p = 0; p < cfg.n_population; ++p) {
            Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(p)}));
            std::vector<std::size_t> structure = sample_structure(rip, rng);
            auto found = memo.find(structure);
            if (found == memo.end()) {
                Outcome o;
                const Eigen::MatrixXd design = source.columns(structure);
                const FittedModel m = estimate_structure(structure, design, y, cfg.fit, &o.size_pre);
                o.J = m.J;
                o.loss = m.loss;
                o.size_post = m.size();
                found = memo.emplace(structure, o).first;
            }
            const Outcome& o = found->second;
            tr.mean_loss += o.loss;
            tr.ams_pre += static_cast<double>(o.size_pre);
            tr.ams_post += static_cast<double>(o.size_post);
            tr.J_mean += o.J;
            tr.J_max = std::max(tr.J_max, o.J);
            population[static_cast<std::size_t>(p)] = {std::move(structure), o.J};
        }
        const double np = static_cast<double>(cfg.n_population);
        tr.mean_loss /= np;
        tr.ams_pre /= np;
        tr.ams_post /= np;
        tr.J_mean /= np;
        // rounding can leave the mean a hair above the max
        tr.J_mean = std::min(tr.J_mean, tr.J_max);
        tr.gamma = step_size(tr.J_max, tr.J_mean);

        const Eigen::VectorXd imp = importance(population, nr);
        RipState next = update_rips(rip, imp, tr.gamma);
        tr.max_change = nr > 0 ? (next.mu - rip.mu).cwiseAbs().maxCoeff() : 0.0;
        rip = std::move(next);
        tr.n_mu_above_half = static_cast<int>((rip.mu.array() >= 0.5).count());
        tr.mu = rip.mu;
        result.trace.push_back(std::move(tr));

        // Stop at a limit distribution: probabilities have settled and sit
        // within epsilon of 0 or 1. A population without any spread in J
        // carries no information and also ends the loop.
        const bool settled = result.trace.back().max_change <= cfg.epsilon;
        const bool binary = (rip.mu.array().min(1.0 - rip.mu.array()) <= cfg.epsilon).all();
        // J takes values k/N, so any real contrast is far above rounding noise
        const bool uninformative = nr == 0 || imp.cwiseAbs().maxCoeff() <= 1e-12;
        if (settled && (binary || uninformative)) {
            result.converged = true;
            break;
        }
    }

    const std::vector<std::size_t> structure = threshold_structure(rip, cfg.final_threshold);
    const Eigen::MatrixXd design = source.columns(structure);
    result.model = estimate_structure(structure, design, y, cfg.fit);
    result.final_rips = rip;
    return result;
}

void write_trace(std::ostream& os, const std::vector<IterationTrace>& trace) {
    os << "iteration\tJ_mean\tJ_max\tgamma\tams_pre\tams_post\tn_mu_above_half\tmean_loss\tmax_change\n";
    for (const auto& t : trace) {
        os << t.iteration << '\t' << t.J_mean << '\t' << t.J_max << '\t' << t.gamma << '\t' << t.ams_pre << '\t'
           << t.ams_post << '\t' << t.n_mu_above_half << '\t' << t.mean_loss << '\t' << t.max_change << '\n';
    }
}

}  // namespace rfsc
