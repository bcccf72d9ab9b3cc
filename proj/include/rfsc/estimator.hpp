#ifndef RFSC_ESTIMATOR_HPP
#define RFSC_ESTIMATOR_HPP

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace rfsc {

/// How the residual variance feeding the coefficient standard errors is
/// computed from the final IRLS step.
enum class ResidualVariance {
    weighted,  // sum R_kk e_k^2 / (N - tau), the weighted least-squares estimate
    working,   // sum e_k^2 / (N - tau), unweighted working residuals
};

struct FitConfig {
    int max_newton_iters = 50;
    double grad_tol = 1e-8;
    double ridge = 0.0;
    // Ridge used to refit when the unregularized fit separates the data
    // (fitted probabilities numerically 0 or 1). Zero disables the refit.
    double separation_ridge = 1e-3;
    double alpha = 0.99;  // confidence of the coefficient interval
    bool iterate_pruning = false;
    ResidualVariance residual_variance = ResidualVariance::weighted;

    void validate() const;
};

/// Coefficients of a fixed regressor subset. `selected` holds indices into
/// the caller's candidate list; the design matrix columns follow that order.
struct FittedModel {
    std::vector<std::size_t> selected;
    Eigen::VectorXd theta;
    Eigen::VectorXd sigma;
    double loss = 0.0;
    double J = 0.0;
    bool converged = false;
    bool ridge_fallback = false;
    bool separated = false;  // refitted with the separation ridge
    double ridge = 0.0;      // penalty of the objective that was minimized
    int newton_iters = 0;

    [[nodiscard]] std::size_t size() const { return selected.size(); }
    [[nodiscard]] bool empty() const { return selected.empty(); }
};

/// Mean logistic loss (1/N) sum log(1 + exp(-y * design * theta)).
double logistic_loss(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::MatrixXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// Gradient of the mean logistic loss.
Eigen::VectorXd logistic_gradient(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::Ref<const Eigen::VectorXd>& y);

/// Hessian of the mean logistic loss, (1/N) Psi^T R Psi.
Eigen::MatrixXd logistic_hessian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                 const Eigen::Ref<const Eigen::MatrixXd>& design,
                                 const Eigen::Ref<const Eigen::VectorXd>& y);

/// IRLS weights R_kk = p_k (1 - p_k) with p_k = 1 / (1 + exp(y_k yhat_k)).
Eigen::VectorXd irls_weights(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y);

/// True when some fitted probability is numerically 0 or 1 (margin above
/// log(1 / (10 eps))), the usual sign that the classes are separated.
bool separated(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Damped Newton minimization of the (ridge-augmented) logistic loss,
/// starting from `init` (zero when empty). A separated fit is redone with
/// cfg.separation_ridge when cfg.ridge is zero.
FittedModel fit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                const FitConfig& cfg, const Eigen::VectorXd& init = {});

/// Standard errors sigma_j = sqrt(s_e^2 (G^-1)_jj), G = Psi^T R Psi (plus
/// N * model.ridge on the diagonal when the fit was regularized).
/// Sets `ridge_fallback` on the model when G had to be regularized.
Eigen::VectorXd coefficient_variances(FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      ResidualVariance mode = ResidualVariance::weighted);

/// Two-sided Student-t critical value at confidence `alpha`.
double t_critical(double alpha, double dof);

/// Drops every term whose confidence interval contains zero and refits
/// the survivors. The design columns correspond to model.selected.
FittedModel t_test_prune(const FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const FitConfig& cfg);

/// Fraction of samples with y * yhat > 0. A zero score counts as an error.
double performance_J(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y);
double performance_J(const FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

/// J of the empty model, which always predicts -1.
double empty_model_J(const Eigen::Ref<const Eigen::VectorXd>& y);

/// fit + variances + t-test pruning + refit + J, the full evaluation of one
/// candidate structure. `design` holds the columns for `selected`.
FittedModel estimate_structure(std::vector<std::size_t> selected, const Eigen::Ref<const Eigen::MatrixXd>& design,
                               const Eigen::Ref<const Eigen::VectorXd>& y, const FitConfig& cfg,
                               std::size_t* size_before_pruning = nullptr);

}  // namespace rfsc

#endif  // RFSC_ESTIMATOR_HPP
