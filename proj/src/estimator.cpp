#include "rfsc/estimator.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfsc {

namespace {

// Everything the loss needs at one point, from a single exp per sample.
// m = y * yhat, e = exp(-|m|).
struct Margins {
    Eigen::ArrayXd m;
    Eigen::ArrayXd e;

    Margins(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& theta,
            const Eigen::Ref<const Eigen::VectorXd>& y)
        : m(y.array() * (design * theta).array()), e((-m.abs()).exp()) {}

    // mean of log(1 + exp(-m))
    [[nodiscard]] double loss() const {
        if (m.size() == 0) return 0.0;
        return ((-m).max(0.0) + e.log1p()).mean();
    }
    // 1 / (1 + exp(m)), the probability given to the wrong label
    [[nodiscard]] Eigen::ArrayXd wrong() const { return (m >= 0.0).select(e / (1.0 + e), 1.0 / (1.0 + e)); }
    // p (1 - p), symmetric in the sign of m
    [[nodiscard]] Eigen::ArrayXd weights() const { return e / (1.0 + e).square(); }
    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                           const Eigen::Ref<const Eigen::VectorXd>& y) const {
        const Eigen::VectorXd w = -(y.array() * wrong()).matrix();
        return design.transpose() * w / static_cast<double>(y.size());
    }
};

void check_dims(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (design.rows() != y.size()) throw std::invalid_argument("design rows do not match target length");
}

// Solves a symmetric positive (semi)definite system. When the Cholesky
// factor is missing or numerically singular, adds growing multiples of
// 1e-8 * trace / n to the diagonal; `regularized` reports whether that
// happened.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs, bool& regularized) {
    const Eigen::Index n = a.rows();
    const double scale = std::max(a.trace() / static_cast<double>(n), std::numeric_limits<double>::min());
    double shift = 0.0;
    regularized = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::MatrixXd m = a;
        if (shift > 0.0) m.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            const auto d = llt.matrixLLT().diagonal();
            const double dmin = d.minCoeff();
            const double dmax = d.maxCoeff();
            if (dmin > 0.0 && dmin * dmin > 1e-13 * dmax * dmax) {
                Eigen::MatrixXd x = llt.solve(rhs);
                if (x.allFinite()) return x;
            }
        }
        regularized = true;
        shift = shift == 0.0 ? 1e-8 * scale : shift * 10.0;
    }
    // last resort: pseudo-solve through a robust LDLT of the shifted matrix
    Eigen::MatrixXd m = a;
    m.diagonal().array() += shift;
    return m.ldlt().solve(rhs);
}

// X^T diag(r) X for non-negative r, filling only one triangle.
Eigen::MatrixXd weighted_gram(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::VectorXd& r) {
    const Eigen::VectorXd root = r.cwiseSqrt();
    const Eigen::MatrixXd scaled = root.asDiagonal() * design;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(design.cols(), design.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

void FitConfig::validate() const {
    if (max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
    if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be >= 0");
    if (!(separation_ridge >= 0.0)) throw std::invalid_argument("separation ridge must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

double logistic_loss(const Eigen::Ref<const Eigen::VectorXd>& theta, const Eigen::Ref<const Eigen::MatrixXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
    check_dims(design, y);
    return Margins(design, theta, y).loss();
}

Eigen::VectorXd logistic_gradient(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                  const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) {
    check_dims(design, y);
    return Margins(design, theta, y).gradient(design, y);
}

Eigen::VectorXd irls_weights(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y) {
    const Eigen::ArrayXd e = (-(y.array() * yhat.array()).abs()).exp();
    return (e / (1.0 + e).square()).matrix();
}

Eigen::MatrixXd logistic_hessian(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                 const Eigen::Ref<const Eigen::MatrixXd>& design,
                                 const Eigen::Ref<const Eigen::VectorXd>& y) {
    check_dims(design, y);
    return weighted_gram(design, Margins(design, theta, y).weights().matrix()) / static_cast<double>(y.size());
}

namespace {

// fitted probability within 10 eps of 0 or 1
const double kSeparationMargin = std::log(1.0 / (10.0 * std::numeric_limits<double>::epsilon()));

FittedModel newton(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const FitConfig& cfg, double ridge, const Eigen::VectorXd& init, bool stop_on_separation) {
    const Eigen::Index tau = design.cols();
    const double n = static_cast<double>(y.size());
    FittedModel m;
    m.ridge = ridge;
    m.theta = init.size() == tau ? init : Eigen::VectorXd::Zero(tau);

    auto objective = [&](const Margins& at, const Eigen::VectorXd& theta) {
        return at.loss() + 0.5 * ridge * theta.squaredNorm();
    };
    auto gradient = [&](const Margins& at, const Eigen::VectorXd& theta) {
        Eigen::VectorXd g = at.gradient(design, y);
        if (ridge > 0.0) g += ridge * theta;
        return g;
    };

    Margins cur(design, m.theta, y);
    double f = objective(cur, m.theta);
    for (int it = 0; it < cfg.max_newton_iters; ++it) {
        const Eigen::VectorXd g = gradient(cur, m.theta);
        if (g.norm() <= cfg.grad_tol) {
            m.converged = true;
            break;
        }
        Eigen::MatrixXd h = weighted_gram(design, cur.weights().matrix()) / n;
        if (ridge > 0.0) h.diagonal().array() += ridge;
        bool regularized = false;
        const Eigen::VectorXd step = spd_solve(h, -g, regularized);
        m.ridge_fallback = m.ridge_fallback || regularized;
        ++m.newton_iters;

        // backtracking by halving until the objective does not increase
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving) {
            const Eigen::VectorXd cand = m.theta + t * step;
            Margins at(design, cand, y);
            const double fc = objective(at, cand);
            if (std::isfinite(fc) && fc <= f) {
                const bool stalled = fc == f;
                m.theta = cand;
                cur = std::move(at);
                f = fc;
                accepted = !stalled;
                break;
            }
            t *= 0.5;
        }
        if (stop_on_separation && cur.m.size() > 0 && cur.m.maxCoeff() > kSeparationMargin) {
            // diverging toward infinity; the caller refits with a penalty
            m.separated = true;
            return m;
        }
        if (!accepted) {
            // no descent left at machine precision
            m.converged = gradient(cur, m.theta).norm() <= std::sqrt(cfg.grad_tol);
            break;
        }
    }
    if (!m.converged) m.converged = gradient(cur, m.theta).norm() <= cfg.grad_tol;
    m.loss = cur.loss();
    m.J = cur.m.size() == 0 ? 0.0 : static_cast<double>((cur.m > 0.0).count()) / n;
    return m;
}

}  // namespace

bool separated(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y) {
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        if (y(k) * yhat(k) > kSeparationMargin) return true;
    }
    return false;
}

FittedModel fit(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& y,
                const FitConfig& cfg, const Eigen::VectorXd& init) {
    check_dims(design, y);
    if (design.cols() == 0) {
        FittedModel m;
        m.loss = logistic_loss(Eigen::VectorXd(), design, y);
        m.converged = true;
        return m;
    }
    const bool watch = cfg.ridge == 0.0 && cfg.separation_ridge > 0.0;
    FittedModel m = newton(design, y, cfg, cfg.ridge, init, watch);
    if (watch && (m.separated || separated(design * m.theta, y))) {
        // the maximum-likelihood estimate does not exist; keep it finite
        const bool fallback = m.ridge_fallback;
        m = newton(design, y, cfg, cfg.separation_ridge, init, false);
        m.ridge_fallback = m.ridge_fallback || fallback;
        m.separated = true;
    }
    return m;
}

Eigen::VectorXd coefficient_variances(FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                      const Eigen::Ref<const Eigen::VectorXd>& y, ResidualVariance mode) {
    check_dims(design, y);
    const Eigen::Index tau = design.cols();
    if (tau == 0) return {};
    const Eigen::VectorXd yhat = design * model.theta;
    const Eigen::VectorXd r = irls_weights(yhat, y);

    // Working residual of the final IRLS step: e_k = y_k p_k / R_kk = y_k / (1 - p_k).
    // Weighted, R_kk e_k^2 reduces to exp(-y_k yhat_k).
    double ss = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const double m = y(k) * yhat(k);
        if (mode == ResidualVariance::weighted) {
            ss += std::exp(std::min(-m, 700.0));
        } else {
            const double e = 1.0 + std::exp(std::min(-m, 350.0));
            ss += e * e;
        }
    }
    const double dof = std::max<double>(static_cast<double>(y.size() - tau), 1.0);
    const double s2e = ss / dof;

    Eigen::MatrixXd g = weighted_gram(design, r);
    // Hessian of the objective actually minimized; the loss is a mean, so
    // the ridge scales with N on this unnormalized G.
    if (model.ridge > 0.0) g.diagonal().array() += model.ridge * static_cast<double>(y.size());
    bool regularized = false;
    const Eigen::MatrixXd ginv = spd_solve(g, Eigen::MatrixXd::Identity(tau, tau), regularized);
    model.ridge_fallback = model.ridge_fallback || regularized;
    Eigen::VectorXd sigma(tau);
    for (Eigen::Index j = 0; j < tau; ++j) sigma(j) = std::sqrt(std::max(s2e * ginv(j, j), 0.0));
    model.sigma = sigma;
    return sigma;
}

double t_critical(double alpha, double dof) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    const boost::math::students_t_distribution<double> dist(std::max(dof, 1.0));
    return boost::math::quantile(dist, 0.5 + alpha / 2.0);
}

double performance_J(const Eigen::Ref<const Eigen::VectorXd>& yhat, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (yhat.size() != y.size()) throw std::invalid_argument("performance_J: length mismatch");
    if (y.size() == 0) return 0.0;
    Eigen::Index correct = 0;
    for (Eigen::Index k = 0; k < y.size(); ++k) correct += (y(k) * yhat(k) > 0.0) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

double performance_J(const FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (model.empty()) return empty_model_J(y);
    return performance_J(design * model.theta, y);
}

double empty_model_J(const Eigen::Ref<const Eigen::VectorXd>& y) {
    return performance_J(Eigen::VectorXd::Constant(y.size(), -1.0), y);
}

namespace {

FittedModel empty_model(const Eigen::Ref<const Eigen::VectorXd>& y) {
    FittedModel m;
    m.loss = std::log(2.0);
    m.J = empty_model_J(y);
    m.converged = true;
    return m;
}

Eigen::MatrixXd take_columns(const Eigen::Ref<const Eigen::MatrixXd>& design, const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(design.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = design.col(cols[c]);
    return out;
}

}  // namespace

FittedModel t_test_prune(const FittedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& design,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const FitConfig& cfg) {
    check_dims(design, y);
    if (static_cast<std::size_t>(design.cols()) != model.size()) {
        throw std::invalid_argument("t_test_prune: design width does not match model size");
    }
    FittedModel current = model;
    Eigen::MatrixXd current_design = design;
    if (current.empty()) return empty_model(y);
    if (current.sigma.size() != current.theta.size()) coefficient_variances(current, current_design, y, cfg.residual_variance);

    for (;;) {
        const double tau = static_cast<double>(current.size());
        const double tcrit = t_critical(cfg.alpha, static_cast<double>(y.size()) - tau);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < current.theta.size(); ++j) {
            const double half_width = current.sigma(j) * tcrit;
            if (std::isfinite(half_width) && std::abs(current.theta(j)) > half_width) keep.push_back(j);
        }
        if (keep.empty()) return empty_model(y);
        if (keep.size() == current.size()) break;

        std::vector<std::size_t> selected;
        Eigen::VectorXd warm(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            selected.push_back(current.selected[static_cast<std::size_t>(keep[c])]);
            warm(static_cast<Eigen::Index>(c)) = current.theta(keep[c]);
        }
        current_design = take_columns(current_design, keep);
        // the surviving coefficients are a good start; the loss is convex so the optimum is the same
        current = fit(current_design, y, cfg, warm);
        current.selected = std::move(selected);
        coefficient_variances(current, current_design, y, cfg.residual_variance);
        if (!cfg.iterate_pruning) break;
    }
    current.J = performance_J(current_design * current.theta, y);
    return current;
}

FittedModel estimate_structure(std::vector<std::size_t> selected, const Eigen::Ref<const Eigen::MatrixXd>& design,
                               const Eigen::Ref<const Eigen::VectorXd>& y, const FitConfig& cfg,
                               std::size_t* size_before_pruning) {
    if (size_before_pruning) *size_before_pruning = selected.size();
    if (selected.empty()) return empty_model(y);
    FittedModel m = fit(design, y, cfg);
    m.selected = std::move(selected);
    coefficient_variances(m, design, y, cfg.residual_variance);
    return t_test_prune(m, design, y, cfg);
}

}  // namespace rfsc
