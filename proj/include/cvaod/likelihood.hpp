#pragma once

#include "cvaod/model.hpp"

#include <optional>
#include <string>

namespace cvaod {

enum class ObjectiveKind { qmle, pem };

const char* to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

struct ObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::qmle;
    /// Eigenvalue modulus at which the barrier becomes infinite.
    double barrier_radius = 0.99;
    /// Barrier weight w. Unset means 1e-4 T for a sample of length T.
    std::optional<double> barrier_weight;
    int max_iters = 200;
    double gradient_tol = 1e-3;

    void validate() const;
    double weight_for(Index t) const;
};

/// theta = (vec_row(A), vec_row(B), vec_row(C)), length n^2 + 2ns.
struct ParamVector {
    Vector theta;
    Index n = 0;
    Index s = 0;

    static ParamVector encode(const System& system);
    System decode() const;
};

struct PredictionErrors {
    Matrix residuals;  // T x s
    bool diverged = false;
};

/// Inverse filter from x_1 = 0: e_t = y_t - C x_t, x_{t+1} = A x_t + B e_t.
/// Sets diverged (and stops) once the state norm exceeds 1e12.
PredictionErrors prediction_errors(const System& system, const Matrix& data);

/// (1/T) sum e_t e_t'.
Matrix residual_covariance(const Matrix& residuals);

/**
 * Exact Gaussian log-likelihood (without the -Ts/2 log 2pi constant) from the
 * time-varying Kalman filter for the innovation form, started at the
 * stationary state variance. Process noise B e_t and measurement noise e_t
 * share the cross-covariance B Omega.
 */
double gaussian_kalman_loglik(const StateSpaceModel& model, const Matrix& data);

/// +inf outside the region rho(A) < r (and, for qMLE, rho(A - BC) < r);
/// otherwise -w [log(r - rho(A)) + log(r - rho(A - BC))], the second term
/// only for qMLE.
double barrier_penalty(const System& system, const ObjectiveConfig& config, double weight);
double barrier_penalty(const System& system, const ObjectiveConfig& config);

/**
 * Objective minimized by optimize(), +inf where undefined.
 *
 * qMLE: -loglik(A, B, C, Omega(theta)) + barrier, where Omega(theta) is the
 * sample covariance of the inverse-filter residuals.
 * PEM:  (T/2) log det((1/T) sum e_t e_t') + barrier.
 */
double objective_value(const System& system, const Matrix& data, const ObjectiveConfig& config);

struct OptimizeResult {
    System system;
    Matrix omega;
    int iterations = 0;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    bool converged = false;
    /// Factor applied to (A, B) to move the initializer inside the barrier.
    double shrink_factor = 1.0;
    std::string message;

    /// Throws DomainError if the result is not a valid stable model.
    StateSpaceModel model() const { return StateSpaceModel(system, omega); }
};

/// Largest kappa in (0, 1] with rho(kappa A) and (qMLE) rho(kappa (A - BC))
/// at most r - 0.005.
double feasible_shrink_factor(const System& system, const ObjectiveConfig& config);

/// BFGS with backtracking line search and central finite-difference
/// gradients, started at the (shrunk) initializer.
OptimizeResult optimize(const Matrix& data, const System& init, const ObjectiveConfig& config);

}  // namespace cvaod
