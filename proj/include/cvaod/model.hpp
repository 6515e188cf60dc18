#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace cvaod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Spectral radius below which a transition matrix counts as stable.
inline constexpr double kStabilityMargin = 1e-9;

/// Tolerance of the minimum-phase checks on A - BC.
inline constexpr double kMinimumPhaseTol = 1e-9;

/// Largest state dimension accepted by the Kronecker Lyapunov solver. The
/// solve is O(n^6) in time and O(n^4) in memory.
inline constexpr Index kLyapunovMaxDim = 50;

/**
 * An unconstrained (A, B, C) triple of the innovation form
 *
 *     y_t = C x_t + e_t,    x_{t+1} = A x_t + B e_t.
 *
 * Only the shapes are checked. Optimizer iterates and raw estimates live here;
 * StateSpaceModel adds the stability and covariance invariants.
 */
struct System {
    Matrix a;  // n x n
    Matrix b;  // n x s
    Matrix c;  // s x n

    System() = default;
    System(Matrix a_, Matrix b_, Matrix c_);

    Index n() const { return a.rows(); }
    Index s() const { return c.rows(); }

    /// A - BC, the transition matrix of the inverse (whitening) filter.
    Matrix closed_loop() const { return a - b * c; }
};

/**
 * A stable innovation-form state-space model with innovation variance omega.
 * Construction throws DomainError unless the shapes agree, the spectral
 * radius of A is below 1 - kStabilityMargin and omega is symmetric positive
 * definite. State dimension zero (a static gain of I) is allowed.
 */
class StateSpaceModel {
public:
    StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix omega);
    StateSpaceModel(System system, Matrix omega);

    const Matrix& a() const { return system_.a; }
    const Matrix& b() const { return system_.b; }
    const Matrix& c() const { return system_.c; }
    const Matrix& omega() const { return omega_; }
    const System& system() const { return system_; }

    Index n() const { return system_.n(); }
    Index s() const { return system_.s(); }

    Matrix closed_loop() const { return system_.closed_loop(); }

private:
    System system_;
    Matrix omega_;
};

/// gammas[j] = E y_t y_{t-j}' for j = 0..max_lag.
class CovarianceSequence {
public:
    explicit CovarianceSequence(std::vector<Matrix> gammas);

    Index max_lag() const { return static_cast<Index>(gammas_.size()) - 1; }
    Index s() const { return gammas_.front().rows(); }

    /// gamma_j for j >= 0, gamma_{-j}' for j < 0.
    Matrix at(Index lag) const;
    const Matrix& operator[](Index lag) const { return gammas_[static_cast<std::size_t>(lag)]; }
    const std::vector<Matrix>& gammas() const { return gammas_; }

private:
    std::vector<Matrix> gammas_;
};

/**
 * Over-differencing of a strictly minimum-phase base model along the c
 * orthonormal columns of m_c:
 *
 *     y = M diag(Delta I_c, I_{s-c}) M' k_base(L) e.
 */
class OverdiffSpec {
public:
    OverdiffSpec(StateSpaceModel base, Matrix m_c);

    const StateSpaceModel& base() const { return base_; }
    const Matrix& m_c() const { return m_c_; }
    Index c() const { return m_c_.cols(); }

private:
    StateSpaceModel base_;
    Matrix m_c_;
};

/// Largest eigenvalue modulus. Zero for an empty matrix.
double spectral_radius(const Matrix& m);

/// Strict: rho(A - BC) < 1 - tol. Non-strict: rho(A - BC) <= 1 + tol.
bool is_minimum_phase(const System& system, bool strict);
bool is_minimum_phase(const StateSpaceModel& model, bool strict);

/// Solves P = a P a' + q through the vectorized system (I - a (x) a) vec P = vec q.
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q);

/// Stationary state variance P = A P A' + B Omega B'.
Matrix state_covariance(const StateSpaceModel& model);

/// gamma_0 = C P C' + Omega, gamma_j = C A^{j-1} (A P C' + B Omega).
CovarianceSequence covariance_sequence(const StateSpaceModel& model, Index max_lag);

/// Block realization of the over-differenced transfer function:
/// A = [[A~, 0], [M_c' C~, 0]], B = [B~; M_c'], C = [C~, -M_c].
StateSpaceModel overdifference_model(const OverdiffSpec& spec);

/// K_j = C A^{j-1} B for j >= 1.
Matrix impulse_response(const System& system, Index j);
Matrix impulse_response(const StateSpaceModel& model, Index j);

/// K_1, ..., K_horizon computed by one forward recursion.
std::vector<Matrix> impulse_responses(const System& system, Index horizon);

/// f(w) = k(e^{iw}) Omega k(e^{iw})^* / (2 pi) with k(z) = I + z C (I - z A)^{-1} B.
Eigen::MatrixXcd spectral_density(const StateSpaceModel& model, double frequency);

/// The bivariate AR(1) base system of the simulation study:
/// A = C = diag(0.7, 0.2), B = I, Omega = I.
StateSpaceModel simulation_base_model();

/// Minimal realization of the first difference of simulation_base_model():
/// A = diag(0.7, 0.2), B = I, C = diag(-0.3, -0.8), Omega = I.
StateSpaceModel simulation_differenced_model();

/// y_t = e_t - e_{t-1} in R^s with innovation variance omega:
/// (A, B, C) = (0, -I, I).
StateSpaceModel differenced_white_noise_model(const Matrix& omega);

}  // namespace cvaod
