#pragma once

#include "cvaod/model.hpp"

#include <filesystem>
#include <vector>

namespace cvaod {

/// Condition number above which Gamma_p and Sigma_x solves refuse to proceed.
inline constexpr double kOracleMaxCondition = 1e14;

/**
 * Gamma_p = E Y_t^- (Y_t^-)' for Y_t^- = (y_{t-1}', ..., y_{t-p}')'.
 * Block (i, j) is gamma_{j-i} for j >= i and gamma_{i-j}' otherwise.
 */
struct BlockToeplitz {
    Index p = 0;
    Index s = 0;
    Matrix matrix;

    Index dim() const { return p * s; }
    auto block(Index i, Index j) const { return matrix.block(i * s, j * s, s, s); }
};

BlockToeplitz build_gamma_p(const CovarianceSequence& cov, Index p);

double lambda_min_gamma(const CovarianceSequence& cov, Index p);

/// K_p = E x_t (Y_t^-)' Gamma_p^{-1}, in the model's own state basis.
Matrix population_kp(const StateSpaceModel& model, Index p);

/// The finite-p pseudo-true system and the moments it is built from, all
/// computed exactly from the model's second moments.
struct PopulationLimit {
    Index p = 0;
    Matrix a_p, b_p, c_p;
    Matrix k_p;          // n x ps
    Matrix sigma_x;      // E x_t(p) x_t(p)'
    Matrix sigma_eps;    // E e_t(p) e_t(p)'
    Matrix delta_var;    // E dx_t(p) dx_t(p)' = P - sigma_x
    Matrix x_next_x;     // E x_{t+1}(p) x_t(p)'
    Matrix x_next_eps;   // E x_{t+1}(p) e_t(p)'
    Matrix eps_x;        // E e_t(p) x_t(p)', zero up to rounding

    System system() const { return System(a_p, b_p, c_p); }
};

PopulationLimit population_limits(const StateSpaceModel& model, Index p);

struct BiasRow {
    Index p = 0;
    double bias_a = 0.0;
    double bias_b = 0.0;
    double bias_c = 0.0;

    double p2_bias_a() const { return static_cast<double>(p * p) * bias_a; }
    double p_bias_b() const { return static_cast<double>(p) * bias_b; }
    double p_bias_c() const { return static_cast<double>(p) * bias_c; }
};

/// Frobenius distances of (A_p, B_p, C_p) from (A, B, C), rows in ascending p.
std::vector<BiasRow> bias_curve(const StateSpaceModel& model, std::vector<Index> p_list);

/// Columns: p, biasA, biasB, biasC, p2_biasA, p_biasB, p_biasC.
void write_bias_csv(const std::filesystem::path& path, const std::vector<BiasRow>& rows);

struct LambdaMinRow {
    Index p = 0;
    double lambda_min = 0.0;

    double scaled() const { return static_cast<double>(p * p) * lambda_min; }
};

/// lambda_min(Gamma_p) for p = 1..p_max.
std::vector<LambdaMinRow> lambda_min_study(const StateSpaceModel& model, Index p_max);

/// Columns: p, lambda_min, p2_lambda_min.
void write_lambda_min_csv(const std::filesystem::path& path, const std::vector<LambdaMinRow>& rows);

}  // namespace cvaod
