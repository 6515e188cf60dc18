#include "cvaod/oracle.hpp"

#include "cvaod/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace cvaod {

namespace {

/// rhs * m^{-1} for symmetric positive definite m, refusing ill-conditioned m.
Matrix solve_right_spd(const Matrix& m, const Matrix& rhs, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolve failed for " + what);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kOracleMaxCondition)
        throw NumericalError(what + " is numerically singular (condition " + std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed for " + what);
    return llt.solve(rhs.transpose()).transpose();
}

/// E Y_{t+1}^- (Y_t^-)': block (i, j) = E y_{t+1-i} y_{t-j}' = gamma_{j-i+1}.
Matrix shifted_gamma(const CovarianceSequence& cov, Index p) {
    const Index s = cov.s();
    Matrix out(p * s, p * s);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) out.block(i * s, j * s, s, s) = cov.at(j - i + 1);
    return out;
}

/// [E x_t y_{t-1}', ..., E x_t y_{t-p}'] with E x_t y_{t-j}' = A^{j-1}(A P C' + B Omega).
Matrix state_past_cross(const StateSpaceModel& model, const Matrix& p_state, Index p) {
    const Index n = model.n();
    const Index s = model.s();
    Matrix out(n, p * s);
    Matrix cross = model.a() * p_state * model.c().transpose() + model.b() * model.omega();
    for (Index j = 0; j < p; ++j) {
        out.middleCols(j * s, s) = cross;
        cross = model.a() * cross;
    }
    return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

BlockToeplitz build_gamma_p(const CovarianceSequence& cov, Index p) {
    if (p < 1) throw DomainError("p must be at least 1");
    if (cov.max_lag() < p - 1)
        throw DomainError("Gamma_p with p = " + std::to_string(p) + " needs autocovariances up to lag " +
                          std::to_string(p - 1) + ", have " + std::to_string(cov.max_lag()));
    const Index s = cov.s();
    BlockToeplitz g{p, s, Matrix(p * s, p * s)};
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) g.matrix.block(i * s, j * s, s, s) = cov.at(j - i);
    g.matrix = symmetrized(g.matrix);
    return g;
}

double lambda_min_gamma(const CovarianceSequence& cov, Index p) {
    const BlockToeplitz g = build_gamma_p(cov, p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g.matrix, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolve failed for Gamma_p, p = " + std::to_string(p));
    return eig.eigenvalues().minCoeff();
}

Matrix population_kp(const StateSpaceModel& model, Index p) {
    if (p < 1) throw DomainError("p must be at least 1");
    const CovarianceSequence cov = covariance_sequence(model, p);
    const Matrix cross = state_past_cross(model, state_covariance(model), p);
    if (model.n() == 0 || cross.isZero(0.0)) return Matrix::Zero(model.n(), p * model.s());
    return solve_right_spd(build_gamma_p(cov, p).matrix, cross, "Gamma_p at p = " + std::to_string(p));
}

PopulationLimit population_limits(const StateSpaceModel& model, Index p) {
    if (p < 1) throw DomainError("p must be at least 1");
    const Index n = model.n();
    const Index s = model.s();
    const CovarianceSequence cov = covariance_sequence(model, p);
    const Matrix p_state = state_covariance(model);
    const Matrix gamma_p = build_gamma_p(cov, p).matrix;

    PopulationLimit lim;
    lim.p = p;
    const Matrix cross = state_past_cross(model, p_state, p);
    lim.k_p = (n == 0 || cross.isZero(0.0))
                  ? Matrix(Matrix::Zero(n, p * s))
                  : solve_right_spd(gamma_p, cross, "Gamma_p at p = " + std::to_string(p));

    lim.sigma_x = symmetrized(lim.k_p * gamma_p * lim.k_p.transpose());
    lim.delta_var = symmetrized(p_state - lim.sigma_x);
    lim.x_next_x = lim.k_p * shifted_gamma(cov, p) * lim.k_p.transpose();

    // E y_t (Y_t^-)' = [gamma_1, ..., gamma_p];  E Y_{t+1}^- y_t' stacks gamma_0', gamma_1', ...
    Matrix y_past(s, p * s);
    Matrix next_past_y(p * s, s);
    for (Index j = 0; j < p; ++j) {
        y_past.middleCols(j * s, s) = cov[j + 1];
        next_past_y.middleRows(j * s, s) = cov[j].transpose();
    }
    const Matrix y_x = y_past * lim.k_p.transpose();
    const Matrix x_next_y = lim.k_p * next_past_y;

    // Zero state: the regressions on x_t(p) are empty.
    if (n == 0 || model.b().isZero(0.0)) {
        lim.c_p = Matrix::Zero(s, n);
        lim.a_p = Matrix::Zero(n, n);
        lim.b_p = Matrix::Zero(n, s);
        lim.sigma_eps = cov[0];
        lim.x_next_eps = Matrix::Zero(n, s);
        lim.eps_x = Matrix::Zero(s, n);
        return lim;
    }

    const std::string tag = " at p = " + std::to_string(p);
    lim.c_p = solve_right_spd(lim.sigma_x, y_x, "Sigma_x" + tag);
    lim.sigma_eps = symmetrized(cov[0] - lim.c_p * lim.sigma_x * lim.c_p.transpose());
    lim.eps_x = y_x - lim.c_p * lim.sigma_x;
    lim.a_p = solve_right_spd(lim.sigma_x, lim.x_next_x, "Sigma_x" + tag);
    lim.x_next_eps = x_next_y - lim.x_next_x * lim.c_p.transpose();
    lim.b_p = solve_right_spd(lim.sigma_eps, lim.x_next_eps, "Sigma_eps" + tag);
    return lim;
}

std::vector<BiasRow> bias_curve(const StateSpaceModel& model, std::vector<Index> p_list) {
    std::sort(p_list.begin(), p_list.end());
    std::vector<BiasRow> rows;
    rows.reserve(p_list.size());
    for (Index p : p_list) {
        if (p < model.n())
            throw DomainError("bias_curve needs p >= n; got p = " + std::to_string(p));
        const PopulationLimit lim = population_limits(model, p);
        rows.push_back({p, (lim.a_p - model.a()).norm(), (lim.b_p - model.b()).norm(), (lim.c_p - model.c()).norm()});
    }
    return rows;
}

std::vector<LambdaMinRow> lambda_min_study(const StateSpaceModel& model, Index p_max) {
    if (p_max < 1) throw DomainError("p_max must be at least 1");
    const CovarianceSequence cov = covariance_sequence(model, p_max);
    std::vector<LambdaMinRow> rows;
    rows.reserve(static_cast<std::size_t>(p_max));
    for (Index p = 1; p <= p_max; ++p) rows.push_back({p, lambda_min_gamma(cov, p)});
    return rows;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    out.precision(17);
    return out;
}

}  // namespace

void write_bias_csv(const std::filesystem::path& path, const std::vector<BiasRow>& rows) {
    auto out = open_csv(path);
    out << "p,biasA,biasB,biasC,p2_biasA,p_biasB,p_biasC\n";
    for (const auto& r : rows)
        out << r.p << ',' << r.bias_a << ',' << r.bias_b << ',' << r.bias_c << ',' << r.p2_bias_a() << ','
            << r.p_bias_b() << ',' << r.p_bias_c() << '\n';
}

void write_lambda_min_csv(const std::filesystem::path& path, const std::vector<LambdaMinRow>& rows) {
    auto out = open_csv(path);
    out << "p,lambda_min,p2_lambda_min\n";
    for (const auto& r : rows) out << r.p << ',' << r.lambda_min << ',' << r.scaled() << '\n';
}

}  // namespace cvaod
