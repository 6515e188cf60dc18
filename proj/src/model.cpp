#include "cvaod/model.hpp"

#include "cvaod/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace cvaod {

namespace {

void require_shapes(const Matrix& a, const Matrix& b, const Matrix& c) {
    const Index n = a.rows();
    const Index s = c.rows();
    if (a.cols() != n)
        throw DomainError("A must be square, got " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()));
    if (b.rows() != n || b.cols() != s)
        throw DomainError("B must be " + std::to_string(n) + "x" + std::to_string(s) + ", got " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    if (c.cols() != n)
        throw DomainError("C must have " + std::to_string(n) + " columns, got " +
                          std::to_string(c.cols()));
}

bool is_symmetric(const Matrix& m, double tol) {
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

}  // namespace

System::System(Matrix a_, Matrix b_, Matrix c_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {
    require_shapes(a, b, c);
}

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix omega)
    : StateSpaceModel(System(std::move(a), std::move(b), std::move(c)), std::move(omega)) {}

StateSpaceModel::StateSpaceModel(System system, Matrix omega) : system_(std::move(system)), omega_(std::move(omega)) {
    require_shapes(system_.a, system_.b, system_.c);
    const Index s = system_.s();
    if (s < 1) throw DomainError("output dimension must be at least 1");
    if (omega_.rows() != s || omega_.cols() != s)
        throw DomainError("omega must be " + std::to_string(s) + "x" + std::to_string(s));
    if (!is_symmetric(omega_, 1e-12)) throw DomainError("omega must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega_, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
        throw DomainError("omega must be positive definite");
    const double rho = spectral_radius(system_.a);
    if (!(rho < 1.0 - kStabilityMargin))
        throw DomainError("A is not stable: spectral radius " + std::to_string(rho));
}

CovarianceSequence::CovarianceSequence(std::vector<Matrix> gammas) : gammas_(std::move(gammas)) {
    if (gammas_.empty()) throw DomainError("covariance sequence needs at least gamma_0");
    const Index s = gammas_.front().rows();
    for (const auto& g : gammas_)
        if (g.rows() != s || g.cols() != s) throw DomainError("all autocovariances must be s x s");
    const Matrix& g0 = gammas_.front();
    if (!is_symmetric(g0, 1e-10)) throw DomainError("gamma_0 must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g0, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + g0.cwiseAbs().maxCoeff()))
        throw DomainError("gamma_0 must be positive semidefinite");
}

Matrix CovarianceSequence::at(Index lag) const {
    const Index k = lag < 0 ? -lag : lag;
    if (k > max_lag())
        throw DomainError("lag " + std::to_string(k) + " exceeds max_lag " + std::to_string(max_lag()));
    return lag < 0 ? Matrix(gammas_[static_cast<std::size_t>(k)].transpose())
                   : gammas_[static_cast<std::size_t>(k)];
}

OverdiffSpec::OverdiffSpec(StateSpaceModel base, Matrix m_c) : base_(std::move(base)), m_c_(std::move(m_c)) {
    const Index s = base_.s();
    if (m_c_.rows() != s) throw DomainError("M_c must have s rows");
    if (m_c_.cols() < 1 || m_c_.cols() > s) throw DomainError("number of differenced directions must be in [1, s]");
    const Matrix gram = m_c_.transpose() * m_c_;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("M_c must have orthonormal columns");
    if (!is_minimum_phase(base_, true)) throw DomainError("base model must be strictly minimum-phase");
}

double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw DomainError("spectral_radius needs a square matrix");
    switch (m.rows()) {
        case 0:
            return 0.0;
        case 1:
            return std::abs(m(0, 0));
        case 2: {
            const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
            const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
            const double disc = half_trace * half_trace - det;
            if (disc < 0.0) return std::sqrt(det);
            const double root = std::sqrt(disc);
            return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
        }
        default:
            break;
    }
    Eigen::EigenSolver<Matrix> eig(m, false);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigenvalue iteration failed for " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + " matrix");
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_minimum_phase(const System& system, bool strict) {
    const double rho = spectral_radius(system.closed_loop());
    return strict ? rho < 1.0 - kMinimumPhaseTol : rho <= 1.0 + kMinimumPhaseTol;
}

bool is_minimum_phase(const StateSpaceModel& model, bool strict) { return is_minimum_phase(model.system(), strict); }

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q) {
    const Index n = a.rows();
    if (a.cols() != n || q.rows() != n || q.cols() != n) throw DomainError("Lyapunov solve needs square a and q of equal size");
    if (n == 0) return Matrix(0, 0);
    if (n > kLyapunovMaxDim)
        throw DomainError("Lyapunov solver is capped at n = " + std::to_string(kLyapunovMaxDim));
    if (!(spectral_radius(a) < 1.0 - kStabilityMargin)) throw DomainError("Lyapunov solve needs a stable matrix");

    // vec(a P a') = (a (x) a) vec(P) with column-major vec.
    const Index nn = n * n;
    Matrix lhs = Matrix::Identity(nn, nn);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) lhs.block(i * n, j * n, n, n) -= a(i, j) * a;
    const Vector rhs = Eigen::Map<const Vector>(q.data(), nn);
    const Vector sol = lhs.partialPivLu().solve(rhs);
    Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
    return 0.5 * (p + p.transpose());
}

Matrix state_covariance(const StateSpaceModel& model) {
    return solve_discrete_lyapunov(model.a(), model.b() * model.omega() * model.b().transpose());
}

CovarianceSequence covariance_sequence(const StateSpaceModel& model, Index max_lag) {
    if (max_lag < 0) throw DomainError("max_lag must be nonnegative");
    const Matrix p = state_covariance(model);
    const Matrix& a = model.a();
    const Matrix& c = model.c();
    std::vector<Matrix> gammas;
    gammas.reserve(static_cast<std::size_t>(max_lag + 1));
    Matrix g0 = c * p * c.transpose() + model.omega();
    gammas.push_back(0.5 * (g0 + g0.transpose()));
    // E x_{t+j} y_t' = A^{j-1} (A P C' + B Omega)
    Matrix cross = a * p * c.transpose() + model.b() * model.omega();
    for (Index j = 1; j <= max_lag; ++j) {
        gammas.push_back(c * cross);
        cross = a * cross;
    }
    return CovarianceSequence(std::move(gammas));
}

StateSpaceModel overdifference_model(const OverdiffSpec& spec) {
    const auto& base = spec.base();
    const Matrix& mc = spec.m_c();
    const Index nb = base.n();
    const Index s = base.s();
    const Index c = spec.c();
    const Index n = nb + c;

    Matrix a = Matrix::Zero(n, n);
    a.topLeftCorner(nb, nb) = base.a();
    a.bottomLeftCorner(c, nb) = mc.transpose() * base.c();
    Matrix b(n, s);
    b.topRows(nb) = base.b();
    b.bottomRows(c) = mc.transpose();
    Matrix cm(s, n);
    cm.leftCols(nb) = base.c();
    cm.rightCols(c) = -mc;
    return StateSpaceModel(std::move(a), std::move(b), std::move(cm), base.omega());
}

Matrix impulse_response(const System& system, Index j) {
    if (j < 1) throw DomainError("impulse_response needs j >= 1");
    Matrix right = system.b;
    for (Index k = 1; k < j; ++k) right = system.a * right;
    return system.c * right;
}

Matrix impulse_response(const StateSpaceModel& model, Index j) { return impulse_response(model.system(), j); }

std::vector<Matrix> impulse_responses(const System& system, Index horizon) {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(std::max<Index>(horizon, 0)));
    Matrix right = system.b;
    for (Index j = 1; j <= horizon; ++j) {
        out.push_back(system.c * right);
        right = system.a * right;
    }
    return out;
}

Eigen::MatrixXcd spectral_density(const StateSpaceModel& model, double frequency) {
    using Complex = std::complex<double>;
    const Index n = model.n();
    const Index s = model.s();
    const Complex z = std::polar(1.0, frequency);
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Identity(s, s);
    if (n > 0) {
        const Eigen::MatrixXcd resolvent = Eigen::MatrixXcd::Identity(n, n) - z * model.a().cast<Complex>();
        k += z * model.c().cast<Complex>() * resolvent.partialPivLu().solve(model.b().cast<Complex>());
    }
    Eigen::MatrixXcd f = k * model.omega().cast<Complex>() * k.adjoint() / (2.0 * std::numbers::pi);
    return 0.5 * (f + f.adjoint());
}

StateSpaceModel simulation_base_model() {
    const Matrix d = Eigen::Vector2d(0.7, 0.2).asDiagonal();
    return StateSpaceModel(d, Matrix::Identity(2, 2), d, Matrix::Identity(2, 2));
}

StateSpaceModel simulation_differenced_model() {
    const Matrix a = Eigen::Vector2d(0.7, 0.2).asDiagonal();
    const Matrix c = Eigen::Vector2d(-0.3, -0.8).asDiagonal();
    return StateSpaceModel(a, Matrix::Identity(2, 2), c, Matrix::Identity(2, 2));
}

StateSpaceModel differenced_white_noise_model(const Matrix& omega) {
    const Index s = omega.rows();
    return StateSpaceModel(Matrix::Zero(s, s), -Matrix::Identity(s, s), Matrix::Identity(s, s), omega);
}

}  // namespace cvaod
