#include "cvaod/likelihood.hpp"

#include "cvaod/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace cvaod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceNorm = 1e12;
constexpr double kShrinkMargin = 0.005;

/// Runs body.template operator()<N, S>() with fixed sizes for the common
/// small systems and dynamic sizes otherwise.
template <class Body>
decltype(auto) with_dims(Index n, Index s, Body&& body) {
    if (n == 2 && s == 2) return body.template operator()<2, 2>();
    if (n == 1 && s == 1) return body.template operator()<1, 1>();
    if (n == 1 && s == 2) return body.template operator()<1, 2>();
    if (n == 3 && s == 2) return body.template operator()<3, 2>();
    if (n == 4 && s == 2) return body.template operator()<4, 2>();
    return body.template operator()<Eigen::Dynamic, Eigen::Dynamic>();
}

struct ResidualSummary {
    Matrix sum_outer;  // sum_t e_t e_t'
    bool diverged = false;
};

/// series is s x T. Writes residual t into column t of out when out != nullptr.
template <int N, int S>
ResidualSummary inverse_filter(const System& sys, const Matrix& series, Matrix* out) {
    using MatNN = Eigen::Matrix<double, N, N>;
    using MatNS = Eigen::Matrix<double, N, S>;
    using MatSN = Eigen::Matrix<double, S, N>;
    using MatSS = Eigen::Matrix<double, S, S>;
    using VecN = Eigen::Matrix<double, N, 1>;
    using VecS = Eigen::Matrix<double, S, 1>;

    const Index n = sys.n();
    const Index s = sys.s();
    const MatNN a = sys.a;
    const MatNS b = sys.b;
    const MatSN c = sys.c;
    VecN x = VecN::Zero(n);
    VecN x_next(n);
    VecS e(s);
    MatSS acc = MatSS::Zero(s, s);
    const double limit = kDivergenceNorm * kDivergenceNorm;

    ResidualSummary summary;
    const Index t_len = series.cols();
    for (Index t = 0; t < t_len; ++t) {
        e.noalias() = series.col(t) - c * x;
        acc.noalias() += e * e.transpose();
        if (out) out->col(t) = e;
        x_next.noalias() = a * x + b * e;
        x = x_next;
        if (!(x.squaredNorm() <= limit)) {
            summary.diverged = true;
            break;
        }
    }
    summary.sum_outer = acc;
    return summary;
}

template <int N, int S>
double kalman_loglik(const System& sys, const Matrix& omega, const Matrix& p0, const Matrix& series) {
    using MatNN = Eigen::Matrix<double, N, N>;
    using MatNS = Eigen::Matrix<double, N, S>;
    using MatSN = Eigen::Matrix<double, S, N>;
    using MatSS = Eigen::Matrix<double, S, S>;
    using VecN = Eigen::Matrix<double, N, 1>;
    using VecS = Eigen::Matrix<double, S, 1>;

    const Index n = sys.n();
    const Index s = sys.s();
    const MatNN a = sys.a;
    const MatNS b = sys.b;
    const MatSN c = sys.c;
    const MatSS om = omega;
    const MatNS b_om = b * om;
    const MatNN q = b_om * b.transpose();

    MatNN p = p0;
    MatNN p_next(n, n);
    VecN x = VecN::Zero(n);
    VecN x_next(n);
    VecS e(s);
    MatSS f(s, s);
    MatNS apc(n, s);
    MatNS gain(n, s);
    Eigen::LLT<MatSS> llt(s);
    double logdet = 0.0;
    bool steady = false;

    double total = 0.0;
    const Index t_len = series.cols();
    for (Index t = 0; t < t_len; ++t) {
        e.noalias() = series.col(t) - c * x;
        if (!steady) {
            f.noalias() = c * p * c.transpose();
            f += om;
            llt.compute(f);
            if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance lost positive definiteness");
            logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
            apc.noalias() = a * p * c.transpose();
            apc += b_om;
            gain = llt.solve(apc.transpose()).transpose();
            p_next.noalias() = a * p * a.transpose();
            p_next += q;
            p_next.noalias() -= gain * f * gain.transpose();
            p_next = 0.5 * (p_next + p_next.transpose()).eval();
            // Once the Riccati recursion has converged the filter is time-invariant.
            steady = (p_next - p).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + p.cwiseAbs().maxCoeff());
            p = p_next;
        }
        total += logdet + e.dot(llt.solve(e));
        x_next.noalias() = a * x + gain * e;
        x = x_next;
    }
    return -0.5 * total;
}

double log_det_spd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return -kInf;
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Objective on a transposed (s x T) series.
double objective_on_series(const System& sys, const Matrix& series, const ObjectiveConfig& config, double weight) {
    const double barrier = barrier_penalty(sys, config, weight);
    if (!std::isfinite(barrier)) return kInf;
    const Index t_len = series.cols();
    const ResidualSummary res =
        with_dims(sys.n(), sys.s(), [&]<int N, int S>() { return inverse_filter<N, S>(sys, series, nullptr); });
    if (res.diverged) return kInf;
    const Matrix omega = res.sum_outer / static_cast<double>(t_len);
    const double logdet = log_det_spd(omega);
    if (!std::isfinite(logdet)) return kInf;

    if (config.kind == ObjectiveKind::pem) return 0.5 * static_cast<double>(t_len) * logdet + barrier;

    try {
        const Matrix p0 = solve_discrete_lyapunov(sys.a, sys.b * omega * sys.b.transpose());
        const double ll = with_dims(sys.n(), sys.s(),
                                    [&]<int N, int S>() { return kalman_loglik<N, S>(sys, omega, p0, series); });
        if (!std::isfinite(ll)) return kInf;
        return -ll + barrier;
    } catch (const std::exception&) {
        return kInf;
    }
}

}  // namespace

const char* to_string(ObjectiveKind kind) { return kind == ObjectiveKind::qmle ? "qmle" : "pem"; }

ObjectiveKind objective_kind_from_string(const std::string& name) {
    if (name == "qmle") return ObjectiveKind::qmle;
    if (name == "pem") return ObjectiveKind::pem;
    throw DomainError("unknown objective '" + name + "' (expected qmle or pem)");
}

void ObjectiveConfig::validate() const {
    if (!(barrier_radius > 0.0 && barrier_radius < 1.0)) throw DomainError("barrier_radius must lie in (0, 1)");
    if (barrier_weight && !(*barrier_weight > 0.0)) throw DomainError("barrier_weight must be positive");
    if (max_iters < 0) throw DomainError("max_iters must be nonnegative");
    if (!(gradient_tol > 0.0)) throw DomainError("gradient_tol must be positive");
}

double ObjectiveConfig::weight_for(Index t) const {
    return barrier_weight ? *barrier_weight : 1e-4 * static_cast<double>(t);
}

ParamVector ParamVector::encode(const System& system) {
    const Index n = system.n();
    const Index s = system.s();
    ParamVector pv;
    pv.n = n;
    pv.s = s;
    pv.theta.resize(n * n + 2 * n * s);
    Index k = 0;
    for (const Matrix* m : {&system.a, &system.b, &system.c})
        for (Index i = 0; i < m->rows(); ++i)
            for (Index j = 0; j < m->cols(); ++j) pv.theta(k++) = (*m)(i, j);
    return pv;
}

System ParamVector::decode() const {
    if (theta.size() != n * n + 2 * n * s) throw DomainError("parameter vector has the wrong length");
    Matrix a(n, n), b(n, s), c(s, n);
    Index k = 0;
    for (Matrix* m : {&a, &b, &c})
        for (Index i = 0; i < m->rows(); ++i)
            for (Index j = 0; j < m->cols(); ++j) (*m)(i, j) = theta(k++);
    return System(std::move(a), std::move(b), std::move(c));
}

PredictionErrors prediction_errors(const System& system, const Matrix& data) {
    if (data.cols() != system.s()) throw DomainError("data width must equal the output dimension");
    const Matrix series = data.transpose();
    Matrix out = Matrix::Zero(system.s(), series.cols());
    const ResidualSummary res = with_dims(system.n(), system.s(),
                                          [&]<int N, int S>() { return inverse_filter<N, S>(system, series, &out); });
    return PredictionErrors{out.transpose(), res.diverged};
}

Matrix residual_covariance(const Matrix& residuals) {
    if (residuals.rows() == 0) throw DomainError("no residuals");
    return (residuals.transpose() * residuals) / static_cast<double>(residuals.rows());
}

double gaussian_kalman_loglik(const StateSpaceModel& model, const Matrix& data) {
    if (data.cols() != model.s()) throw DomainError("data width must equal the output dimension");
    const Matrix series = data.transpose();
    const Matrix p0 = state_covariance(model);
    return with_dims(model.n(), model.s(), [&]<int N, int S>() {
        return kalman_loglik<N, S>(model.system(), model.omega(), p0, series);
    });
}

double barrier_penalty(const System& system, const ObjectiveConfig& config, double weight) {
    const double r = config.barrier_radius;
    const double rho_a = spectral_radius(system.a);
    if (!(rho_a < r)) return kInf;
    double penalty = std::log(r - rho_a);
    if (config.kind == ObjectiveKind::qmle) {
        const double rho_bar = spectral_radius(system.closed_loop());
        if (!(rho_bar < r)) return kInf;
        penalty += std::log(r - rho_bar);
    }
    return -weight * penalty;
}

double barrier_penalty(const System& system, const ObjectiveConfig& config) {
    if (!config.barrier_weight) throw DomainError("barrier_penalty needs an explicit barrier_weight");
    return barrier_penalty(system, config, *config.barrier_weight);
}

double objective_value(const System& system, const Matrix& data, const ObjectiveConfig& config) {
    if (data.cols() != system.s()) throw DomainError("data width must equal the output dimension");
    return objective_on_series(system, data.transpose(), config, config.weight_for(data.rows()));
}

double feasible_shrink_factor(const System& system, const ObjectiveConfig& config) {
    const double target = config.barrier_radius - kShrinkMargin;
    double kappa = 1.0;
    const double rho_a = spectral_radius(system.a);
    if (rho_a > target) kappa = std::min(kappa, target / rho_a);
    if (config.kind == ObjectiveKind::qmle) {
        const double rho_bar = spectral_radius(system.closed_loop());
        if (rho_bar > target) kappa = std::min(kappa, target / rho_bar);
    }
    return kappa;
}

OptimizeResult optimize(const Matrix& data, const System& init, const ObjectiveConfig& config) {
    config.validate();
    if (data.cols() != init.s()) throw DomainError("data width must equal the output dimension");
    if (data.rows() < 2) throw DomainError("optimize needs at least two observations");

    const Matrix series = data.transpose();
    const double weight = config.weight_for(data.rows());
    const Index n = init.n();
    const Index s = init.s();
    auto objective = [&](const Vector& theta) {
        return objective_on_series(ParamVector{theta, n, s}.decode(), series, config, weight);
    };

    OptimizeResult result;
    System start = init;
    if (!std::isfinite(barrier_penalty(start, config, weight))) {
        result.shrink_factor = feasible_shrink_factor(start, config);
        start.a *= result.shrink_factor;
        start.b *= result.shrink_factor;
        result.message = "initializer shrunk into the barrier region";
    }
    Vector theta = ParamVector::encode(start).theta;
    double value = objective(theta);
    // The inverse filter may still diverge (PEM leaves A - BC free); keep shrinking.
    for (int k = 0; k < 60 && !std::isfinite(value); ++k) {
        result.shrink_factor *= 0.9;
        start.a *= 0.9;
        start.b *= 0.9;
        theta = ParamVector::encode(start).theta;
        value = objective(theta);
        result.message = "initializer shrunk until the objective was finite";
    }
    result.initial_objective = value;
    if (!std::isfinite(value)) throw EstimationError("no finite objective value near the initializer");

    const Index dim = theta.size();
    auto gradient = [&](const Vector& at, double f_at) {
        Vector g(dim);
        Vector probe = at;
        for (Index i = 0; i < dim; ++i) {
            const double h = 1e-6 * (1.0 + std::abs(at(i)));
            probe(i) = at(i) + h;
            const double up = objective(probe);
            probe(i) = at(i) - h;
            const double down = objective(probe);
            probe(i) = at(i);
            if (std::isfinite(up) && std::isfinite(down))
                g(i) = (up - down) / (2.0 * h);
            else if (std::isfinite(up))
                g(i) = (up - f_at) / h;
            else if (std::isfinite(down))
                g(i) = (f_at - down) / h;
            else
                g(i) = 0.0;
        }
        return g;
    };

    Vector g = gradient(theta, value);
    Matrix h_inv = Matrix::Identity(dim, dim) / std::max(1.0, g.norm());
    bool fresh = true;
    int iter = 0;
    for (; iter < config.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < config.gradient_tol) {
            result.converged = true;
            break;
        }
        Vector dir = -h_inv * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h_inv = Matrix::Identity(dim, dim) / std::max(1.0, g.norm());
            fresh = true;
            dir = -h_inv * g;
            slope = g.dot(dir);
        }

        double step = 1.0;
        Vector trial;
        double trial_value = kInf;
        bool accepted = false;
        for (int k = 0; k < 50; ++k) {
            trial = theta + step * dir;
            trial_value = objective(trial);
            if (std::isfinite(trial_value) && trial_value <= value + 1e-4 * step * slope) {
                // A step that no longer moves the objective counts as a failed search.
                accepted = value - trial_value > 1e-13 * (1.0 + std::abs(value));
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (fresh) {
                result.message = "line search failed";
                break;
            }
            h_inv = Matrix::Identity(dim, dim) / std::max(1.0, g.norm());
            fresh = true;
            continue;
        }

        const Vector g_new = gradient(trial, trial_value);
        const Vector sk = trial - theta;
        const Vector yk = g_new - g;
        const double sy = sk.dot(yk);
        if (sy > 1e-12 * sk.norm() * yk.norm()) {
            if (fresh) h_inv = Matrix::Identity(dim, dim) * (sy / yk.squaredNorm());
            const double rho = 1.0 / sy;
            const Matrix left = Matrix::Identity(dim, dim) - rho * sk * yk.transpose();
            h_inv = left * h_inv * left.transpose() + rho * sk * sk.transpose();
            fresh = false;
        }
        theta = trial;
        value = trial_value;
        g = g_new;
    }

    result.iterations = iter;
    result.final_objective = value;
    result.system = ParamVector{theta, n, s}.decode();
    const PredictionErrors pe = prediction_errors(result.system, data);
    result.omega = residual_covariance(pe.residuals);
    result.omega = 0.5 * (result.omega + result.omega.transpose());
    if (result.message.empty()) result.message = result.converged ? "gradient tolerance reached" : "iteration limit";
    return result;
}

}  // namespace cvaod
