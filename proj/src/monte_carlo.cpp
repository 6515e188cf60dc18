#include "cvaod/monte_carlo.hpp"

#include "cvaod/csv.hpp"
#include "cvaod/cva.hpp"
#include "cvaod/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

namespace cvaod {

const char* to_string(Estimator e) {
    switch (e) {
        case Estimator::cva:
            return "cva";
        case Estimator::qmle:
            return "qmle";
        case Estimator::pem:
            return "pem";
    }
    return "?";
}

Estimator estimator_from_string(const std::string& name) {
    if (name == "cva") return Estimator::cva;
    if (name == "qmle") return Estimator::qmle;
    if (name == "pem") return Estimator::pem;
    throw DomainError("unknown estimator '" + name + "' (expected cva, qmle or pem)");
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t base_seed, Index t, Index m) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ static_cast<std::uint64_t>(t));
    h = mix64(h ^ static_cast<std::uint64_t>(m));
    return h;
}

SimulatedPath simulate_path(const StateSpaceModel& model, Index t, Index burn_in, std::uint64_t seed) {
    if (t < 0 || burn_in < 0) throw DomainError("sample size and burn-in must be nonnegative");
    const Index n = model.n();
    const Index s = model.s();
    const Matrix chol = model.omega().llt().matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SimulatedPath path{Matrix(t, s), Matrix(t, n)};
    Vector x = Vector::Zero(n);
    Vector z(s);
    for (Index k = 0; k < burn_in + t; ++k) {
        for (Index i = 0; i < s; ++i) z(i) = normal(rng);
        const Vector e = chol * z;
        if (k >= burn_in) {
            path.x.row(k - burn_in) = x.transpose();
            path.y.row(k - burn_in) = (model.c() * x + e).transpose();
        }
        x = model.a() * x + model.b() * e;
    }
    return path;
}

Matrix simulate_dgp(const StateSpaceModel& model, Index t, Index burn_in, std::uint64_t seed) {
    return simulate_path(model, t, burn_in, seed).y;
}

void ExperimentConfig::validate() const {
    if (m_reps < 1) throw DomainError("m_reps must be at least 1");
    if (burn_in < 100) throw DomainError("burn_in must be at least 100");
    if (ir_horizon < 1) throw DomainError("ir_horizon must be at least 1");
    if (order < 1) throw DomainError("order must be at least 1");
    if (t_values.empty()) throw DomainError("t_values must not be empty");
    for (Index t : t_values)
        if (t < 20) throw DomainError("every sample size must be at least 20");
    if (estimators.empty()) throw DomainError("at least one estimator is required");
    if (fixed_lag && *fixed_lag < 1) throw DomainError("fixed f = p must be at least 1");
    if (threads < 1) throw DomainError("threads must be at least 1");
    ObjectiveConfig oc;
    oc.barrier_radius = barrier_radius;
    oc.max_iters = max_iters;
    oc.gradient_tol = gradient_tol;
    oc.validate();
}

const MseCell& McResult::cell(Estimator e, Index t) const {
    for (const auto& c : mse)
        if (c.estimator == e && c.t == t) return c;
    throw DomainError(std::string("no result cell for ") + to_string(e) + " at T = " + std::to_string(t));
}

std::vector<const FitRecord*> McResult::fits(Estimator e, Index t) const {
    std::vector<const FitRecord*> out;
    for (const auto& r : records)
        if (r.estimator == e && r.t == t) out.push_back(&r);
    return out;
}

std::vector<double> McResult::trace_samples(Estimator e, Index t) const {
    std::vector<double> out;
    for (const auto* r : fits(e, t))
        if (r->ok) out.push_back(r->trace_abar);
    return out;
}

std::vector<double> McResult::k1_samples(Estimator e, Index t, Index i, Index j) const {
    std::vector<double> out;
    for (const auto* r : fits(e, t))
        if (r->ok) out.push_back(r->impulse_responses.front()(i, j));
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

void fill_metrics(FitRecord& rec, const System& sys, const std::vector<Matrix>& truth) {
    rec.trace_abar = sys.closed_loop().trace();
    rec.impulse_responses = impulse_responses(sys, static_cast<Index>(truth.size()));
    rec.ir_sq_error = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) rec.ir_sq_error += (rec.impulse_responses[j] - truth[j]).squaredNorm();
    if (!std::isfinite(rec.ir_sq_error)) throw EstimationError("non-finite impulse response estimate");
    rec.ok = true;
}

/// All estimators on one simulated sample; records are written in estimator order.
std::vector<FitRecord> run_replication(const ExperimentConfig& cfg, const std::vector<Estimator>& estimators,
                                       const std::vector<Matrix>& truth, Index t, Index rep) {
    std::vector<FitRecord> out;
    for (Estimator e : estimators) {
        FitRecord r;
        r.estimator = e;
        r.t = t;
        r.rep = rep;
        out.push_back(std::move(r));
    }

    const Matrix data = simulate_dgp(cfg.dgp, t, cfg.burn_in, replication_seed(cfg.base_seed, t, rep));
    Index k_aic = 0, f = 0, p = 0;
    std::optional<CvaEstimate> cva;
    std::string cva_failure;
    const auto cva_start = Clock::now();
    try {
        if (cfg.fixed_lag) {
            f = p = *cfg.fixed_lag;
        } else {
            const OrderSelection sel = select_order(data, cfg.order);
            k_aic = sel.k_aic;
            f = sel.f;
            p = sel.p;
        }
        cva = cva_fit(data, f, p, cfg.order);
    } catch (const std::exception& ex) {
        cva_failure = ex.what();
    }
    const double cva_seconds = std::chrono::duration<double>(Clock::now() - cva_start).count();

    for (auto& rec : out) {
        rec.k_aic = k_aic;
        rec.f = f;
        rec.p = p;
        if (!cva) {
            rec.failure = rec.estimator == Estimator::cva ? cva_failure : "CVA initializer failed: " + cva_failure;
            continue;
        }
        const auto start = Clock::now();
        try {
            if (rec.estimator == Estimator::cva) {
                rec.converged = true;
                fill_metrics(rec, cva->system(), truth);
                rec.wall_seconds = cva_seconds;
                continue;
            }
            ObjectiveConfig oc;
            oc.kind = rec.estimator == Estimator::qmle ? ObjectiveKind::qmle : ObjectiveKind::pem;
            oc.barrier_radius = cfg.barrier_radius;
            oc.max_iters = cfg.max_iters;
            oc.gradient_tol = cfg.gradient_tol;
            const OptimizeResult opt = optimize(data, cva->system(), oc);
            rec.converged = opt.converged;
            fill_metrics(rec, opt.system, truth);
        } catch (const std::exception& ex) {
            rec.ok = false;
            rec.failure = ex.what();
        }
        rec.wall_seconds = cva_seconds + std::chrono::duration<double>(Clock::now() - start).count();
    }
    return out;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

McResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<Estimator> estimators = config.estimators;
    std::sort(estimators.begin(), estimators.end());
    estimators.erase(std::unique(estimators.begin(), estimators.end()), estimators.end());
    std::vector<Index> t_values = config.t_values;
    std::sort(t_values.begin(), t_values.end());
    t_values.erase(std::unique(t_values.begin(), t_values.end()), t_values.end());

    const std::vector<Matrix> truth = impulse_responses(config.dgp.system(), config.ir_horizon);
    const std::size_t n_est = estimators.size();
    const std::size_t n_t = t_values.size();
    const std::size_t n_rep = static_cast<std::size_t>(config.m_reps);
    const std::size_t n_jobs = n_t * n_rep;

    // Slot (estimator, T, rep) is filled by exactly one job; no ordering depends on timing.
    std::vector<FitRecord> slots(n_est * n_jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) {
            const std::size_t ti = job / n_rep;
            const std::size_t rep = job % n_rep;
            auto recs = run_replication(config, estimators, truth, t_values[ti], static_cast<Index>(rep));
            for (std::size_t e = 0; e < n_est; ++e) slots[(e * n_t + ti) * n_rep + rep] = std::move(recs[e]);
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(n_jobs)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    }

    McResult result;
    result.records = std::move(slots);
    for (std::size_t e = 0; e < n_est; ++e) {
        for (std::size_t ti = 0; ti < n_t; ++ti) {
            MseCell cell;
            cell.estimator = estimators[e];
            cell.t = t_values[ti];
            double sum = 0.0;
            for (std::size_t rep = 0; rep < n_rep; ++rep) {
                const auto& r = result.records[(e * n_t + ti) * n_rep + rep];
                if (r.ok) {
                    sum += r.ir_sq_error;
                    ++cell.n_ok;
                } else {
                    ++cell.n_fail;
                }
            }
            cell.mse_times_t = cell.n_ok > 0 ? static_cast<double>(cell.t) * sum / static_cast<double>(cell.n_ok)
                                             : std::numeric_limits<double>::quiet_NaN();
            result.mse.push_back(cell);
        }
    }
    return result;
}

std::vector<std::filesystem::path> write_experiment_outputs(const McResult& result, const std::filesystem::path& dir,
                                                            Index density_points) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) throw DomainError("cannot write " + p.string());
        written.push_back(p);
        return out;
    };

    {
        auto out = open(dir / "mse.csv");
        out << "estimator,T,mse_times_T,n_ok,n_fail\n";
        for (const auto& c : result.mse)
            out << to_string(c.estimator) << ',' << c.t << ',' << format_number(c.mse_times_t) << ',' << c.n_ok << ','
                << c.n_fail << '\n';
    }

    {
        Index s = 0;
        for (const auto& r : result.records)
            if (r.ok) {
                s = r.impulse_responses.front().rows();
                break;
            }
        auto out = open(dir / "reps.csv");
        out << "estimator,T,rep,ok,converged,k_aic,f,p,trace_abar,ir_sq_error";
        for (Index i = 0; i < s; ++i)
            for (Index j = 0; j < s; ++j) out << ",k1_" << i + 1 << '_' << j + 1;
        out << ",wall_seconds,failure\n";
        for (const auto& r : result.records) {
            out << to_string(r.estimator) << ',' << r.t << ',' << r.rep << ',' << int(r.ok) << ',' << int(r.converged)
                << ',' << r.k_aic << ',' << r.f << ',' << r.p << ',';
            out << (r.ok ? format_number(r.trace_abar) : "nan") << ',' << (r.ok ? format_number(r.ir_sq_error) : "nan");
            for (Index i = 0; i < s; ++i)
                for (Index j = 0; j < s; ++j) out << ',' << (r.ok ? format_number(r.impulse_responses.front()(i, j)) : "nan");
            out << ',' << format_number(r.wall_seconds) << ',' << csv_safe(r.failure) << '\n';
        }
    }

    for (const auto& c : result.mse) {
        const std::string stem = std::string("density_") + to_string(c.estimator) + "_T" + std::to_string(c.t);
        const std::vector<std::pair<std::string, std::vector<double>>> series{
            {"k11", result.k1_samples(c.estimator, c.t, 0, 0)}, {"trace", result.trace_samples(c.estimator, c.t)}};
        for (const auto& [tag, samples] : series) {
            if (samples.size() < 10) continue;
            if (!(sample_sd(samples) > 0.0)) continue;
            const auto grid = density_grid(samples, density_points);
            const auto dens = kernel_density(samples, grid);
            auto out = open(dir / (stem + "_" + tag + ".csv"));
            out << "grid,value\n";
            for (std::size_t k = 0; k < grid.size(); ++k) out << format_number(grid[k]) << ',' << format_number(dens[k]) << '\n';
        }
    }
    return written;
}

}  // namespace cvaod
