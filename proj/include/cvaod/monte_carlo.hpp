#pragma once

#include "cvaod/likelihood.hpp"
#include "cvaod/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvaod {

enum class Estimator { cva, qmle, pem };

const char* to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stream seed of replication m at sample size t.
std::uint64_t replication_seed(std::uint64_t base_seed, Index t, Index m);

/// T x s draws from the model driven by Gaussian innovations with variance
/// omega, started at x = 0 after discarding burn_in observations.
Matrix simulate_dgp(const StateSpaceModel& model, Index t, Index burn_in, std::uint64_t seed);

/// Like simulate_dgp, additionally returning the state path (T x n) aligned
/// with the observations: row t holds x_t for y_t = C x_t + e_t.
struct SimulatedPath {
    Matrix y;
    Matrix x;
};
SimulatedPath simulate_path(const StateSpaceModel& model, Index t, Index burn_in, std::uint64_t seed);

struct ExperimentConfig {
    explicit ExperimentConfig(StateSpaceModel model) : dgp(std::move(model)) {}

    StateSpaceModel dgp;
    Index order = 2;
    std::vector<Index> t_values;
    Index m_reps = 1;
    std::vector<Estimator> estimators{Estimator::cva};
    Index ir_horizon = 10;
    Index burn_in = 1000;
    std::uint64_t base_seed = 1;
    /// Fixed f = p; unset means f = p = max(2 k_AIC, n).
    std::optional<Index> fixed_lag;
    int max_iters = 200;
    double gradient_tol = 1e-3;
    double barrier_radius = 0.99;
    unsigned threads = 1;

    void validate() const;
};

struct FitRecord {
    Estimator estimator = Estimator::cva;
    Index t = 0;
    Index rep = 0;
    bool ok = false;
    std::string failure;
    Index k_aic = 0;
    Index f = 0;
    Index p = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    double trace_abar = 0.0;
    /// sum_{j<=J} ||K_j_hat - K_j||_F^2
    double ir_sq_error = 0.0;
    std::vector<Matrix> impulse_responses;  // K_1_hat..K_J_hat
};

struct MseCell {
    Estimator estimator = Estimator::cva;
    Index t = 0;
    double mse_times_t = 0.0;
    Index n_ok = 0;
    Index n_fail = 0;
};

struct McResult {
    /// Sorted by (estimator, T, rep).
    std::vector<FitRecord> records;
    /// Sorted by (estimator, T).
    std::vector<MseCell> mse;

    const MseCell& cell(Estimator e, Index t) const;
    std::vector<const FitRecord*> fits(Estimator e, Index t) const;
    /// Values of trace(A - BC) over successful fits.
    std::vector<double> trace_samples(Estimator e, Index t) const;
    /// Entry (i, j) of K_1_hat over successful fits.
    std::vector<double> k1_samples(Estimator e, Index t, Index i, Index j) const;
};

McResult run_experiment(const ExperimentConfig& config);

/// Writes mse.csv, reps.csv and density_<estimator>_T<T>_{k11,trace}.csv.
/// Returns the files written.
std::vector<std::filesystem::path> write_experiment_outputs(const McResult& result, const std::filesystem::path& dir,
                                                            Index density_points = 256);

/// Gaussian kernel density with Silverman bandwidth 1.06 sd m^{-1/5}.
std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid);

/// `points` equally spaced values spanning mean +- 4 sd.
std::vector<double> density_grid(std::span<const double> samples, Index points);

struct NormalityStats {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double jarque_bera = 0.0;
};

NormalityStats normality_check(std::span<const double> samples);

double sample_mean(std::span<const double> v);
double sample_sd(std::span<const double> v);
double sample_median(std::vector<double> v);

}  // namespace cvaod
