// cvaod: simulate, estimate, and study CVA on over-differenced state-space models.
//
// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
// 4 total estimation failure.

#include "cvaod/config_io.hpp"
#include "cvaod/csv.hpp"
#include "cvaod/cva.hpp"
#include "cvaod/errors.hpp"
#include "cvaod/likelihood.hpp"
#include "cvaod/model_io.hpp"
#include "cvaod/monte_carlo.hpp"
#include "cvaod/oracle.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace cvaod;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitEstimation = 4;

struct SimulateArgs {
    std::string model;
    Index t = 0;
    std::uint64_t seed = 1;
    Index burn_in = 1000;
    std::string output;
};

struct EstimateArgs {
    std::string input;
    std::string method = "cva";
    std::optional<Index> f, p;
    Index n = 0;
    bool auto_order = false;
    std::string output;
    std::string report;
    int max_iters = 200;
};

struct ExperimentArgs {
    std::string config;
    std::string output_dir;
    std::optional<unsigned> threads;
};

struct BiasArgs {
    std::string model;
    Index p_min = 1;
    Index p_max = 1;
    std::string output;
};

struct LambdaArgs {
    std::string model;
    Index p_max = 1;
    std::string output;
};

int run_simulate(const SimulateArgs& a) {
    const StateSpaceModel model = read_model_file(a.model);
    if (a.t < 1) throw DomainError("--T must be at least 1");
    if (a.burn_in < 0) throw DomainError("--burn-in must be nonnegative");
    const Matrix y = simulate_dgp(model, a.t, a.burn_in, a.seed);
    std::vector<std::string> header;
    for (Index i = 0; i < model.s(); ++i) header.push_back("y" + std::to_string(i + 1));
    write_matrix_csv(a.output, y, header);
    return kExitOk;
}

fs::path singular_values_path(const fs::path& output) {
    fs::path sv = output;
    sv.replace_filename(output.stem().string() + "_singular_values.csv");
    return sv;
}

int run_estimate(const EstimateArgs& a) {
    if (a.n < 1) throw DomainError("--n must be at least 1");
    if (!a.auto_order && (!a.f || !a.p)) throw DomainError("give --f and --p, or --auto-order");
    if (a.method != "cva" && a.method != "qmle" && a.method != "pem")
        throw DomainError("--method must be cva, qmle or pem");
    const Matrix data = read_series_csv(a.input);

    Index f = 0, p = 0;
    nlohmann::json report;
    if (a.auto_order) {
        const OrderSelection sel = select_order(data, a.n);
        f = sel.f;
        p = sel.p;
        report["k_aic"] = sel.k_aic;
    }
    if (a.f) f = *a.f;
    if (a.p) p = *a.p;

    const CvaEstimate cva = cva_fit(data, f, p, a.n);
    report["method"] = a.method;
    report["f"] = f;
    report["p"] = p;
    report["n"] = a.n;
    report["singular_value_tie"] = cva.singular_value_tie;

    System system = cva.system();
    Matrix omega = cva.omega_hat;
    if (a.method != "cva") {
        ObjectiveConfig oc;
        oc.kind = objective_kind_from_string(a.method);
        oc.max_iters = a.max_iters;
        const OptimizeResult opt = optimize(data, system, oc);
        system = opt.system;
        omega = opt.omega;
        report["optimizer"] = {{"iterations", opt.iterations},
                               {"initial_objective", opt.initial_objective},
                               {"final_objective", opt.final_objective},
                               {"converged", opt.converged},
                               {"shrink_factor", opt.shrink_factor},
                               {"message", opt.message}};
    }

    write_json_file(a.output, system_to_json(system, omega));
    const fs::path sv_path = singular_values_path(a.output);
    Matrix sv(cva.singular_values.size(), 2);
    for (Index i = 0; i < sv.rows(); ++i) {
        sv(i, 0) = static_cast<double>(i + 1);
        sv(i, 1) = cva.singular_values(i);
    }
    write_matrix_csv(sv_path, sv, {"index", "singular_value"});
    report["model_file"] = a.output;
    report["singular_values_file"] = sv_path.string();

    if (!a.report.empty())
        write_json_file(a.report, report);
    else
        std::cout << report.dump(2) << '\n';
    return kExitOk;
}

int run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentConfig cfg = read_experiment_config(a.config);
    if (a.threads) {
        if (*a.threads < 1) throw DomainError("--threads must be at least 1");
        cfg.threads = *a.threads;
    }
    const McResult result = run_experiment(cfg);
    write_experiment_outputs(result, a.output_dir);

    bool total_failure = false;
    std::cout << std::left << std::setw(10) << "estimator" << std::setw(8) << "T" << std::setw(16) << "mse_times_T"
              << std::setw(8) << "n_ok" << "n_fail\n";
    for (const auto& c : result.mse) {
        std::cout << std::left << std::setw(10) << to_string(c.estimator) << std::setw(8) << c.t << std::setw(16)
                  << c.mse_times_t << std::setw(8) << c.n_ok << c.n_fail << '\n';
        total_failure = total_failure || c.n_ok == 0;
    }
    if (total_failure) {
        std::cerr << "error: every fit failed in at least one (estimator, T) cell\n";
        return kExitEstimation;
    }
    return kExitOk;
}

int run_bias(const BiasArgs& a) {
    if (a.p_min < 1 || a.p_min > a.p_max) throw DomainError("need 1 <= --p-min <= --p-max");
    const StateSpaceModel model = read_model_file(a.model);
    if (a.p_min < model.n()) throw DomainError("--p-min must be at least the state dimension");
    std::vector<Index> ps;
    for (Index p = a.p_min; p <= a.p_max; ++p) ps.push_back(p);
    write_bias_csv(a.output, bias_curve(model, ps));
    return kExitOk;
}

int run_lambda(const LambdaArgs& a) {
    if (a.p_max < 1) throw DomainError("--p-max must be at least 1");
    const StateSpaceModel model = read_model_file(a.model);
    write_lambda_min_csv(a.output, lambda_min_study(model, a.p_max));
    return kExitOk;
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const EstimationError& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CVA subspace estimation for over-differenced state-space models"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Simulate a series from a model file");
    cmd_sim->add_option("--model", sim.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    cmd_sim->add_option("--T", sim.t, "Number of observations")->required();
    cmd_sim->add_option("--seed", sim.seed, "Random seed");
    cmd_sim->add_option("--burn-in", sim.burn_in, "Discarded initial observations");
    cmd_sim->add_option("--output", sim.output, "Output CSV")->required();

    EstimateArgs est;
    auto* cmd_est = app.add_subcommand("estimate", "Estimate a state-space model from a CSV series");
    cmd_est->add_option("--input", est.input, "Input CSV, T rows x s columns")->required()->check(CLI::ExistingFile);
    cmd_est->add_option("--method", est.method, "cva, qmle or pem")->check(CLI::IsMember({"cva", "qmle", "pem"}));
    cmd_est->add_option("--f", est.f, "Future horizon f");
    cmd_est->add_option("--p", est.p, "Past horizon p");
    cmd_est->add_option("--n", est.n, "System order")->required();
    cmd_est->add_flag("--auto-order", est.auto_order, "f = p = max(2 k_AIC, n)");
    cmd_est->add_option("--output", est.output, "Output model JSON")->required();
    cmd_est->add_option("--report", est.report, "Diagnostics JSON (default: standard output)");
    cmd_est->add_option("--max-iters", est.max_iters, "Optimizer iteration limit for qmle/pem");

    ExperimentArgs exp;
    auto* cmd_exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
    cmd_exp->add_option("--config", exp.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    cmd_exp->add_option("--output-dir", exp.output_dir, "Directory for CSV results")->required();
    cmd_exp->add_option("--threads", exp.threads, "Worker threads");

    BiasArgs bias;
    auto* cmd_bias = app.add_subcommand("bias-study", "Population bias of (A_p, B_p, C_p) over p");
    cmd_bias->add_option("--model", bias.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    cmd_bias->add_option("--p-min", bias.p_min, "Smallest p")->required();
    cmd_bias->add_option("--p-max", bias.p_max, "Largest p")->required();
    cmd_bias->add_option("--output", bias.output, "Output CSV")->required();

    LambdaArgs lam;
    auto* cmd_lam = app.add_subcommand("lambda-min-study", "Smallest eigenvalue of Gamma_p for p = 1..p-max");
    cmd_lam->add_option("--model", lam.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    cmd_lam->add_option("--p-max", lam.p_max, "Largest p")->required();
    cmd_lam->add_option("--output", lam.output, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*cmd_sim) return guarded([&] { return run_simulate(sim); });
    if (*cmd_est) return guarded([&] { return run_estimate(est); });
    if (*cmd_exp) return guarded([&] { return run_experiment_cmd(exp); });
    if (*cmd_bias) return guarded([&] { return run_bias(bias); });
    if (*cmd_lam) return guarded([&] { return run_lambda(lam); });
    return kExitUsage;
}
