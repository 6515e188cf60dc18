#include "cvaod/config_io.hpp"
#include "cvaod/cva.hpp"
#include "cvaod/errors.hpp"
#include "cvaod/likelihood.hpp"
#include "cvaod/model_io.hpp"
#include "cvaod/monte_carlo.hpp"
#include "cvaod/oracle.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cvaod;

namespace {

py::dict limits_dict(const PopulationLimit& lim) {
    py::dict d;
    d["p"] = lim.p;
    d["A"] = lim.a_p;
    d["B"] = lim.b_p;
    d["C"] = lim.c_p;
    d["K"] = lim.k_p;
    d["sigma_x"] = lim.sigma_x;
    d["sigma_eps"] = lim.sigma_eps;
    d["delta_var"] = lim.delta_var;
    return d;
}

py::dict cva_dict(const CvaEstimate& est) {
    py::dict d;
    d["A"] = est.a_hat;
    d["B"] = est.b_hat;
    d["C"] = est.c_hat;
    d["omega"] = est.omega_hat;
    d["K_p"] = est.k_p_hat;
    d["O_f"] = est.o_f_hat;
    d["beta"] = est.beta_hat;
    d["singular_values"] = est.singular_values;
    d["f"] = est.f;
    d["p"] = est.p;
    d["n"] = est.n;
    d["singular_value_tie"] = est.singular_value_tie;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CVA estimation for over-differenced state-space processes";

    // DomainError derives from std::invalid_argument and surfaces as ValueError.
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

    py::class_<StateSpaceModel>(m, "StateSpaceModel")
        .def(py::init<Matrix, Matrix, Matrix, Matrix>(), py::arg("A"), py::arg("B"), py::arg("C"), py::arg("omega"))
        .def_property_readonly("A", &StateSpaceModel::a)
        .def_property_readonly("B", &StateSpaceModel::b)
        .def_property_readonly("C", &StateSpaceModel::c)
        .def_property_readonly("omega", &StateSpaceModel::omega)
        .def_property_readonly("n", &StateSpaceModel::n)
        .def_property_readonly("s", &StateSpaceModel::s)
        .def("closed_loop", &StateSpaceModel::closed_loop)
        .def("__repr__", [](const StateSpaceModel& s) {
            return "StateSpaceModel(n=" + std::to_string(s.n()) + ", s=" + std::to_string(s.s()) + ")";
        });

    m.def("simulation_base_model", &simulation_base_model);
    m.def("simulation_differenced_model", &simulation_differenced_model);
    m.def("differenced_white_noise_model", &differenced_white_noise_model, py::arg("omega"));
    m.def(
        "overdifference_model",
        [](const StateSpaceModel& base, const Matrix& m_c) { return overdifference_model(OverdiffSpec(base, m_c)); },
        py::arg("base"), py::arg("m_c"));
    m.def("read_model", [](const std::string& path) { return read_model_file(path); }, py::arg("path"));
    m.def(
        "model_to_json", [](const StateSpaceModel& model) { return model_to_json(model).dump(); }, py::arg("model"));

    m.def("spectral_radius", &spectral_radius, py::arg("m"));
    m.def(
        "covariance_sequence",
        [](const StateSpaceModel& model, Index max_lag) { return covariance_sequence(model, max_lag).gammas(); },
        py::arg("model"), py::arg("max_lag"));
    m.def(
        "impulse_responses",
        [](const StateSpaceModel& model, Index horizon) { return impulse_responses(model.system(), horizon); },
        py::arg("model"), py::arg("horizon"));

    m.def(
        "lambda_min_gamma",
        [](const StateSpaceModel& model, Index p) { return lambda_min_gamma(covariance_sequence(model, p), p); },
        py::arg("model"), py::arg("p"));
    m.def(
        "population_limits", [](const StateSpaceModel& model, Index p) { return limits_dict(population_limits(model, p)); },
        py::arg("model"), py::arg("p"));

    m.def("simulate", &simulate_dgp, py::arg("model"), py::arg("T"), py::arg("burn_in") = 1000, py::arg("seed") = 1);

    m.def("aic_order", &aic_order, py::arg("data"), py::arg("p_max"));
    m.def(
        "select_order",
        [](const Matrix& data, Index n) {
            const OrderSelection sel = select_order(data, n);
            return py::make_tuple(sel.k_aic, sel.f, sel.p);
        },
        py::arg("data"), py::arg("n"));
    m.def(
        "cva_fit", [](const Matrix& data, Index f, Index p, Index n) { return cva_dict(cva_fit(data, f, p, n)); },
        py::arg("data"), py::arg("f"), py::arg("p"), py::arg("n"));

    m.def(
        "loglik",
        [](const StateSpaceModel& model, const Matrix& data) { return gaussian_kalman_loglik(model, data); },
        py::arg("model"), py::arg("data"));
    m.def(
        "optimize",
        [](const Matrix& data, const Matrix& a, const Matrix& b, const Matrix& c, const std::string& kind,
           int max_iters) {
            ObjectiveConfig cfg;
            cfg.kind = objective_kind_from_string(kind);
            cfg.max_iters = max_iters;
            cfg.validate();
            const OptimizeResult r = optimize(data, System(a, b, c), cfg);
            py::dict d;
            d["A"] = r.system.a;
            d["B"] = r.system.b;
            d["C"] = r.system.c;
            d["omega"] = r.omega;
            d["iterations"] = r.iterations;
            d["initial_objective"] = r.initial_objective;
            d["final_objective"] = r.final_objective;
            d["converged"] = r.converged;
            d["shrink_factor"] = r.shrink_factor;
            d["message"] = r.message;
            return d;
        },
        py::arg("data"), py::arg("A"), py::arg("B"), py::arg("C"), py::arg("kind") = "qmle", py::arg("max_iters") = 200);

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(config_json);
            } catch (const nlohmann::json::parse_error& e) {
                throw DomainError(std::string("invalid experiment JSON: ") + e.what());
            }
            const ExperimentConfig cfg = experiment_config_from_json(j);
            McResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg);
            }
            py::list rows;
            for (const MseCell& c : r.mse) {
                py::dict d;
                d["estimator"] = to_string(c.estimator);
                d["T"] = c.t;
                d["mse_times_T"] = c.mse_times_t;
                d["n_ok"] = c.n_ok;
                d["n_fail"] = c.n_fail;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config_json"));
}
