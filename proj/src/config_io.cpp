#include "cvaod/config_io.hpp"

#include "cvaod/errors.hpp"
#include "cvaod/model_io.hpp"

#include <set>
#include <string>

namespace cvaod {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw DomainError("unknown key '" + key + "' in " + where);
}

Index get_index(const json& j, const char* key) {
    if (!j[key].is_number_integer()) throw DomainError(std::string("'") + key + "' must be an integer");
    return j[key].get<Index>();
}

double get_double(const json& j, const char* key) {
    if (!j[key].is_number()) throw DomainError(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

StateSpaceModel dgp_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("'dgp' must be an object");
    if (j.contains("base")) {
        reject_unknown(j, {"base", "m_c"}, "dgp");
        if (!j.contains("m_c")) throw DomainError("over-differenced dgp needs 'm_c'");
        const StateSpaceModel base = model_from_json(j["base"]);
        const json& mc = j["m_c"];
        if (!mc.is_array() || mc.empty() || !mc[0].is_array()) throw DomainError("'m_c' must be a nested array");
        const Matrix m_c = matrix_from_json(mc, base.s(), static_cast<Index>(mc[0].size()), "m_c");
        return overdifference_model(OverdiffSpec(base, m_c));
    }
    reject_unknown(j, {"n", "s", "A", "B", "C", "omega"}, "dgp");
    return model_from_json(j);
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
    reject_unknown(j,
                   {"dgp", "order", "t_values", "m_reps", "estimators", "ir_horizon", "burn_in", "base_seed",
                    "fixed_lag", "threads", "optimizer"},
                   "experiment config");
    if (!j.contains("dgp")) throw DomainError("experiment config needs 'dgp'");
    if (!j.contains("t_values")) throw DomainError("experiment config needs 't_values'");

    ExperimentConfig cfg(dgp_from_json(j["dgp"]));
    if (!j["t_values"].is_array()) throw DomainError("'t_values' must be an array");
    for (const auto& t : j["t_values"]) {
        if (!t.is_number_integer()) throw DomainError("'t_values' entries must be integers");
        cfg.t_values.push_back(t.get<Index>());
    }
    if (j.contains("order")) cfg.order = get_index(j, "order");
    if (j.contains("m_reps")) cfg.m_reps = get_index(j, "m_reps");
    if (j.contains("ir_horizon")) cfg.ir_horizon = get_index(j, "ir_horizon");
    if (j.contains("burn_in")) cfg.burn_in = get_index(j, "burn_in");
    if (j.contains("fixed_lag")) cfg.fixed_lag = get_index(j, "fixed_lag");
    if (j.contains("threads")) {
        const Index threads = get_index(j, "threads");
        if (threads < 1) throw DomainError("'threads' must be at least 1");
        cfg.threads = static_cast<unsigned>(threads);
    }
    if (j.contains("base_seed")) {
        if (!j["base_seed"].is_number_unsigned()) throw DomainError("'base_seed' must be a nonnegative integer");
        cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    }
    if (j.contains("estimators")) {
        if (!j["estimators"].is_array()) throw DomainError("'estimators' must be an array");
        cfg.estimators.clear();
        for (const auto& e : j["estimators"]) {
            if (!e.is_string()) throw DomainError("'estimators' entries must be strings");
            cfg.estimators.push_back(estimator_from_string(e.get<std::string>()));
        }
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        if (!o.is_object()) throw DomainError("'optimizer' must be an object");
        reject_unknown(o, {"max_iters", "gradient_tol", "barrier_radius"}, "optimizer");
        if (o.contains("max_iters")) cfg.max_iters = static_cast<int>(get_index(o, "max_iters"));
        if (o.contains("gradient_tol")) cfg.gradient_tol = get_double(o, "gradient_tol");
        if (o.contains("barrier_radius")) cfg.barrier_radius = get_double(o, "barrier_radius");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_json(read_json_file(path));
}

}  // namespace cvaod
