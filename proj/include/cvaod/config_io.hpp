#pragma once

#include "cvaod/monte_carlo.hpp"

#include <json.hpp>

#include <filesystem>

namespace cvaod {

/**
 * Experiment configuration file:
 *
 *     {
 *       "dgp": <model> | {"base": <model>, "m_c": [[...]]},
 *       "order": 2,
 *       "t_values": [100, 200, 400, 800, 1600],
 *       "m_reps": 1000,
 *       "estimators": ["cva", "qmle", "pem"],
 *       "ir_horizon": 10,
 *       "burn_in": 1000,
 *       "base_seed": 1,
 *       "fixed_lag": 5,
 *       "threads": 1,
 *       "optimizer": {"max_iters": 200, "gradient_tol": 1e-3, "barrier_radius": 0.99}
 *     }
 *
 * Only "dgp" and "t_values" are required. Unknown keys are rejected. A
 * {"base", "m_c"} dgp is over-differenced before use.
 */
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

}  // namespace cvaod
