#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "imbed/hammerstein.hpp"
#include "imbed/imbedding_engine.hpp"

namespace imbed {

/// Shortest-round-trip-safe text for x: 17 significant digits, '.' separator,
/// independent of the global locale.
std::string format_number(double x);

/// {dim, entries: row-major [re, im] pairs}.
nlohmann::json operator_to_json(const DiscreteOperator& op);
/// Inverse of operator_to_json; throws ConfigError on malformed input.
DiscreteOperator operator_from_json(const nlohmann::json& j);

nlohmann::json complex_to_json(Complex z);

/// lambda_re,lambda_im,d_re,d_im,residual,step_size
void write_trajectory_csv(std::ostream& out, const std::vector<ImbeddingState>& states);
/// Every sample without D̂; `snapshots` (for instance the states at the path
/// waypoints) carry D̂ in full.
nlohmann::json trajectory_json(const std::vector<ImbeddingState>& states,
                               const std::vector<ImbeddingState>& snapshots = {});

/// lambda,branch_id,d_lin_re,d_lin_im,amplitude,newton_iters
void write_branch_csv(std::ostream& out, const std::vector<ContinuationState>& states);
/// One object per state, including the per-node ψ.
nlohmann::json branch_json(const std::vector<ContinuationState>& states);

/// Writes `text` to `path`, throwing IoError on failure.
void write_file(const std::string& path, const std::string& text);

} // namespace imbed
