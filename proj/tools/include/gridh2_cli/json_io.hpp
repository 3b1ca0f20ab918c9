#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "gridh2/network.hpp"
#include "gridh2/optimize.hpp"
#include "gridh2/simulate.hpp"

namespace gridh2::cli {

using Json = nlohmann::ordered_json;

struct NetworkDocument {
  PowerNetwork network;
  std::optional<InitialCondition> initial_condition;
};

/// Parses text, reporting syntax errors as "line L, column C: ...".
/// Throws Error(kInvalidInput).
Json parse_json_text(const std::string& text, const std::string& source);

/// Reads a file, or resolves "case:NAME" against the built-in case bank.
Json load_json(const std::string& path_or_case);

/// Schema errors name the JSON path, e.g. "nodes[2].inertia".
NetworkDocument network_from_json(const Json& doc);
Json network_to_json(const PowerNetwork& net, const InitialCondition* ic = nullptr);

/// Network from a file path or "case:NAME"; validated.
NetworkDocument load_network(const std::string& path_or_case);

SusceptanceProblem susceptance_from_json(const Json& doc);
AssignmentProblem assignment_from_json(const Json& doc);
MinMaxProblem minmax_from_json(const Json& doc);
/// The allocation document embeds its network under "network", either as an
/// object or as a "case:NAME" string.
AllocationProblem allocation_from_json(const Json& doc, PowerNetwork& net);

Json problem_json(const SusceptanceProblem& p);
Json problem_json(const AssignmentProblem& p);
Json problem_json(const MinMaxProblem& p);
Json problem_json(const AllocationProblem& p, const Json& network);

Json solution_json(const ScenarioSolution& s);

Json vector_json(const Eigen::VectorXd& v);

}  // namespace gridh2::cli
