#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridh2/network.hpp"
#include "gridh2/optimize.hpp"
#include "gridh2/simulate.hpp"

namespace gridh2 {

struct ScenarioPresets {
  std::optional<SusceptanceProblem> susceptance;
  std::optional<AssignmentProblem> assignment;
  std::optional<MinMaxProblem> minmax;
  std::optional<AllocationProblem> allocation;
};

struct CaseBankEntry {
  std::string name;
  std::string description;
  PowerNetwork network;
  InitialCondition initial_condition;
  ScenarioPresets presets;
  // Node groups used when plotting (for example the two areas).
  std::vector<std::vector<std::size_t>> areas;
  std::string provenance;
};

/// Built-in cases: "two-node", "triangle", "four-node-lines", "kundur-like"
/// and "symmetric-two-converter".
const std::vector<CaseBankEntry>& case_bank();

/// Throws Error(kInvalidInput) for unknown names.
const CaseBankEntry& find_case(std::string_view name);

}  // namespace gridh2
