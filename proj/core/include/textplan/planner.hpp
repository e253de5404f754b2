// Forward state-space planner: greedy best-first search with a goal-count
// heuristic, seeded random tie-breaking, and a node budget.
#pragma once

#include <cstdint>
#include <stdexcept>

#include "textplan/pddl.hpp"
#include "textplan/strips.hpp"

namespace textplan {

struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlanResult {
  std::vector<GroundAction> plan;
  std::vector<State> trace;  // trace[0] == init, trace.back() ⊇ goal
  std::size_t expanded = 0;
};

// All type-correct instantiations of the domain's schemas over `objects`.
std::vector<GroundAction> ground_all(const Domain& domain,
                                     const std::vector<ObjectRef>& objects);

// Throws PlannerError when the node budget is exhausted before a state
// containing the goal is reached.
PlanResult solve(const Domain& domain, const Problem& problem,
                 std::uint64_t seed = 0, std::size_t node_budget = 200000);

}  // namespace textplan
