// Per-plan action-model learning: encode one (states, plan, goal) triple as
// a weighted MAX-SAT instance over pre/add/del decision variables and solve
// it with stochastic local search.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "textplan/strips.hpp"

namespace textplan {

enum class Slot { kPre = 0, kAdd = 1, kDel = 2 };

struct DecisionVar {
  int action;                // index into the instance's action headers
  Slot slot;
  int topical;               // registry index
  std::vector<int> binding;  // topical parameter -> action parameter index

  bool operator==(const DecisionVar&) const = default;
};

struct Lit {
  int var;
  bool negated = false;
};

// Disjunction of conjunctions; ordinary clauses use singleton groups. The
// causal-link constraints need one two-literal conjunction per candidate.
struct Clause {
  double weight = 0;  // ignored for hard clauses
  bool hard = false;
  std::vector<std::vector<Lit>> groups;

  static Clause unit(Lit l, double w);
  static Clause disj(std::vector<Lit> lits, double w, bool hard = false);
};

struct MaxSatInstance {
  std::vector<ActionHeader> headers;  // actions with variables, plan order of first use
  std::vector<DecisionVar> vars;
  std::vector<Clause> clauses;

  int var_index(int action, Slot slot, int topical,
                const std::vector<int>& binding) const;
};

struct SatConfig {
  int restarts = 10;
  int flips = 20000;        // per restart; scaled by variable count when 0
  double noise = 0.1;       // random-walk probability
  double i_weight = 1.0;    // per observation occurrence
  double g_weight = 2.0;    // goal-establishment clauses
  double sparsity = 0.1;    // negative prior per decision variable
  double pair_threshold = 0.3;  // adjacent-pair frequency cutoff
  int max_arity = 4;        // reject actions with more parameters
};

// All injective type-compatible bindings of `sig` into the header's
// parameter list, lexicographic order.
std::vector<std::vector<int>> enumerate_bindings(const TypedSignature& sig,
                                                 const ActionHeader& header);

// Builds the instance for one plan. |states| must equal |plan| + 1.
MaxSatInstance encode_constraints(const std::vector<State>& states,
                                  const std::vector<GroundAction>& plan,
                                  const State& goal,
                                  const PropositionRegistry& psi,
                                  const std::vector<ActionHeader>& headers,
                                  const SatConfig& cfg = {});

struct Assignment {
  std::vector<bool> values;
  double soft_weight = 0;    // total satisfied soft weight
  int hard_violations = 0;   // always 0 on success
};

struct SolverError : std::runtime_error {
  std::vector<int> violated_hard;  // clause indices of the best attempt
  SolverError(const std::string& msg, std::vector<int> violated)
      : std::runtime_error(msg), violated_hard(std::move(violated)) {}
};

double eval_soft(const MaxSatInstance& inst, const std::vector<bool>& values);

// Best-of-restarts local search; deterministic given the seed. Throws
// SolverError when no hard-feasible assignment is found.
Assignment solve(const MaxSatInstance& inst, std::uint64_t seed,
                 const SatConfig& cfg = {});

// Decodes a hard-feasible assignment into schemas (one per header with
// variables); H1/H2 guarantee the STRIPS invariants.
Domain decode_assignment(const MaxSatInstance& inst, const Assignment& a,
                         const PropositionRegistry& psi);

Domain learn_one(const std::vector<State>& states,
                 const std::vector<GroundAction>& plan, const State& goal,
                 const PropositionRegistry& psi,
                 const std::vector<ActionHeader>& headers, std::uint64_t seed,
                 const SatConfig& cfg = {});

// Standard weighted-CNF text dump (hard weight = top); conjunction groups
// are Tseitin-encoded with auxiliary variables.
std::string to_wcnf(const MaxSatInstance& inst);

}  // namespace textplan
