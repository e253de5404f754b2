// Evaluation: error rate (unestablished preconditions), redundancy rate
// (unconsumed add effects), and Rand index over sentence clusterings, with
// naive reference implementations kept alongside as oracles.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "textplan/corpus.hpp"

namespace textplan {

struct PlanEval {
  int record_id = 0;
  long total = 0;    // preconditions or add effects, depending on metric
  long bad = 0;      // unestablished or redundant
};

struct MetricsReport {
  double error_rate = 0;
  double redundancy_rate = 0;
  double rand_index = 0;
  long total_preconditions = 0;
  long unestablished = 0;
  long total_adds = 0;
  long redundant_adds = 0;
  long pair_agreements = 0;
  long pair_total = 0;
  bool error_degenerate = false;       // zero denominator, rate reported as 0
  bool redundancy_degenerate = false;
  std::vector<PlanEval> per_plan_error;
  std::vector<PlanEval> per_plan_redundancy;

  std::string to_json() const;
  std::string table() const;
};

struct EvalConfig {
  bool goal_credit = true;  // adds establishing a goal proposition count as useful
};

// One evaluated task: its plan plus whatever states the evaluator is
// entitled to (extracted by a learner, or gold in oracle mode).
struct EvalInput {
  int record_id = 0;
  std::vector<GroundAction> plan;
  State initial;
  State goal;
};

// Precondition p of step i is established iff p ∈ initial or p is an add
// effect of some step j < i.
MetricsReport error_rate(const Domain& domain, const std::vector<EvalInput>& inputs);

// Add effect p of step i is useful iff p ∈ pre of some step j > i, or (with
// goal credit) p ∈ goal.
MetricsReport redundancy_rate(const Domain& domain,
                              const std::vector<EvalInput>& inputs,
                              const EvalConfig& cfg = {});

// Pairwise agreement between two clusterings of the same items.
double rand_index(const std::vector<int>& predicted, const std::vector<int>& gold);

// Naive double-loop references, used as oracles by the test suites.
double reference_error_rate(const Domain& domain,
                            const std::vector<EvalInput>& inputs);
double reference_redundancy_rate(const Domain& domain,
                                 const std::vector<EvalInput>& inputs,
                                 const EvalConfig& cfg = {});
double reference_rand_index(const std::vector<int>& predicted,
                            const std::vector<int>& gold);

// Bundles all three metrics; cluster vectors may be empty (R_i reported 0).
MetricsReport evaluate(const Domain& domain, const std::vector<EvalInput>& inputs,
                       const std::vector<int>& predicted_clusters,
                       const std::vector<int>& gold_clusters,
                       const EvalConfig& cfg = {});

}  // namespace textplan
