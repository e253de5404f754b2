#include "textplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace textplan {

namespace {

struct GroundedPlan {
  std::vector<GroundedSets> steps;
};

GroundedPlan ground_plan(const Domain& domain, const std::vector<GroundAction>& plan) {
  GroundedPlan g;
  for (const auto& action : plan) {
    const ActionSchema* schema = domain.find_action(action.schema);
    if (!schema)
      throw std::invalid_argument("metrics: action " + action.schema +
                                  " not in the evaluated domain");
    g.steps.push_back(ground(*schema, action.args));
  }
  return g;
}

}  // namespace

MetricsReport error_rate(const Domain& domain, const std::vector<EvalInput>& inputs) {
  MetricsReport rep;
  for (const auto& input : inputs) {
    GroundedPlan g = ground_plan(domain, input.plan);
    PlanEval pe;
    pe.record_id = input.record_id;
    State established = input.initial;
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
      for (const auto& p : g.steps[i].pre) {
        ++pe.total;
        if (!established.contains(p)) ++pe.bad;
      }
      for (const auto& p : g.steps[i].add) established.insert(p);
    }
    rep.total_preconditions += pe.total;
    rep.unestablished += pe.bad;
    rep.per_plan_error.push_back(pe);
  }
  if (rep.total_preconditions == 0) {
    rep.error_degenerate = true;
    rep.error_rate = 0;
  } else {
    rep.error_rate =
        static_cast<double>(rep.unestablished) / rep.total_preconditions;
  }
  return rep;
}

MetricsReport redundancy_rate(const Domain& domain,
                              const std::vector<EvalInput>& inputs,
                              const EvalConfig& cfg) {
  MetricsReport rep;
  for (const auto& input : inputs) {
    GroundedPlan g = ground_plan(domain, input.plan);
    PlanEval pe;
    pe.record_id = input.record_id;
    // suffix-union of preconditions: consumed[i] = pres of steps > i
    std::vector<State> later(g.steps.size() + 1);
    for (int i = static_cast<int>(g.steps.size()) - 1; i >= 0; --i) {
      later[i] = later[i + 1];
      for (const auto& p : g.steps[i].pre) later[i].insert(p);
    }
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
      for (const auto& p : g.steps[i].add) {
        ++pe.total;
        bool useful = later[i + 1].contains(p) ||
                      (cfg.goal_credit && input.goal.contains(p));
        if (!useful) ++pe.bad;
      }
    }
    rep.total_adds += pe.total;
    rep.redundant_adds += pe.bad;
    rep.per_plan_redundancy.push_back(pe);
  }
  if (rep.total_adds == 0) {
    rep.redundancy_degenerate = true;
    rep.redundancy_rate = 0;
  } else {
    rep.redundancy_rate = static_cast<double>(rep.redundant_adds) / rep.total_adds;
  }
  return rep;
}

double rand_index(const std::vector<int>& predicted, const std::vector<int>& gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("rand_index: clusterings over different universes");
  const std::size_t n = predicted.size();
  if (n < 2) return 1.0;
  // contingency-table form of the pair counts
  std::map<int, long> pred_sizes, gold_sizes;
  std::map<std::pair<int, int>, long> cells;
  for (std::size_t i = 0; i < n; ++i) {
    ++pred_sizes[predicted[i]];
    ++gold_sizes[gold[i]];
    ++cells[{predicted[i], gold[i]}];
  }
  auto choose2 = [](long k) { return k * (k - 1) / 2; };
  long together_both = 0;
  for (const auto& [cell, count] : cells) together_both += choose2(count);
  long pred_pairs = 0, gold_pairs = 0;
  for (const auto& [c, k] : pred_sizes) pred_pairs += choose2(k);
  for (const auto& [c, k] : gold_sizes) gold_pairs += choose2(k);
  long total = choose2(static_cast<long>(n));
  long agreements =
      total + 2 * together_both - pred_pairs - gold_pairs;
  return static_cast<double>(agreements) / total;
}

// ------------------------------------------------------ reference oracles

double reference_error_rate(const Domain& domain,
                            const std::vector<EvalInput>& inputs) {
  long total = 0, bad = 0;
  for (const auto& input : inputs) {
    for (std::size_t i = 0; i < input.plan.size(); ++i) {
      const ActionSchema* schema = domain.find_action(input.plan[i].schema);
      if (!schema)
        throw std::invalid_argument("metrics: action " + input.plan[i].schema +
                                    " not in the evaluated domain");
      for (const auto& p : ground(*schema, input.plan[i].args).pre) {
        ++total;
        bool established = input.initial.contains(p);
        for (std::size_t j = 0; j < i && !established; ++j) {
          const ActionSchema* sj = domain.find_action(input.plan[j].schema);
          auto adds = ground(*sj, input.plan[j].args).add;
          established = std::find(adds.begin(), adds.end(), p) != adds.end();
        }
        if (!established) ++bad;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / total;
}

double reference_redundancy_rate(const Domain& domain,
                                 const std::vector<EvalInput>& inputs,
                                 const EvalConfig& cfg) {
  long total = 0, bad = 0;
  for (const auto& input : inputs) {
    for (std::size_t i = 0; i < input.plan.size(); ++i) {
      const ActionSchema* schema = domain.find_action(input.plan[i].schema);
      if (!schema)
        throw std::invalid_argument("metrics: action " + input.plan[i].schema +
                                    " not in the evaluated domain");
      for (const auto& p : ground(*schema, input.plan[i].args).add) {
        ++total;
        bool useful = cfg.goal_credit && input.goal.contains(p);
        for (std::size_t j = i + 1; j < input.plan.size() && !useful; ++j) {
          const ActionSchema* sj = domain.find_action(input.plan[j].schema);
          auto pres = ground(*sj, input.plan[j].args).pre;
          useful = std::find(pres.begin(), pres.end(), p) != pres.end();
        }
        if (!useful) ++bad;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / total;
}

double reference_rand_index(const std::vector<int>& predicted,
                            const std::vector<int>& gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("rand_index: clusterings over different universes");
  const std::size_t n = predicted.size();
  if (n < 2) return 1.0;
  long agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      bool same_pred = predicted[i] == predicted[j];
      bool same_gold = gold[i] == gold[j];
      if (same_pred == same_gold) ++agree;
    }
  return static_cast<double>(agree) / total;
}

MetricsReport evaluate(const Domain& domain, const std::vector<EvalInput>& inputs,
                       const std::vector<int>& predicted_clusters,
                       const std::vector<int>& gold_clusters,
                       const EvalConfig& cfg) {
  MetricsReport err = error_rate(domain, inputs);
  MetricsReport red = redundancy_rate(domain, inputs, cfg);
  MetricsReport rep = err;
  rep.redundancy_rate = red.redundancy_rate;
  rep.total_adds = red.total_adds;
  rep.redundant_adds = red.redundant_adds;
  rep.redundancy_degenerate = red.redundancy_degenerate;
  rep.per_plan_redundancy = red.per_plan_redundancy;
  if (!predicted_clusters.empty()) {
    rep.rand_index = rand_index(predicted_clusters, gold_clusters);
    rep.pair_total =
        static_cast<long>(predicted_clusters.size()) *
        (static_cast<long>(predicted_clusters.size()) - 1) / 2;
    rep.pair_agreements = std::lround(rep.rand_index * rep.pair_total);
  }
  return rep;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["R_e"] = error_rate;
  j["R_r"] = redundancy_rate;
  j["R_i"] = rand_index;
  j["counts"] = {{"total_preconditions", total_preconditions},
                 {"unestablished", unestablished},
                 {"total_adds", total_adds},
                 {"redundant_adds", redundant_adds},
                 {"pair_agreements", pair_agreements},
                 {"pair_total", pair_total}};
  j["degenerate"] = {{"error", error_degenerate},
                     {"redundancy", redundancy_degenerate}};
  return j.dump(2) + "\n";
}

std::string MetricsReport::table() const {
  std::ostringstream os;
  os << "metric        value   detail\n";
  os << "R_e (error)   " << error_rate << "   " << unestablished << "/"
     << total_preconditions << " preconditions unestablished"
     << (error_degenerate ? " [degenerate]" : "") << "\n";
  os << "R_r (redund)  " << redundancy_rate << "   " << redundant_adds << "/"
     << total_adds << " adds unconsumed"
     << (redundancy_degenerate ? " [degenerate]" : "") << "\n";
  os << "R_i (rand)    " << rand_index << "   " << pair_agreements << "/"
     << pair_total << " pairs agree\n";
  return os.str();
}

}  // namespace textplan
