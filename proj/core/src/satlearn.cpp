#include "textplan/satlearn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "textplan/rng.hpp"

namespace textplan {

Clause Clause::unit(Lit l, double w) {
  Clause c;
  c.weight = w;
  c.groups = {{l}};
  return c;
}

Clause Clause::disj(std::vector<Lit> lits, double w, bool hard) {
  Clause c;
  c.weight = w;
  c.hard = hard;
  for (const Lit& l : lits) c.groups.push_back({l});
  return c;
}

int MaxSatInstance::var_index(int action, Slot slot, int topical,
                              const std::vector<int>& binding) const {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const DecisionVar& v = vars[i];
    if (v.action == action && v.slot == slot && v.topical == topical &&
        v.binding == binding)
      return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::vector<int>> enumerate_bindings(const TypedSignature& sig,
                                                 const ActionHeader& header) {
  std::vector<std::vector<int>> out;
  std::vector<int> binding(sig.types.size());
  std::vector<bool> used(header.param_types.size(), false);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == sig.types.size()) {
      out.push_back(binding);
      return;
    }
    for (std::size_t p = 0; p < header.param_types.size(); ++p) {
      if (used[p] || header.param_types[p] != sig.types[pos]) continue;
      used[p] = true;
      binding[pos] = static_cast<int>(p);
      self(self, pos + 1);
      used[p] = false;
    }
  };
  rec(rec, 0);
  return out;
}

namespace {

Proposition ground_binding(const PropositionRegistry& psi, int topical,
                           const std::vector<int>& binding,
                           const std::vector<ObjectRef>& args) {
  Proposition p;
  p.predicate = psi.at(topical).predicate;
  for (int b : binding) p.params.push_back(args.at(b));
  return p;
}

}  // namespace

MaxSatInstance encode_constraints(const std::vector<State>& states,
                                  const std::vector<GroundAction>& plan,
                                  const State& goal,
                                  const PropositionRegistry& psi,
                                  const std::vector<ActionHeader>& headers,
                                  const SatConfig& cfg) {
  if (states.size() != plan.size() + 1)
    throw std::invalid_argument("encode_constraints: |states| = " +
                                std::to_string(states.size()) + ", need |plan|+1 = " +
                                std::to_string(plan.size() + 1));

  MaxSatInstance inst;
  // headers for actions that occur in the plan, in order of first use
  std::map<std::string, int> action_idx;
  for (const auto& step : plan) {
    if (action_idx.count(step.schema)) continue;
    auto it = std::find_if(headers.begin(), headers.end(),
                           [&](const ActionHeader& h) { return h.name == step.schema; });
    if (it == headers.end())
      throw std::invalid_argument("encode_constraints: no header for action " +
                                  step.schema);
    if (static_cast<int>(it->param_types.size()) > cfg.max_arity)
      throw std::invalid_argument("encode_constraints: action " + step.schema +
                                  " has arity " + std::to_string(it->param_types.size()) +
                                  " > max_arity " + std::to_string(cfg.max_arity));
    action_idx[step.schema] = static_cast<int>(inst.headers.size());
    inst.headers.push_back(*it);
  }

  // candidate variables: (action, slot, topical, binding), type-compatible only
  std::map<std::tuple<int, int, int, std::vector<int>>, int> var_idx;
  for (std::size_t a = 0; a < inst.headers.size(); ++a) {
    for (std::size_t t = 0; t < psi.size(); ++t) {
      for (auto& binding : enumerate_bindings(psi.at(t).signature, inst.headers[a])) {
        for (Slot slot : {Slot::kPre, Slot::kAdd, Slot::kDel}) {
          var_idx[{static_cast<int>(a), static_cast<int>(slot), static_cast<int>(t),
                   binding}] = static_cast<int>(inst.vars.size());
          inst.vars.push_back(DecisionVar{static_cast<int>(a), slot,
                                          static_cast<int>(t), binding});
        }
      }
    }
  }
  auto vid = [&](int a, Slot s, int t, const std::vector<int>& b) {
    return var_idx.at({a, static_cast<int>(s), t, b});
  };

  // H1/H2: structural STRIPS constraints
  for (std::size_t i = 0; i < inst.vars.size(); ++i) {
    const DecisionVar& v = inst.vars[i];
    if (v.slot != Slot::kPre) continue;
    int add_i = vid(v.action, Slot::kAdd, v.topical, v.binding);
    int del_i = vid(v.action, Slot::kDel, v.topical, v.binding);
    inst.clauses.push_back(Clause::disj(
        {Lit{add_i, true}, Lit{static_cast<int>(i), true}}, 0, /*hard=*/true));
    inst.clauses.push_back(Clause::disj(
        {Lit{del_i, true}, Lit{static_cast<int>(i), false}}, 0, /*hard=*/true));
  }

  // I1/I2/I3: observation evidence, weight = occurrence count
  std::map<int, double> support;  // var -> accumulated weight
  for (std::size_t step = 0; step < plan.size(); ++step) {
    int a = action_idx.at(plan[step].schema);
    const State& before = states[step];
    const State& after = states[step + 1];
    for (std::size_t t = 0; t < psi.size(); ++t) {
      for (auto& binding : enumerate_bindings(psi.at(t).signature, inst.headers[a])) {
        Proposition p =
            ground_binding(psi, static_cast<int>(t), binding, plan[step].args);
        bool in_before = before.contains(p);
        bool in_after = after.contains(p);
        if (in_before)
          support[vid(a, Slot::kPre, static_cast<int>(t), binding)] += cfg.i_weight;
        if (in_after && !in_before)
          support[vid(a, Slot::kAdd, static_cast<int>(t), binding)] += cfg.i_weight;
        if (in_before && !in_after)
          support[vid(a, Slot::kDel, static_cast<int>(t), binding)] += cfg.i_weight;
      }
    }
  }
  for (const auto& [var, w] : support)
    inst.clauses.push_back(Clause::unit(Lit{var, false}, w));

  // P1: adjacent actions sharing an object; some added proposition of the
  // first is a precondition of the second.
  std::map<std::pair<std::string, std::string>, int> pair_count;
  int adjacent = std::max<int>(0, static_cast<int>(plan.size()) - 1);
  for (int i = 0; i + 1 < static_cast<int>(plan.size()); ++i) {
    std::set<std::string> left;
    for (const auto& o : plan[i].args) left.insert(o.name);
    bool shares = std::any_of(plan[i + 1].args.begin(), plan[i + 1].args.end(),
                              [&](const ObjectRef& o) { return left.count(o.name); });
    if (shares) ++pair_count[{plan[i].schema, plan[i + 1].schema}];
  }
  for (int i = 0; i + 1 < static_cast<int>(plan.size()); ++i) {
    auto key = std::make_pair(plan[i].schema, plan[i + 1].schema);
    auto it = pair_count.find(key);
    if (it == pair_count.end()) continue;
    double freq = static_cast<double>(it->second) / std::max(adjacent, 1);
    if (freq < cfg.pair_threshold) continue;
    int ai = action_idx.at(plan[i].schema);
    int aj = action_idx.at(plan[i + 1].schema);
    Clause c;
    c.weight = freq;
    for (std::size_t t = 0; t < psi.size(); ++t) {
      for (auto& bi : enumerate_bindings(psi.at(t).signature, inst.headers[ai])) {
        Proposition pi = ground_binding(psi, static_cast<int>(t), bi, plan[i].args);
        for (auto& bj : enumerate_bindings(psi.at(t).signature, inst.headers[aj])) {
          Proposition pj =
              ground_binding(psi, static_cast<int>(t), bj, plan[i + 1].args);
          if (pi != pj) continue;
          c.groups.push_back({Lit{vid(ai, Slot::kAdd, static_cast<int>(t), bi), false},
                              Lit{vid(aj, Slot::kPre, static_cast<int>(t), bj), false}});
        }
      }
    }
    if (!c.groups.empty()) inst.clauses.push_back(std::move(c));
  }

  // G1: every goal proposition is added by some type-compatible step
  for (const auto& g : goal.props) {
    std::vector<Lit> lits;
    for (std::size_t step = 0; step < plan.size(); ++step) {
      int a = action_idx.at(plan[step].schema);
      for (std::size_t t = 0; t < psi.size(); ++t) {
        if (psi.at(t).predicate != g.predicate) continue;
        for (auto& binding : enumerate_bindings(psi.at(t).signature, inst.headers[a])) {
          if (ground_binding(psi, static_cast<int>(t), binding, plan[step].args) != g)
            continue;
          Lit lit{vid(a, Slot::kAdd, static_cast<int>(t), binding), false};
          bool dup = std::any_of(lits.begin(), lits.end(),
                                 [&](const Lit& l) { return l.var == lit.var; });
          if (!dup) lits.push_back(lit);
        }
      }
    }
    if (!lits.empty())
      inst.clauses.push_back(Clause::disj(std::move(lits), cfg.g_weight));
  }

  // N1: sparsity prior
  for (std::size_t v = 0; v < inst.vars.size(); ++v)
    inst.clauses.push_back(
        Clause::unit(Lit{static_cast<int>(v), true}, cfg.sparsity));

  return inst;
}

// ------------------------------------------------------------------ solver

namespace {

// Set with O(1) insert/erase/uniform-pick over clause indices.
struct IndexedSet {
  std::vector<int> items;
  std::vector<int> pos;  // pos[c] = index in items, or -1

  void init(std::size_t n) {
    items.clear();
    pos.assign(n, -1);
  }
  void insert(int c) {
    if (pos[c] >= 0) return;
    pos[c] = static_cast<int>(items.size());
    items.push_back(c);
  }
  void erase(int c) {
    int p = pos[c];
    if (p < 0) return;
    items[p] = items.back();
    pos[items[p]] = p;
    items.pop_back();
    pos[c] = -1;
  }
  bool empty() const { return items.empty(); }
  int pick(std::mt19937_64& rng) const { return items[rng() % items.size()]; }
};

struct Evaluator {
  const MaxSatInstance& inst;
  std::vector<bool> values;
  // per clause, per group: count of false literals
  std::vector<std::vector<int>> false_counts;
  std::vector<int> sat_groups;  // per clause
  double soft = 0;
  int hard_violations = 0;
  IndexedSet unsat_hard, unsat_soft;
  // var -> (clause, group, literal negated)
  std::vector<std::vector<std::tuple<int, int, bool>>> occurrences;

  explicit Evaluator(const MaxSatInstance& instance) : inst(instance) {
    occurrences.resize(inst.vars.size());
    false_counts.resize(inst.clauses.size());
    sat_groups.assign(inst.clauses.size(), 0);
    for (std::size_t c = 0; c < inst.clauses.size(); ++c) {
      false_counts[c].resize(inst.clauses[c].groups.size());
      for (std::size_t g = 0; g < inst.clauses[c].groups.size(); ++g)
        for (const Lit& l : inst.clauses[c].groups[g])
          occurrences[l.var].push_back({static_cast<int>(c), static_cast<int>(g),
                                        l.negated});
    }
  }

  void reset(std::vector<bool> assignment) {
    values = std::move(assignment);
    soft = 0;
    hard_violations = 0;
    unsat_hard.init(inst.clauses.size());
    unsat_soft.init(inst.clauses.size());
    for (std::size_t c = 0; c < inst.clauses.size(); ++c) {
      const Clause& clause = inst.clauses[c];
      int sat = 0;
      for (std::size_t g = 0; g < clause.groups.size(); ++g) {
        int fc = 0;
        for (const Lit& l : clause.groups[g])
          if (values[l.var] == l.negated) ++fc;
        false_counts[c][g] = fc;
        if (fc == 0) ++sat;
      }
      sat_groups[c] = sat;
      if (sat == 0) {
        if (clause.hard) {
          ++hard_violations;
          unsat_hard.insert(static_cast<int>(c));
        } else {
          unsat_soft.insert(static_cast<int>(c));
        }
      } else if (!clause.hard) {
        soft += clause.weight;
      }
    }
  }

  void flip(int var) {
    values[var] = !values[var];
    for (const auto& [c, g, negated] : occurrences[var]) {
      const Clause& clause = inst.clauses[c];
      bool now_false = values[var] == negated;
      int before_sat = sat_groups[c];
      if (now_false) {
        if (++false_counts[c][g] == 1) --sat_groups[c];
      } else {
        if (--false_counts[c][g] == 0) ++sat_groups[c];
      }
      if (before_sat > 0 && sat_groups[c] == 0) {
        if (clause.hard) {
          ++hard_violations;
          unsat_hard.insert(c);
        } else {
          soft -= clause.weight;
          unsat_soft.insert(c);
        }
      } else if (before_sat == 0 && sat_groups[c] > 0) {
        if (clause.hard) {
          --hard_violations;
          unsat_hard.erase(c);
        } else {
          soft += clause.weight;
          unsat_soft.erase(c);
        }
      }
    }
  }

  // lexicographic objective: fewer hard violations, then more soft weight
  std::pair<int, double> objective() const { return {hard_violations, -soft}; }
};

}  // namespace

double eval_soft(const MaxSatInstance& inst, const std::vector<bool>& values) {
  double soft = 0;
  for (const auto& clause : inst.clauses) {
    if (clause.hard) continue;
    for (const auto& group : clause.groups) {
      bool all = true;
      for (const Lit& l : group)
        if (values[l.var] == l.negated) {
          all = false;
          break;
        }
      if (all) {
        soft += clause.weight;
        break;
      }
    }
  }
  return soft;
}

Assignment solve(const MaxSatInstance& inst, std::uint64_t seed,
                 const SatConfig& cfg) {
  const std::size_t n = inst.vars.size();
  Evaluator ev(inst);
  auto rng = make_rng(seed, 0x736f6c76ULL);

  std::vector<bool> best;
  int best_hard = -1;
  double best_soft = 0;
  bool fully_satisfied = false;

  const int flips = cfg.flips > 0 ? cfg.flips
                                  : std::max<int>(5000, 200 * static_cast<int>(n));
  for (int restart = 0; restart < std::max(1, cfg.restarts) && !fully_satisfied;
       ++restart) {
    std::vector<bool> assignment(n, false);
    if (restart > 0)  // restart 0 starts all-false, which satisfies H1/H2
      for (std::size_t i = 0; i < n; ++i) assignment[i] = rng() & 1;
    ev.reset(std::move(assignment));

    auto consider_best = [&]() {
      if (best_hard < 0 || std::make_pair(ev.hard_violations, -ev.soft) <
                               std::make_pair(best_hard, -best_soft)) {
        best = ev.values;
        best_hard = ev.hard_violations;
        best_soft = ev.soft;
      }
    };
    consider_best();

    for (int step = 0; step < flips && n > 0; ++step) {
      if (ev.unsat_hard.empty() && ev.unsat_soft.empty()) {
        fully_satisfied = true;  // every clause satisfied: globally optimal
        break;
      }
      const Clause& chosen =
          inst.clauses[!ev.unsat_hard.empty() ? ev.unsat_hard.pick(rng)
                                              : ev.unsat_soft.pick(rng)];

      // candidate flips: variables occurring in the clause
      std::vector<int> candidates;
      for (const auto& group : chosen.groups)
        for (const Lit& l : group)
          if (std::find(candidates.begin(), candidates.end(), l.var) ==
              candidates.end())
            candidates.push_back(l.var);
      if (candidates.empty()) continue;

      int pick;
      if (std::uniform_real_distribution<double>(0, 1)(rng) < cfg.noise) {
        pick = candidates[rng() % candidates.size()];
      } else {
        pick = candidates[0];
        std::pair<int, double> best_obj{0, 0};
        bool first = true;
        std::vector<int> ties;
        for (int cand : candidates) {
          ev.flip(cand);
          auto obj = ev.objective();
          ev.flip(cand);
          if (first || obj < best_obj) {
            best_obj = obj;
            ties = {cand};
            first = false;
          } else if (obj == best_obj) {
            ties.push_back(cand);
          }
        }
        pick = ties[rng() % ties.size()];
      }
      ev.flip(pick);
      consider_best();
    }
  }

  if (best_hard != 0) {
    ev.reset(best);
    std::vector<int> violated;
    for (std::size_t c = 0; c < inst.clauses.size(); ++c)
      if (inst.clauses[c].hard && ev.sat_groups[c] == 0)
        violated.push_back(static_cast<int>(c));
    throw SolverError("solve: no hard-feasible assignment within budget (" +
                          std::to_string(violated.size()) + " hard clauses violated)",
                      violated);
  }
  Assignment out;
  out.values = best;
  out.soft_weight = best_soft;
  out.hard_violations = 0;
  return out;
}

Domain decode_assignment(const MaxSatInstance& inst, const Assignment& a,
                         const PropositionRegistry& psi) {
  Domain d;
  d.name = "learned";
  std::set<TypeName> types;
  for (const auto& tp : psi.entries())
    for (const auto& t : tp.signature.types) types.insert(t);
  std::vector<ActionSchema> schemas;
  for (const auto& h : inst.headers) {
    ActionSchema s;
    s.name = h.name;
    for (std::size_t i = 0; i < h.param_types.size(); ++i) {
      s.params.push_back(Variable{"x" + std::to_string(i), h.param_types[i]});
      types.insert(h.param_types[i]);
    }
    schemas.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < inst.vars.size(); ++i) {
    if (!a.values[i]) continue;
    const DecisionVar& v = inst.vars[i];
    LiftedAtom atom{psi.at(v.topical).predicate, v.binding};
    auto& s = schemas[v.action];
    if (v.slot == Slot::kPre)
      s.pre.push_back(atom);
    else if (v.slot == Slot::kAdd)
      s.add.push_back(atom);
    else
      s.del.push_back(atom);
  }
  d.types.assign(types.begin(), types.end());
  d.predicates = psi.entries();
  d.actions = std::move(schemas);
  d.normalize();
  d.validate();
  return d;
}

Domain learn_one(const std::vector<State>& states,
                 const std::vector<GroundAction>& plan, const State& goal,
                 const PropositionRegistry& psi,
                 const std::vector<ActionHeader>& headers, std::uint64_t seed,
                 const SatConfig& cfg) {
  MaxSatInstance inst = encode_constraints(states, plan, goal, psi, headers, cfg);
  Assignment a = solve(inst, seed, cfg);
  return decode_assignment(inst, a, psi);
}

std::string to_wcnf(const MaxSatInstance& inst) {
  // Conjunction groups get auxiliary selector variables: aux -> literal for
  // each literal in the group, plus a soft clause over the selectors.
  std::ostringstream body;
  int next_var = static_cast<int>(inst.vars.size());
  double soft_total = 0;
  for (const auto& c : inst.clauses)
    if (!c.hard) soft_total += c.weight;
  const long long top = static_cast<long long>(std::ceil(soft_total)) + 1;

  long long n_clauses = 0;
  auto emit = [&](long long w, const std::vector<int>& lits) {
    body << w;
    for (int l : lits) body << ' ' << l;
    body << " 0\n";
    ++n_clauses;
  };
  auto dimacs = [](const Lit& l) { return l.negated ? -(l.var + 1) : l.var + 1; };

  for (const auto& c : inst.clauses) {
    // integer weights: scale by 1000 to keep fractional pair frequencies
    long long w = c.hard ? top : std::max<long long>(1, std::llround(c.weight * 1000));
    bool plain = std::all_of(c.groups.begin(), c.groups.end(),
                             [](const auto& g) { return g.size() == 1; });
    if (plain) {
      std::vector<int> lits;
      for (const auto& g : c.groups) lits.push_back(dimacs(g[0]));
      emit(w, lits);
      continue;
    }
    std::vector<int> selectors;
    for (const auto& g : c.groups) {
      if (g.size() == 1) {
        selectors.push_back(dimacs(g[0]));
        continue;
      }
      int aux = ++next_var;  // 1-based dimacs index
      selectors.push_back(aux);
      for (const Lit& l : g) emit(top, {-aux, dimacs(l)});
    }
    emit(w, selectors);
  }
  std::ostringstream os;
  os << "c textplan weighted MAX-SAT instance\n";
  os << "p wcnf " << next_var << ' ' << n_clauses << ' ' << top << '\n';
  os << body.str();
  return os.str();
}

}  // namespace textplan
