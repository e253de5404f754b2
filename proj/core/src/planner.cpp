#include "textplan/planner.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "textplan/rng.hpp"

namespace textplan {

std::vector<GroundAction> ground_all(const Domain& domain,
                                     const std::vector<ObjectRef>& objects) {
  std::map<TypeName, std::vector<ObjectRef>> by_type;
  for (const auto& o : objects) by_type[o.type].push_back(o);

  std::vector<GroundAction> out;
  for (const auto& schema : domain.actions) {
    std::vector<ObjectRef> args(schema.params.size());
    // depth-first enumeration over typed argument tuples
    auto rec = [&](auto&& self, std::size_t pos) -> void {
      if (pos == schema.params.size()) {
        out.push_back(GroundAction{schema.name, args});
        return;
      }
      auto it = by_type.find(schema.params[pos].type);
      if (it == by_type.end()) return;
      for (const auto& o : it->second) {
        args[pos] = o;
        self(self, pos + 1);
      }
    };
    rec(rec, 0);
  }
  return out;
}

namespace {

int goal_count(const State& s, const std::vector<Proposition>& goal) {
  int missing = 0;
  for (const auto& g : goal)
    if (!s.contains(g)) ++missing;
  return missing;
}

struct Node {
  int h;
  std::uint64_t tie;
  std::size_t order;
  std::size_t idx;  // into node store
  bool operator>(const Node& o) const {
    return std::tie(h, tie, order) > std::tie(o.h, o.tie, o.order);
  }
};

}  // namespace

PlanResult solve(const Domain& domain, const Problem& problem, std::uint64_t seed,
                 std::size_t node_budget) {
  domain.validate();
  const std::vector<GroundAction> actions = ground_all(domain, problem.objects);
  std::vector<GroundedSets> grounded;
  grounded.reserve(actions.size());
  for (const auto& a : actions)
    grounded.push_back(ground(*domain.find_action(a.schema), a.args));
  auto rng = make_rng(seed, 0x706c616eULL);

  struct Stored {
    State state;
    std::size_t parent;
    int action;  // index into `actions`, -1 for root
  };
  std::vector<Stored> store;
  std::set<State> closed;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

  store.push_back(Stored{problem.init, 0, -1});
  open.push(Node{goal_count(problem.init, problem.goal), rng(), 0, 0});
  std::size_t expanded = 0;

  auto reconstruct = [&](std::size_t idx) {
    PlanResult res;
    res.expanded = expanded;
    std::vector<std::size_t> chain;
    for (std::size_t cur = idx; store[cur].action >= 0; cur = store[cur].parent)
      chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    res.trace.push_back(problem.init);
    for (std::size_t node : chain) {
      res.plan.push_back(actions[store[node].action]);
      res.trace.push_back(store[node].state);
    }
    return res;
  };

  while (!open.empty()) {
    Node top = open.top();
    open.pop();
    const State state = store[top.idx].state;  // copy: store may reallocate
    if (top.h == 0) return reconstruct(top.idx);
    if (!closed.insert(state).second) continue;
    if (++expanded > node_budget)
      throw PlannerError("planner: node budget " + std::to_string(node_budget) +
                         " exhausted on problem " + problem.name);
    for (std::size_t ai = 0; ai < actions.size(); ++ai) {
      const GroundedSets& g = grounded[ai];
      bool applicable = true;
      for (const auto& p : g.pre)
        if (!state.contains(p)) {
          applicable = false;
          break;
        }
      if (!applicable) continue;
      State next = state;
      for (const auto& p : g.del) next.erase(p);
      for (const auto& p : g.add) next.insert(p);
      if (closed.count(next)) continue;
      store.push_back(Stored{std::move(next), top.idx, static_cast<int>(ai)});
      open.push(Node{goal_count(store.back().state, problem.goal), rng(),
                     store.size(), store.size() - 1});
    }
  }
  throw PlannerError("planner: search space exhausted on problem " + problem.name);
}

}  // namespace textplan
