// STRIPS data model: typed objects, propositions and their topical lifts,
// action schemas, domains, grounding and state progression.
#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace textplan {

using TypeName = std::string;

struct ObjectRef {
  std::string name;
  TypeName type;
  auto operator<=>(const ObjectRef&) const = default;
};

// Ordered list of parameter types; order is significant.
struct TypedSignature {
  std::vector<TypeName> types;
  auto operator<=>(const TypedSignature&) const = default;
  std::size_t arity() const { return types.size(); }
};

// Lifted atom <predicate, parameter types>: the cluster label for all
// groundings that agree on predicate and type order.
struct TopicalProposition {
  std::string predicate;
  TypedSignature signature;
  auto operator<=>(const TopicalProposition&) const = default;
  std::string str() const;
};

// Ground atom <predicate, objects>.
struct Proposition {
  std::string predicate;
  std::vector<ObjectRef> params;
  auto operator<=>(const Proposition&) const = default;
  std::string str() const;
};

TopicalProposition topical_of(const Proposition& p);

// Set of ground propositions.
struct State {
  std::set<Proposition> props;

  bool contains(const Proposition& p) const { return props.count(p) > 0; }
  void insert(const Proposition& p) { props.insert(p); }
  void erase(const Proposition& p) { props.erase(p); }
  std::size_t size() const { return props.size(); }
  bool empty() const { return props.empty(); }
  bool superset_of(const State& other) const;
  auto operator<=>(const State&) const = default;
  std::string str() const;
};

// Typed schema variable, e.g. ?x - block.
struct Variable {
  std::string name;
  TypeName type;
  auto operator<=>(const Variable&) const = default;
};

// Atom over schema parameters; params are indices into the schema's
// parameter list.
struct LiftedAtom {
  std::string predicate;
  std::vector<int> params;
  auto operator<=>(const LiftedAtom&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<Variable> params;
  std::vector<LiftedAtom> pre;
  std::vector<LiftedAtom> add;
  std::vector<LiftedAtom> del;

  // Throws std::invalid_argument unless add and pre are disjoint, del is a
  // subset of pre, atom parameter indices are in range, and atom lists are
  // duplicate-free.
  void validate() const;

  TopicalProposition topical(const LiftedAtom& atom) const;
  std::vector<TopicalProposition> topical_pre() const;
  std::vector<TopicalProposition> topical_add() const;
  std::vector<TopicalProposition> topical_del() const;

  // Sorts pre/add/del and drops duplicates; normal form used by the
  // emitter and by equality checks.
  void normalize();

  auto operator<=>(const ActionSchema&) const = default;
};

struct Domain {
  std::string name;
  std::vector<TypeName> types;                  // sorted unique
  std::vector<TopicalProposition> predicates;   // sorted unique
  std::vector<ActionSchema> actions;            // declaration order

  const ActionSchema* find_action(const std::string& name) const;
  // Cross-reference check: action names unique, atom predicates and types
  // declared, schema invariants hold.
  void validate() const;
  void normalize();
  auto operator<=>(const Domain&) const = default;
};

struct GroundAction {
  std::string schema;
  std::vector<ObjectRef> args;
  auto operator<=>(const GroundAction&) const = default;
  std::string str() const;
};

struct GroundedSets {
  std::vector<Proposition> pre;
  std::vector<Proposition> add;
  std::vector<Proposition> del;
};

// Substitutes args for schema parameters in pre/add/del. Throws
// std::invalid_argument on arity or type mismatch, naming the schema and
// the offending position.
GroundedSets ground(const ActionSchema& schema, const std::vector<ObjectRef>& args);

// STRIPS progression: (state \ del) ∪ add. In strict mode a missing
// precondition is an error naming the missing propositions; otherwise the
// effects are force-applied.
State apply(const State& state, const GroundAction& action, const Domain& domain,
            bool strict = true);

// Name + parameter types of an action model whose pre/eff are unknown:
// what the learners are given up front.
struct ActionHeader {
  std::string name;
  std::vector<TypeName> param_types;
  auto operator<=>(const ActionHeader&) const = default;
};

std::vector<ActionHeader> headers_of(const Domain& d);

// One observation unit: texts around an executed plan.
using Text = std::vector<std::string>;  // sentences

struct TaskRecord {
  Text init_text;
  Text goal_text;
  std::vector<Text> texts;  // |texts| = |plan| + 1, texts[0] == init_text
  std::vector<GroundAction> plan;

  void validate() const;
};

// Ordered, duplicate-free set of topical propositions with stable indices.
class PropositionRegistry {
 public:
  // Returns the index of the entry, inserting it if new.
  int insert(const TopicalProposition& tp);
  // Index of an existing entry, or -1.
  int find(const TopicalProposition& tp) const;
  bool contains(const TopicalProposition& tp) const { return find(tp) >= 0; }
  // Indices of entries whose predicate equals `word`, in insertion order.
  std::vector<int> entries_with_predicate(const std::string& word) const;

  const TopicalProposition& at(int idx) const { return entries_.at(idx); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<TopicalProposition>& entries() const { return entries_; }
  bool operator==(const PropositionRegistry&) const = default;

 private:
  std::vector<TopicalProposition> entries_;
  std::map<TopicalProposition, int> index_;
};

}  // namespace textplan
