#include "textplan/strips.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace textplan {

std::string TopicalProposition::str() const {
  std::ostringstream os;
  os << '(' << predicate;
  for (std::size_t i = 0; i < signature.types.size(); ++i)
    os << " ?" << i << '-' << signature.types[i];
  os << ')';
  return os.str();
}

std::string Proposition::str() const {
  std::ostringstream os;
  os << '(' << predicate;
  for (const auto& o : params) os << ' ' << o.name;
  os << ')';
  return os.str();
}

TopicalProposition topical_of(const Proposition& p) {
  TypedSignature sig;
  sig.types.reserve(p.params.size());
  for (const auto& o : p.params) sig.types.push_back(o.type);
  return TopicalProposition{p.predicate, std::move(sig)};
}

bool State::superset_of(const State& other) const {
  return std::includes(props.begin(), props.end(), other.props.begin(),
                       other.props.end());
}

std::string State::str() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& p : props) {
    if (!first) os << ", ";
    os << p.str();
    first = false;
  }
  os << '}';
  return os.str();
}

std::string GroundAction::str() const {
  std::ostringstream os;
  os << schema << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    os << args[i].name;
  }
  os << ')';
  return os.str();
}

namespace {

void check_atoms(const ActionSchema& s, const std::vector<LiftedAtom>& atoms,
                 const char* slot) {
  for (const auto& a : atoms) {
    for (int idx : a.params) {
      if (idx < 0 || idx >= static_cast<int>(s.params.size()))
        throw std::invalid_argument("schema " + s.name + ": " + slot + " atom (" +
                                    a.predicate + ") references parameter " +
                                    std::to_string(idx) + " out of range");
    }
  }
  auto sorted = atoms;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("schema " + s.name + ": duplicate atom in " + slot);
}

bool atom_in(const std::vector<LiftedAtom>& atoms, const LiftedAtom& a) {
  return std::find(atoms.begin(), atoms.end(), a) != atoms.end();
}

}  // namespace

void ActionSchema::validate() const {
  check_atoms(*this, pre, "pre");
  check_atoms(*this, add, "add");
  check_atoms(*this, del, "del");
  for (const auto& a : add)
    if (atom_in(pre, a))
      throw std::invalid_argument("schema " + name + ": add ∩ pre not empty at " +
                                  a.predicate);
  for (const auto& d : del)
    if (!atom_in(pre, d))
      throw std::invalid_argument("schema " + name + ": del atom " + d.predicate +
                                  " not in pre");
}

TopicalProposition ActionSchema::topical(const LiftedAtom& atom) const {
  TypedSignature sig;
  sig.types.reserve(atom.params.size());
  for (int idx : atom.params) sig.types.push_back(params.at(idx).type);
  return TopicalProposition{atom.predicate, std::move(sig)};
}

std::vector<TopicalProposition> ActionSchema::topical_pre() const {
  std::vector<TopicalProposition> out;
  for (const auto& a : pre) out.push_back(topical(a));
  return out;
}
std::vector<TopicalProposition> ActionSchema::topical_add() const {
  std::vector<TopicalProposition> out;
  for (const auto& a : add) out.push_back(topical(a));
  return out;
}
std::vector<TopicalProposition> ActionSchema::topical_del() const {
  std::vector<TopicalProposition> out;
  for (const auto& a : del) out.push_back(topical(a));
  return out;
}

void ActionSchema::normalize() {
  auto norm = [](std::vector<LiftedAtom>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  norm(pre);
  norm(add);
  norm(del);
}

const ActionSchema* Domain::find_action(const std::string& n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

void Domain::validate() const {
  std::unordered_set<std::string> type_set(types.begin(), types.end());
  std::unordered_set<std::string> names;
  std::set<TopicalProposition> declared(predicates.begin(), predicates.end());
  for (const auto& a : actions) {
    if (!names.insert(a.name).second)
      throw std::invalid_argument("domain " + name + ": duplicate action " + a.name);
    a.validate();
    for (const auto& v : a.params)
      if (!type_set.count(v.type))
        throw std::invalid_argument("domain " + name + ": action " + a.name +
                                    " uses undeclared type " + v.type);
    for (const auto* atoms : {&a.pre, &a.add, &a.del})
      for (const auto& atom : *atoms)
        if (!declared.count(a.topical(atom)))
          throw std::invalid_argument("domain " + name + ": action " + a.name +
                                      " uses undeclared predicate " +
                                      a.topical(atom).str());
  }
  for (const auto& tp : predicates)
    for (const auto& t : tp.signature.types)
      if (!type_set.count(t))
        throw std::invalid_argument("domain " + name + ": predicate " + tp.predicate +
                                    " uses undeclared type " + t);
}

void Domain::normalize() {
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  std::sort(predicates.begin(), predicates.end());
  predicates.erase(std::unique(predicates.begin(), predicates.end()),
                   predicates.end());
  for (auto& a : actions) a.normalize();
}

GroundedSets ground(const ActionSchema& schema, const std::vector<ObjectRef>& args) {
  if (args.size() != schema.params.size())
    throw std::invalid_argument("ground " + schema.name + ": expected " +
                                std::to_string(schema.params.size()) +
                                " args, got " + std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].type != schema.params[i].type)
      throw std::invalid_argument("ground " + schema.name + ": arg " +
                                  std::to_string(i) + " (" + args[i].name +
                                  ") has type " + args[i].type + ", expected " +
                                  schema.params[i].type);
  auto subst = [&](const std::vector<LiftedAtom>& atoms) {
    std::vector<Proposition> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
      Proposition p;
      p.predicate = a.predicate;
      p.params.reserve(a.params.size());
      for (int idx : a.params) p.params.push_back(args[idx]);
      out.push_back(std::move(p));
    }
    return out;
  };
  return GroundedSets{subst(schema.pre), subst(schema.add), subst(schema.del)};
}

State apply(const State& state, const GroundAction& action, const Domain& domain,
            bool strict) {
  const ActionSchema* schema = domain.find_action(action.schema);
  if (!schema)
    throw std::invalid_argument("apply: unknown action " + action.schema);
  GroundedSets g = ground(*schema, action.args);
  if (strict) {
    std::vector<Proposition> missing;
    for (const auto& p : g.pre)
      if (!state.contains(p)) missing.push_back(p);
    if (!missing.empty()) {
      std::ostringstream os;
      os << "apply " << action.str() << ": preconditions not satisfied:";
      for (const auto& p : missing) os << ' ' << p.str();
      throw std::runtime_error(os.str());
    }
  }
  State out = state;
  for (const auto& p : g.del) out.erase(p);
  for (const auto& p : g.add) out.insert(p);
  return out;
}

std::vector<ActionHeader> headers_of(const Domain& d) {
  std::vector<ActionHeader> out;
  for (const auto& a : d.actions) {
    ActionHeader h{a.name, {}};
    for (const auto& v : a.params) h.param_types.push_back(v.type);
    out.push_back(std::move(h));
  }
  return out;
}

void TaskRecord::validate() const {
  if (texts.size() != plan.size() + 1)
    throw std::invalid_argument("task record: |texts| = " +
                                std::to_string(texts.size()) + " but |plan|+1 = " +
                                std::to_string(plan.size() + 1));
  if (texts.empty() || texts.front() != init_text)
    throw std::invalid_argument("task record: texts[0] must equal init_text");
}

int PropositionRegistry::insert(const TopicalProposition& tp) {
  auto it = index_.find(tp);
  if (it != index_.end()) return it->second;
  int idx = static_cast<int>(entries_.size());
  entries_.push_back(tp);
  index_.emplace(tp, idx);
  return idx;
}

int PropositionRegistry::find(const TopicalProposition& tp) const {
  auto it = index_.find(tp);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> PropositionRegistry::entries_with_predicate(
    const std::string& word) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].predicate == word) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace textplan
