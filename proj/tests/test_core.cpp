#include <doctest.h>

#include <random>

#include "textplan/pddl.hpp"
#include "textplan/rng.hpp"
#include "textplan/strips.hpp"
#include "textplan/templates.hpp"

using namespace textplan;

namespace {

ObjectRef block(const std::string& name) { return ObjectRef{name, "block"}; }

Proposition prop(const std::string& pred, std::vector<ObjectRef> params = {}) {
  return Proposition{pred, std::move(params)};
}

ActionSchema pick_up_schema() {
  ActionSchema s;
  s.name = "pick-up";
  s.params = {{"x", "block"}};
  s.pre = {{"on-table", {0}}, {"hand-empty", {}}};
  s.add = {{"holding", {0}}};
  s.del = {{"on-table", {0}}, {"hand-empty", {}}};
  return s;
}

}  // namespace

TEST_CASE("ground substitutes arguments positionally") {
  ActionSchema s = pick_up_schema();
  auto g = ground(s, {block("Block1")});
  CHECK(g.pre == std::vector<Proposition>{prop("on-table", {block("Block1")}),
                                          prop("hand-empty")});
  CHECK(g.add == std::vector<Proposition>{prop("holding", {block("Block1")})});
  CHECK(g.del == std::vector<Proposition>{prop("on-table", {block("Block1")}),
                                          prop("hand-empty")});
}

TEST_CASE("ground with zero parameters is the identity on atom sets") {
  ActionSchema s;
  s.name = "noop";
  s.pre = {{"ready", {}}};
  s.add = {{"done", {}}};
  auto g = ground(s, {});
  CHECK(g.pre == std::vector<Proposition>{prop("ready")});
  CHECK(g.add == std::vector<Proposition>{prop("done")});
  CHECK(g.del.empty());
}

TEST_CASE("ground rejects arity and type mismatches with position info") {
  ActionSchema s = pick_up_schema();
  CHECK_THROWS_WITH_AS(ground(s, {}), doctest::Contains("expected 1 args"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(ground(s, {ObjectRef{"R2", "robot"}}),
                       doctest::Contains("arg 0"), std::invalid_argument);
}

TEST_CASE("grounded atom types equal schema signature types, exhaustively") {
  // brute-force type audit over randomly generated schema/argument pairs
  auto rng = make_rng(42, 1);
  std::vector<TypeName> types = {"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    ActionSchema s;
    s.name = "r" + std::to_string(trial);
    int arity = 1 + rng() % 3;
    for (int i = 0; i < arity; ++i)
      s.params.push_back({"x" + std::to_string(i), types[rng() % types.size()]});
    int n_atoms = 1 + rng() % 4;
    for (int i = 0; i < n_atoms; ++i) {
      LiftedAtom atom{"p" + std::to_string(rng() % 3), {}};
      int a_arity = rng() % (arity + 1);
      for (int k = 0; k < a_arity; ++k)
        atom.params.push_back(static_cast<int>(rng() % arity));
      s.pre.push_back(atom);
    }
    std::vector<ObjectRef> args;
    for (int i = 0; i < arity; ++i)
      args.push_back(ObjectRef{"o" + std::to_string(i), s.params[i].type});

    auto g = ground(s, args);
    REQUIRE(g.pre.size() == s.pre.size());
    for (std::size_t i = 0; i < g.pre.size(); ++i) {
      auto expected = s.topical(s.pre[i]);
      CHECK(topical_of(g.pre[i]) == expected);
    }
  }
}

TEST_CASE("apply follows STRIPS progression") {
  const DomainBundle& bundle = bundled_domain("blocks");
  State s;
  s.insert(prop("on-table", {block("Block1")}));
  s.insert(prop("clear", {block("Block1")}));
  s.insert(prop("hand-empty"));
  State next = apply(s, GroundAction{"pick-up", {block("Block1")}}, bundle.domain);
  CHECK(next.props == std::set<Proposition>{prop("holding", {block("Block1")})});
}

TEST_CASE("apply with empty effects leaves the state unchanged") {
  Domain d;
  d.name = "noop";
  d.types = {"block"};
  d.predicates = {{"p", TypedSignature{{"block"}}}};
  ActionSchema s;
  s.name = "observe";
  s.params = {{"x", "block"}};
  s.pre = {{"p", {0}}};
  d.actions = {s};
  State st;
  st.insert(prop("p", {block("B")}));
  CHECK(apply(st, GroundAction{"observe", {block("B")}}, d) == st);
}

TEST_CASE("strict apply reports the missing preconditions by name") {
  const DomainBundle& bundle = bundled_domain("blocks");
  State s;
  CHECK_THROWS_WITH_AS(
      apply(s, GroundAction{"pick-up", {block("Block1")}}, bundle.domain),
      doctest::Contains("(on-table Block1)"), std::runtime_error);
}

TEST_CASE("non-strict apply force-applies the effects") {
  const DomainBundle& bundle = bundled_domain("blocks");
  State s;  // preconditions absent
  State next = apply(s, GroundAction{"pick-up", {block("Block1")}}, bundle.domain,
                     /*strict=*/false);
  CHECK(next.contains(prop("holding", {block("Block1")})));
}

TEST_CASE("topical_of lifts parameters to their types") {
  auto tp = topical_of(prop("on-table", {block("Block1")}));
  CHECK(tp.predicate == "on-table");
  CHECK(tp.signature.types == std::vector<TypeName>{"block"});
  auto zero = topical_of(prop("hand-empty"));
  CHECK(zero.signature.types.empty());
}

TEST_CASE("topical_of is invariant under renaming objects of equal type") {
  auto rng = make_rng(7, 2);
  for (int trial = 0; trial < 100; ++trial) {
    int arity = rng() % 4;
    Proposition a, b;
    a.predicate = b.predicate = "p" + std::to_string(rng() % 5);
    for (int i = 0; i < arity; ++i) {
      TypeName t = "t" + std::to_string(rng() % 3);
      a.params.push_back({"x" + std::to_string(rng() % 100), t});
      b.params.push_back({"y" + std::to_string(rng() % 100), t});
    }
    CHECK(topical_of(a) == topical_of(b));
  }
}

TEST_CASE("schema invariants are enforced") {
  ActionSchema bad = pick_up_schema();
  bad.add.push_back({"on-table", {0}});  // add ∩ pre
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  ActionSchema bad2 = pick_up_schema();
  bad2.del.push_back({"clear", {0}});  // del ⊄ pre
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);

  ActionSchema good = pick_up_schema();
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("grounding then lifting recovers the schema's topical atoms") {
  const DomainBundle& bundle = bundled_domain("blocks");
  for (const auto& schema : bundle.domain.actions) {
    std::vector<ObjectRef> args;
    for (std::size_t i = 0; i < schema.params.size(); ++i)
      args.push_back(block("Block" + std::to_string(i + 1)));
    auto g = ground(schema, args);
    for (std::size_t i = 0; i < g.pre.size(); ++i)
      CHECK(topical_of(g.pre[i]) == schema.topical(schema.pre[i]));
    for (std::size_t i = 0; i < g.add.size(); ++i)
      CHECK(topical_of(g.add[i]) == schema.topical(schema.add[i]));
  }
}

// ---------------------------------------------------------------- PDDL

TEST_CASE("blocks domain round-trips through PDDL") {
  const DomainBundle& bundle = bundled_domain("blocks");
  CHECK(bundle.domain.predicates.size() == 5);
  CHECK(bundle.domain.actions.size() == 4);
  std::string text = emit_domain(bundle.domain);
  Domain parsed = parse_domain(text);
  CHECK(parsed == bundle.domain);
}

TEST_CASE("empty action list emits a valid domain file") {
  Domain d;
  d.name = "empty";
  d.types = {"thing"};
  d.predicates = {{"p", TypedSignature{{"thing"}}}};
  std::string text = emit_domain(d);
  Domain parsed = parse_domain(text);
  CHECK(parsed.actions.empty());
  CHECK(parsed == d);
}

namespace {

Domain random_domain(std::mt19937_64& rng) {
  Domain d;
  d.name = "rnd";
  int n_types = 1 + rng() % 3;
  for (int i = 0; i < n_types; ++i) d.types.push_back("t" + std::to_string(i));
  int n_preds = 1 + rng() % 5;
  for (int i = 0; i < n_preds; ++i) {
    TypedSignature sig;
    int arity = rng() % 3;
    for (int k = 0; k < arity; ++k)
      sig.types.push_back(d.types[rng() % d.types.size()]);
    d.predicates.push_back({"p" + std::to_string(i), sig});
  }
  int n_actions = rng() % 4;
  for (int a = 0; a < n_actions; ++a) {
    ActionSchema s;
    s.name = "act" + std::to_string(a);
    int arity = 1 + rng() % 3;
    for (int i = 0; i < arity; ++i)
      s.params.push_back({"v" + std::to_string(i), d.types[rng() % d.types.size()]});
    // candidate atoms whose types can be drawn from the parameters
    std::vector<LiftedAtom> candidates;
    for (std::size_t p = 0; p < d.predicates.size(); ++p) {
      LiftedAtom atom{d.predicates[p].predicate, {}};
      bool ok = true;
      for (const auto& t : d.predicates[p].signature.types) {
        int found = -1;
        for (std::size_t v = 0; v < s.params.size(); ++v)
          if (s.params[v].type == t) {
            found = static_cast<int>(v);
            break;
          }
        if (found < 0) {
          ok = false;
          break;
        }
        atom.params.push_back(found);
      }
      if (ok) candidates.push_back(atom);
    }
    for (const auto& atom : candidates) {
      switch (rng() % 4) {
        case 0:
          s.pre.push_back(atom);
          if (rng() % 2) s.del.push_back(atom);
          break;
        case 1:
          s.add.push_back(atom);
          break;
        default:
          break;
      }
    }
    d.actions.push_back(std::move(s));
  }
  d.normalize();
  return d;
}

}  // namespace

TEST_CASE("randomized domains reach an emit fixpoint after one normalization") {
  auto rng = make_rng(2024, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Domain d = random_domain(rng);
    std::string once = emit_domain(d);
    Domain parsed = parse_domain(once);
    std::string twice = emit_domain(parsed);
    CHECK(once == twice);
    CHECK(parsed == parse_domain(twice));
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_domain("(define (domain x)\n  (:types a\n");
    FAIL("expected parse error");
  } catch (const PddlError& e) {
    CHECK(e.line >= 2);
    CHECK(std::string(e.what()).find(":") != std::string::npos);
  }
}

TEST_CASE("unsupported PDDL features are rejected by name") {
  CHECK_THROWS_WITH_AS(
      parse_domain("(define (domain x) (:requirements :adl))"),
      doctest::Contains(":adl"), PddlError);
  CHECK_THROWS_WITH_AS(
      parse_domain("(define (domain x) (:functions (f)))"),
      doctest::Contains(":functions"), PddlError);
  CHECK_THROWS_WITH_AS(
      parse_domain("(define (domain x) (:types a) (:predicates (p ?x - a))"
                   " (:action m :parameters (?x - a)"
                   " :precondition (and (forall (?y) (p ?y))) :effect (and)))"),
      doctest::Contains("forall"), PddlError);
}

TEST_CASE("problem files round-trip") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Problem p;
  p.name = "p0";
  p.domain_name = "blocks";
  p.objects = bundle.objects;
  p.init = bundle.base_init;
  p.goal = {prop("on", {block("Block1"), block("Block2")})};
  Problem parsed = parse_problem(emit_problem(p));
  CHECK(parsed.init == p.init);
  CHECK(parsed.goal == p.goal);
  CHECK(parsed.domain_name == "blocks");
}

TEST_CASE("task record invariants") {
  TaskRecord r;
  r.init_text = {"a"};
  r.texts = {{"a"}, {"b"}};
  r.plan = {GroundAction{"x", {}}};
  CHECK_NOTHROW(r.validate());
  r.plan.clear();
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("registry keeps stable indices and rejects duplicates") {
  PropositionRegistry psi;
  int a = psi.insert({"on", TypedSignature{{"block", "block"}}});
  int b = psi.insert({"clear", TypedSignature{{"block"}}});
  int a2 = psi.insert({"on", TypedSignature{{"block", "block"}}});
  CHECK(a == 0);
  CHECK(b == 1);
  CHECK(a2 == a);
  CHECK(psi.size() == 2);
  CHECK(psi.entries_with_predicate("on") == std::vector<int>{0});
}
