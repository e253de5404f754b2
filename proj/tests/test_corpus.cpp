#include <doctest.h>

#include <set>

#include "textplan/corpus.hpp"
#include "textplan/rng.hpp"
#include "textplan/vocab.hpp"

using namespace textplan;

namespace {

ObjectRef block(const std::string& name) { return ObjectRef{name, "block"}; }

Proposition prop(const std::string& pred, std::vector<ObjectRef> params = {}) {
  return Proposition{pred, std::move(params)};
}

}  // namespace

TEST_CASE("generate_problems is deterministic and sized as asked") {
  const DomainBundle& bundle = bundled_domain("blocks");
  auto a = generate_problems(bundle, 3, 7);
  auto b = generate_problems(bundle, 3, 7);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].objects.size() == 5);
    CHECK(a[i].init == b[i].init);
    CHECK(a[i].goal == b[i].goal);
  }
  auto c = generate_problems(bundle, 3, 8);
  bool any_differ = false;
  for (int i = 0; i < 3; ++i)
    if (!(a[i].init == c[i].init) || a[i].goal != c[i].goal) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("zero-length walk yields a goal inside the initial state") {
  const DomainBundle& bundle = bundled_domain("blocks");
  WalkConfig cfg;
  cfg.init_walk_max = 0;
  cfg.walk_min = 0;
  cfg.walk_max = 0;
  auto problems = generate_problems(bundle, 1, 11, cfg);
  REQUIRE(problems.size() == 1);
  for (const auto& g : problems[0].goal) CHECK(problems[0].init.contains(g));
}

TEST_CASE("every generated goal is reachable: the solver is the oracle") {
  const DomainBundle& bundle = bundled_domain("blocks");
  auto problems = generate_problems(bundle, 100, 21);
  for (const auto& p : problems) {
    PlanResult res = solve(bundle.domain, p, 1);
    State s = p.init;
    for (const auto& a : res.plan) s = apply(s, a, bundle.domain);
    for (const auto& g : p.goal) CHECK(s.contains(g));
  }
}

TEST_CASE("goal already satisfied solves to the empty plan") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Problem p;
  p.name = "triv";
  p.domain_name = "blocks";
  p.objects = bundle.objects;
  p.init = bundle.base_init;
  p.goal = {prop("hand-empty")};
  PlanResult res = solve(bundle.domain, p, 5);
  CHECK(res.plan.empty());
  REQUIRE(res.trace.size() == 1);
  CHECK(res.trace[0] == p.init);
}

TEST_CASE("two blocks on the table stack with pick-up then put-down") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Problem p;
  p.name = "stack2";
  p.domain_name = "blocks";
  p.objects = {block("Block1"), block("Block2")};
  p.init.insert(prop("on-table", {block("Block1")}));
  p.init.insert(prop("on-table", {block("Block2")}));
  p.init.insert(prop("clear", {block("Block1")}));
  p.init.insert(prop("clear", {block("Block2")}));
  p.init.insert(prop("hand-empty"));
  p.goal = {prop("on", {block("Block1"), block("Block2")})};
  for (std::uint64_t seed : {0, 1, 2, 3, 4}) {
    PlanResult res = solve(bundle.domain, p, seed);
    REQUIRE(res.plan.size() == 2);
    CHECK(res.plan[0] == GroundAction{"pick-up", {block("Block1")}});
    CHECK(res.plan[1] == GroundAction{"put-down", {block("Block1"), block("Block2")}});
  }
}

TEST_CASE("planner reports budget exhaustion") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Problem p;
  p.name = "tight";
  p.domain_name = "blocks";
  p.objects = bundle.objects;
  p.init = bundle.base_init;
  p.goal = {prop("on", {block("Block1"), block("Block2")}),
            prop("on", {block("Block2"), block("Block3")}),
            prop("on", {block("Block3"), block("Block4")}),
            prop("on", {block("Block4"), block("Block5")})};
  CHECK_THROWS_AS(solve(bundle.domain, p, 0, 2), PlannerError);
}

TEST_CASE("render produces one of the five surface forms per proposition") {
  const DomainBundle& bundle = bundled_domain("blocks");
  State s;
  s.insert(prop("clear", {block("Block1")}));
  const SentenceTemplate* t = bundle.templates.find({"clear", TypedSignature{{"block"}}});
  REQUIRE(t != nullptr);
  std::set<std::string> forms;
  for (int k = 0; k < 5; ++k)
    forms.insert(t->render(prop("clear", {block("Block1")}), k));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RenderedText rt = render_state(s, bundle.templates, seed);
    REQUIRE(rt.sentences.size() == 1);
    CHECK(forms.count(rt.sentences[0]) == 1);
    CHECK(rt.gold[0] == prop("clear", {block("Block1")}));
  }
}

TEST_CASE("empty state renders to empty text") {
  const DomainBundle& bundle = bundled_domain("blocks");
  RenderedText rt = render_state(State{}, bundle.templates, 3);
  CHECK(rt.sentences.empty());
  CHECK(rt.gold.empty());
}

TEST_CASE("rendering fails loudly when a template is missing") {
  TemplateSet empty;
  State s;
  s.insert(prop("clear", {block("Block1")}));
  CHECK_THROWS_WITH_AS(render_state(s, empty, 0), doctest::Contains("clear"),
                       std::runtime_error);
}

TEST_CASE("corpus vocabulary equals the brute-force template closure") {
  const DomainBundle& bundle = bundled_domain("blocks");
  // independent enumeration: tokens of every pattern of every template
  std::set<std::string> closure;
  for (const auto& t : bundle.templates.templates)
    for (const auto& pat : t.patterns) {
      std::string stripped;
      for (std::size_t i = 0; i < pat.size(); ++i) {
        if (pat[i] == '{') {
          while (i < pat.size() && pat[i] != '}') ++i;
          stripped += ' ';
        } else {
          stripped += pat[i];
        }
      }
      for (const auto& tok : Vocabulary::lower_tokens(stripped)) closure.insert(tok);
    }

  Corpus corpus = build_corpus(bundle, 300, 30, 13);
  Vocabulary vocab = Vocabulary::build(corpus);
  std::set<std::string> got(vocab.words().begin(), vocab.words().end());
  CHECK(got == closure);
}

TEST_CASE("bundled blocks corpus matches the published shape") {
  const DomainBundle& bundle = bundled_domain("blocks");
  CHECK(bundle.domain.predicates.size() == 5);   // topical propositions
  CHECK(bundle.domain.actions.size() == 4);      // action models
  CHECK(bundle.objects.size() == 5);             // five blocks on a table
  const DomainBundle& mc = bundled_domain("minecraft");
  CHECK(mc.domain.predicates.size() == 8);
  CHECK(mc.domain.actions.size() == 5);
  const DomainBundle& bk = bundled_domain("baking");
  CHECK(bk.domain.predicates.size() == 14);
  CHECK(bk.domain.actions.size() == 8);
}

TEST_CASE("desk-scale corpus: split sizes, record invariants, plan validity") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Corpus corpus = build_corpus(bundle, 500, 100, 7);
  CHECK(corpus.split("train").size() == 500);
  CHECK(corpus.split("test").size() == 100);
  for (const auto& rec : corpus.records) {
    rec.validate();  // |texts| = |plan|+1, gold aligned
    // strict application along the plan succeeds and reaches the goal text's props
    State s = rec.task.texts.empty() ? State{} : State{};
    REQUIRE(!rec.gold.empty());
    for (const auto& p : rec.gold.front()) s.insert(p);
    for (std::size_t i = 0; i < rec.task.plan.size(); ++i)
      s = apply(s, rec.task.plan[i], bundle.domain, /*strict=*/true);
    for (const auto& g : rec.goal_gold) CHECK(s.contains(g));
  }
}

TEST_CASE("gold traces equal the simulated ground-truth traces") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Corpus corpus = build_corpus(bundle, 20, 5, 99);
  for (const auto& rec : corpus.records) {
    State s;
    for (const auto& p : rec.gold.front()) s.insert(p);
    for (std::size_t i = 0; i < rec.task.plan.size(); ++i) {
      s = apply(s, rec.task.plan[i], bundle.domain);
      State expected;
      for (const auto& p : rec.gold[i + 1]) expected.insert(p);
      CHECK(s == expected);
    }
  }
}

TEST_CASE("same seed builds a byte-identical corpus") {
  const DomainBundle& bundle = bundled_domain("minecraft");
  Corpus a = build_corpus(bundle, 25, 5, 17);
  Corpus b = build_corpus(bundle, 25, 5, 17);
  CHECK(corpus_to_jsonl(a) == corpus_to_jsonl(b));
  Corpus c = build_corpus(bundle, 25, 5, 18);
  CHECK(corpus_to_jsonl(a) != corpus_to_jsonl(c));
}

TEST_CASE("corpus jsonl round-trips") {
  const DomainBundle& bundle = bundled_domain("baking");
  Corpus a = build_corpus(bundle, 10, 3, 5);
  Corpus b = corpus_from_jsonl(corpus_to_jsonl(a));
  CHECK(corpus_to_jsonl(b) == corpus_to_jsonl(a));
  CHECK(b.records.size() == a.records.size());
}

TEST_CASE("gold propositions are recoverable by a reverse-template matcher") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Corpus corpus = build_corpus(bundle, 15, 0, 31);
  // all candidate propositions over the record's objects
  auto candidates = [&](const CorpusRecord& rec) {
    std::vector<Proposition> out;
    for (const auto& tp : bundle.domain.predicates) {
      std::vector<Proposition> partial{Proposition{tp.predicate, {}}};
      for (const auto& type : tp.signature.types) {
        std::vector<Proposition> next;
        for (const auto& base : partial)
          for (const auto& obj : rec.objects) {
            if (obj.type != type) continue;
            Proposition ext = base;
            ext.params.push_back(obj);
            next.push_back(ext);
          }
        partial = std::move(next);
      }
      out.insert(out.end(), partial.begin(), partial.end());
    }
    return out;
  };
  for (const auto& rec : corpus.records) {
    auto cands = candidates(rec);
    for (std::size_t xi = 0; xi < rec.task.texts.size(); ++xi) {
      for (std::size_t si = 0; si < rec.task.texts[xi].size(); ++si) {
        const std::string& sentence = rec.task.texts[xi][si];
        std::set<Proposition> matches;
        for (const auto& cand : cands) {
          const SentenceTemplate* t = bundle.templates.find(topical_of(cand));
          for (int k = 0; k < 5; ++k)
            if (t->render(cand, k) == sentence) matches.insert(cand);
        }
        REQUIRE(matches.size() == 1);
        CHECK(*matches.begin() == rec.gold[xi][si]);
      }
    }
  }
}

TEST_CASE("headers are recovered from typed plan arguments") {
  const DomainBundle& bundle = bundled_domain("blocks");
  Corpus corpus = build_corpus(bundle, 40, 5, 3);
  auto headers = headers_from_corpus(corpus);
  REQUIRE(headers.size() == 4);  // all four actions appear across 45 plans
  for (const auto& h : headers) {
    const ActionSchema* schema = bundle.domain.find_action(h.name);
    REQUIRE(schema != nullptr);
    std::vector<TypeName> expected;
    for (const auto& v : schema->params) expected.push_back(v.type);
    CHECK(h.param_types == expected);
  }
}

TEST_CASE("minecraft and baking corpora are strictly valid end to end") {
  for (const char* name : {"minecraft", "baking"}) {
    const DomainBundle& bundle = bundled_domain(name);
    Corpus corpus = build_corpus(bundle, 30, 5, 41);
    for (const auto& rec : corpus.records) {
      State s;
      for (const auto& p : rec.gold.front()) s.insert(p);
      for (const auto& a : rec.task.plan) s = apply(s, a, bundle.domain);
      for (const auto& g : rec.goal_gold) CHECK(s.contains(g));
    }
  }
}
