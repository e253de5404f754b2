#include "textplan/templates.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace textplan {

namespace {

std::vector<std::string> pattern_tokens(const std::string& pattern) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '{') {  // skip slot
      while (i < pattern.size() && pattern[i] != '}') ++i;
      if (!cur.empty()) out.push_back(cur), cur.clear();
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

void SentenceTemplate::validate(double max_predicate_fraction) const {
  int with_predicate = 0;
  for (const auto& pat : patterns) {
    std::vector<int> seen(topical.signature.arity(), 0);
    for (std::size_t i = 0; i + 1 < pat.size(); ++i) {
      if (pat[i] != '{') continue;
      std::size_t close = pat.find('}', i);
      if (close == std::string::npos)
        throw std::invalid_argument("template " + topical.predicate +
                                    ": unterminated slot in '" + pat + "'");
      int idx = std::stoi(pat.substr(i + 1, close - i - 1));
      if (idx < 0 || idx >= static_cast<int>(seen.size()))
        throw std::invalid_argument("template " + topical.predicate +
                                    ": slot " + std::to_string(idx) + " out of range");
      ++seen[idx];
    }
    for (std::size_t s = 0; s < seen.size(); ++s)
      if (seen[s] != 1)
        throw std::invalid_argument("template " + topical.predicate + ": slot " +
                                    std::to_string(s) + " referenced " +
                                    std::to_string(seen[s]) + " times in '" + pat + "'");
    auto toks = pattern_tokens(pat);
    if (std::find(toks.begin(), toks.end(), topical.predicate) != toks.end())
      ++with_predicate;
  }
  if (with_predicate > max_predicate_fraction * patterns.size())
    throw std::invalid_argument("template " + topical.predicate + ": predicate named in " +
                                std::to_string(with_predicate) + "/5 patterns");
}

std::string SentenceTemplate::render(const Proposition& p, int k) const {
  const std::string& pat = patterns.at(k);
  std::string out;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (pat[i] == '{') {
      std::size_t close = pat.find('}', i);
      int idx = std::stoi(pat.substr(i + 1, close - i - 1));
      out += p.params.at(idx).name;
      i = close;
    } else {
      out += pat[i];
    }
  }
  return out;
}

const SentenceTemplate* TemplateSet::find(const TopicalProposition& tp) const {
  for (const auto& t : templates)
    if (t.topical == tp) return &t;
  return nullptr;
}

void TemplateSet::validate(double max_predicate_fraction) const {
  for (const auto& t : templates) t.validate(max_predicate_fraction);
}

namespace {

TopicalProposition tp(const std::string& pred, std::vector<TypeName> types) {
  return TopicalProposition{pred, TypedSignature{std::move(types)}};
}

LiftedAtom atom(const std::string& pred, std::vector<int> params) {
  return LiftedAtom{pred, std::move(params)};
}

Proposition prop(const std::string& pred, std::vector<ObjectRef> params) {
  return Proposition{pred, std::move(params)};
}

DomainBundle make_blocks() {
  DomainBundle b;
  Domain& d = b.domain;
  d.name = "blocks";
  d.types = {"block"};
  d.predicates = {tp("on-table", {"block"}), tp("on", {"block", "block"}),
                  tp("clear", {"block"}),    tp("holding", {"block"}),
                  tp("hand-empty", {})};

  ActionSchema pick_up;
  pick_up.name = "pick-up";
  pick_up.params = {{"x", "block"}};
  pick_up.pre = {atom("on-table", {0}), atom("clear", {0}), atom("hand-empty", {})};
  pick_up.add = {atom("holding", {0})};
  pick_up.del = pick_up.pre;

  ActionSchema put_down;  // place held block onto another block
  put_down.name = "put-down";
  put_down.params = {{"x", "block"}, {"y", "block"}};
  put_down.pre = {atom("holding", {0}), atom("clear", {1})};
  put_down.add = {atom("on", {0, 1}), atom("clear", {0}), atom("hand-empty", {})};
  put_down.del = put_down.pre;

  ActionSchema unstack;
  unstack.name = "unstack";
  unstack.params = {{"x", "block"}, {"y", "block"}};
  unstack.pre = {atom("on", {0, 1}), atom("clear", {0}), atom("hand-empty", {})};
  unstack.add = {atom("holding", {0}), atom("clear", {1})};
  unstack.del = unstack.pre;

  ActionSchema put_on_table;
  put_on_table.name = "put-on-table";
  put_on_table.params = {{"x", "block"}};
  put_on_table.pre = {atom("holding", {0})};
  put_on_table.add = {atom("on-table", {0}), atom("clear", {0}), atom("hand-empty", {})};
  put_on_table.del = put_on_table.pre;

  d.actions = {pick_up, put_down, unstack, put_on_table};
  d.normalize();
  d.validate();

  for (int i = 1; i <= 5; ++i)
    b.objects.push_back(ObjectRef{"Block" + std::to_string(i), "block"});
  for (const auto& o : b.objects) {
    b.base_init.insert(prop("on-table", {o}));
    b.base_init.insert(prop("clear", {o}));
  }
  b.base_init.insert(prop("hand-empty", {}));

  b.templates.templates = {
      {tp("on-table", {"block"}),
       {"{0} is on table.", "{0} sits on the table.",
        "{0} rests directly on the table surface.", "The table holds {0}.",
        "{0} is placed on the table."}},
      {tp("on", {"block", "block"}),
       {"{0} is on {1}.", "{0} is stacked on top of {1}.", "{1} is under {0}.",
        "{0} sits above {1}.", "{1} supports {0} from below."}},
      {tp("clear", {"block"}),
       {"Nothing is on {0}.", "{0} has nothing above it.",
        "The top of {0} is clear.", "{0} is uncovered.",
        "A block can be placed directly onto {0}."}},
      {tp("holding", {"block"}),
       {"The robot hand is holding {0}.", "The hand grips {0}.",
        "{0} is in the gripper.", "The robot carries {0}.",
        "{0} has been lifted off the table."}},
      {tp("hand-empty", {}),
       {"The robot hand is empty.", "The hand holds nothing.",
        "The gripper is free.", "Nothing is being held.",
        "The robot hand carries no block."}},
  };
  b.templates.validate();
  return b;
}

DomainBundle make_minecraft() {
  DomainBundle b;
  Domain& d = b.domain;
  d.name = "minecraft";
  d.types = {"agent", "item", "repo"};
  d.predicates = {tp("at-ground", {"item"}), tp("holding", {"agent", "item"}),
                  tp("hands-free", {"agent"}), tp("stored", {"item", "repo"}),
                  tp("open", {"repo"}),        tp("closed", {"repo"}),
                  tp("is-log", {"item"}),      tp("is-plank", {"item"})};

  ActionSchema pick_up;
  pick_up.name = "pick-up";
  pick_up.params = {{"a", "agent"}, {"i", "item"}};
  pick_up.pre = {atom("at-ground", {1}), atom("hands-free", {0})};
  pick_up.add = {atom("holding", {0, 1})};
  pick_up.del = pick_up.pre;

  ActionSchema drop;
  drop.name = "drop";
  drop.params = {{"a", "agent"}, {"i", "item"}};
  drop.pre = {atom("holding", {0, 1})};
  drop.add = {atom("at-ground", {1}), atom("hands-free", {0})};
  drop.del = drop.pre;

  ActionSchema craft_plank;
  craft_plank.name = "craft-plank";
  craft_plank.params = {{"a", "agent"}, {"i", "item"}};
  craft_plank.pre = {atom("holding", {0, 1}), atom("is-log", {1})};
  craft_plank.add = {atom("is-plank", {1})};
  craft_plank.del = {atom("is-log", {1})};

  ActionSchema open_repo;
  open_repo.name = "open-repo";
  open_repo.params = {{"a", "agent"}, {"r", "repo"}};
  open_repo.pre = {atom("closed", {1}), atom("hands-free", {0})};
  open_repo.add = {atom("open", {1})};
  open_repo.del = {atom("closed", {1})};

  ActionSchema store;
  store.name = "store";
  store.params = {{"a", "agent"}, {"i", "item"}, {"r", "repo"}};
  store.pre = {atom("holding", {0, 1}), atom("open", {2})};
  store.add = {atom("stored", {1, 2}), atom("hands-free", {0})};
  store.del = {atom("holding", {0, 1})};

  d.actions = {pick_up, drop, craft_plank, open_repo, store};
  d.normalize();
  d.validate();

  b.objects = {{"Agent0", "agent"}, {"Item1", "item"}, {"Item2", "item"},
               {"Item3", "item"},   {"Item4", "item"}, {"Repo1", "repo"},
               {"Repo2", "repo"}};
  for (const auto& o : b.objects) {
    if (o.type == "item") b.base_init.insert(prop("at-ground", {o}));
    if (o.type == "agent") b.base_init.insert(prop("hands-free", {o}));
    if (o.type == "repo") b.base_init.insert(prop("closed", {o}));
  }
  b.base_init.insert(prop("is-log", {{"Item1", "item"}}));
  b.base_init.insert(prop("is-log", {{"Item2", "item"}}));
  b.base_init.insert(prop("is-plank", {{"Item3", "item"}}));
  b.base_init.insert(prop("is-plank", {{"Item4", "item"}}));

  b.templates.templates = {
      {tp("at-ground", {"item"}),
       {"{0} lies on the ground.", "You see {0} lying nearby.",
        "{0} is on the ground.", "{0} waits to be picked up.",
        "You find {0} on the forest floor."}},
      {tp("holding", {"agent", "item"}),
       {"{0} is holding {1}.", "{0} carries {1}.", "{1} is in the hands of {0}.",
        "{0} has {1} in hand.", "{1} is carried by {0}."}},
      {tp("hands-free", {"agent"}),
       {"{0} carries nothing.", "The hands of {0} are free.",
        "{0} is not holding anything.", "{0} has empty hands.",
        "{0} is ready to pick something up."}},
      {tp("stored", {"item", "repo"}),
       {"{0} is stored in {1}.", "{1} contains {0}.", "{0} rests inside {1}.",
        "{0} has been put away into {1}.", "Inside {1} you can see {0}."}},
      {tp("open", {"repo"}),
       {"{0} is open.", "The lid of {0} stands open.",
        "You can put things into {0} now.", "{0} has been opened.",
        "The door of {0} is ajar."}},
      {tp("closed", {"repo"}),
       {"{0} is closed.", "The lid of {0} is shut.", "{0} remains sealed.",
        "You cannot put anything into {0}.", "The door of {0} is shut tight."}},
      {tp("is-log", {"item"}),
       {"{0} is a log.", "{0} is a piece of raw timber.",
        "{0} looks like an unworked log.", "{0} is rough wood.",
        "{0} still has bark on it."}},
      {tp("is-plank", {"item"}),
       {"{0} is a plank.", "{0} is a crafted board.",
        "{0} has been worked into a plank.", "{0} is smooth sawn wood.",
        "{0} is a finished board."}},
  };
  b.templates.validate();
  return b;
}

DomainBundle make_baking() {
  DomainBundle b;
  Domain& d = b.domain;
  d.name = "baking";
  d.types = {"egg", "flour", "pan", "oven"};
  d.predicates = {
      tp("fresh", {"egg"}),          tp("cracked", {"egg", "pan"}),
      tp("unopened", {"flour"}),     tp("added", {"flour", "pan"}),
      tp("clean", {"pan"}),          tp("greased", {"pan"}),
      tp("batter-ready", {"pan"}),   tp("in-oven", {"pan", "oven"}),
      tp("on-counter", {"pan"}),     tp("heated", {"oven"}),
      tp("cold", {"oven"}),          tp("cake-baked", {"pan"}),
      tp("souffle-baked", {"pan"}),  tp("mitts-on", {})};

  ActionSchema grease;
  grease.name = "grease-pan";
  grease.params = {{"p", "pan"}};
  grease.pre = {atom("clean", {0}), atom("on-counter", {0})};
  grease.add = {atom("greased", {0})};
  grease.del = {atom("clean", {0})};

  ActionSchema crack;
  crack.name = "crack-egg";
  crack.params = {{"e", "egg"}, {"p", "pan"}};
  crack.pre = {atom("fresh", {0}), atom("greased", {1}), atom("on-counter", {1})};
  crack.add = {atom("cracked", {0, 1})};
  crack.del = {atom("fresh", {0})};

  ActionSchema add_flour;
  add_flour.name = "add-flour";
  add_flour.params = {{"f", "flour"}, {"p", "pan"}};
  add_flour.pre = {atom("unopened", {0}), atom("greased", {1}), atom("on-counter", {1})};
  add_flour.add = {atom("added", {0, 1})};
  add_flour.del = {atom("unopened", {0})};

  ActionSchema stir;
  stir.name = "stir";
  stir.params = {{"e", "egg"}, {"f", "flour"}, {"p", "pan"}};
  stir.pre = {atom("cracked", {0, 2}), atom("added", {1, 2}), atom("on-counter", {2})};
  stir.add = {atom("batter-ready", {2})};
  stir.del = {};

  ActionSchema preheat;
  preheat.name = "preheat";
  preheat.params = {{"o", "oven"}};
  preheat.pre = {atom("cold", {0})};
  preheat.add = {atom("heated", {0})};
  preheat.del = {atom("cold", {0})};

  ActionSchema put_in_oven;
  put_in_oven.name = "put-in-oven";
  put_in_oven.params = {{"p", "pan"}, {"o", "oven"}};
  put_in_oven.pre = {atom("on-counter", {0}), atom("batter-ready", {0}),
                     atom("heated", {1}), atom("mitts-on", {})};
  put_in_oven.add = {atom("in-oven", {0, 1})};
  put_in_oven.del = {atom("on-counter", {0})};

  ActionSchema bake_cake;
  bake_cake.name = "bake-cake";
  bake_cake.params = {{"p", "pan"}, {"o", "oven"}};
  bake_cake.pre = {atom("in-oven", {0, 1}), atom("heated", {1})};
  bake_cake.add = {atom("cake-baked", {0}), atom("on-counter", {0})};
  bake_cake.del = {atom("in-oven", {0, 1})};

  ActionSchema bake_souffle;
  bake_souffle.name = "bake-souffle";
  bake_souffle.params = {{"p", "pan"}, {"o", "oven"}};
  bake_souffle.pre = {atom("in-oven", {0, 1}), atom("heated", {1})};
  bake_souffle.add = {atom("souffle-baked", {0}), atom("on-counter", {0})};
  bake_souffle.del = {atom("in-oven", {0, 1})};

  d.actions = {grease,  crack,       add_flour, stir,
               preheat, put_in_oven, bake_cake, bake_souffle};
  d.normalize();
  d.validate();

  b.objects = {{"Egg1", "egg"},     {"Egg2", "egg"},   {"Flour1", "flour"},
               {"Flour2", "flour"}, {"Pan1", "pan"},   {"Pan2", "pan"},
               {"Oven1", "oven"}};
  for (const auto& o : b.objects) {
    if (o.type == "egg") b.base_init.insert(prop("fresh", {o}));
    if (o.type == "flour") b.base_init.insert(prop("unopened", {o}));
    if (o.type == "pan") {
      b.base_init.insert(prop("clean", {o}));
      b.base_init.insert(prop("on-counter", {o}));
    }
    if (o.type == "oven") b.base_init.insert(prop("cold", {o}));
  }
  b.base_init.insert(prop("mitts-on", {}));

  b.templates.templates = {
      {tp("fresh", {"egg"}),
       {"{0} is a fresh egg.", "{0} is still whole.", "{0} has not been cracked.",
        "{0} sits unbroken in the carton.", "{0} is intact."}},
      {tp("cracked", {"egg", "pan"}),
       {"{0} has been cracked into {1}.", "{0} is in {1} now.",
        "{1} holds the contents of {0}.", "You cracked {0} over {1}.",
        "The shell of {0} is empty and its contents are in {1}."}},
      {tp("unopened", {"flour"}),
       {"{0} is an unopened bag of flour.", "{0} is still sealed.",
        "The bag {0} has never been opened.", "{0} remains full.",
        "{0} sits sealed in the pantry."}},
      {tp("added", {"flour", "pan"}),
       {"{0} has been added to {1}.", "{1} contains flour from {0}.",
        "You poured {0} into {1}.", "{0} went into {1}.",
        "Flour from {0} covers the bottom of {1}."}},
      {tp("clean", {"pan"}),
       {"{0} is clean.", "{0} is spotless.", "{0} has just been washed.",
        "No grease or batter is in {0}.", "{0} shines."}},
      {tp("greased", {"pan"}),
       {"{0} is greased.", "{0} has a layer of butter.",
        "The inside of {0} is slick.", "{0} has been buttered.",
        "Nothing will stick to {0}."}},
      {tp("batter-ready", {"pan"}),
       {"The batter in {0} is ready.", "{0} holds a smooth batter.",
        "The mix in {0} is fully stirred.", "{0} is filled with finished batter.",
        "Batter waits in {0}."}},
      {tp("in-oven", {"pan", "oven"}),
       {"{0} is in {1}.", "{0} sits inside {1}.", "{1} holds {0}.",
        "You placed {0} into {1}.", "{0} bakes inside {1}."}},
      {tp("on-counter", {"pan"}),
       {"{0} is on the counter.", "{0} sits on the countertop.",
        "{0} rests on the kitchen counter.", "You can reach {0} on the counter.",
        "{0} waits on the worktop."}},
      {tp("heated", {"oven"}),
       {"{0} is hot.", "{0} has been preheated.", "{0} reached baking temperature.",
        "Heat radiates from {0}.", "{0} is warmed up."}},
      {tp("cold", {"oven"}),
       {"{0} is cold.", "{0} is switched off.", "{0} has not been heated.",
        "{0} stands at room temperature.", "No heat comes from {0}."}},
      {tp("cake-baked", {"pan"}),
       {"A cake has been baked in {0}.", "{0} holds a finished cake.",
        "The cake in {0} is done.", "A golden cake cooled in {0}.",
        "{0} contains a baked cake."}},
      {tp("souffle-baked", {"pan"}),
       {"A souffle has been baked in {0}.", "{0} holds a finished souffle.",
        "The souffle in {0} is done.", "A puffy souffle rose in {0}.",
        "{0} contains a baked souffle."}},
      {tp("mitts-on", {}),
       {"The oven mitts are on.", "You are wearing oven mitts.",
        "Both mitts cover your hands.", "The mitts are worn.",
        "Your hands are protected by mitts."}},
  };
  b.templates.validate();
  return b;
}

}  // namespace

const DomainBundle& bundled_domain(const std::string& name) {
  static const std::map<std::string, DomainBundle> bundles = [] {
    std::map<std::string, DomainBundle> m;
    m.emplace("blocks", make_blocks());
    m.emplace("minecraft", make_minecraft());
    m.emplace("baking", make_baking());
    return m;
  }();
  auto it = bundles.find(name);
  if (it == bundles.end())
    throw std::invalid_argument("unknown bundled domain '" + name +
                                "' (have: blocks, minecraft, baking)");
  return it->second;
}

std::vector<std::string> bundled_domain_names() {
  return {"blocks", "minecraft", "baking"};
}

}  // namespace textplan
