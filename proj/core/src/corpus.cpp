#include "textplan/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textplan/rng.hpp"

namespace textplan {

using json = nlohmann::ordered_json;

namespace {

// One random applicable-action step; returns false in a dead-end state.
bool walk_step(const Domain& domain, const std::vector<GroundAction>& actions,
               const std::vector<GroundedSets>& grounded, State& state,
               std::mt19937_64& rng) {
  std::vector<std::size_t> applicable;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    bool ok = true;
    for (const auto& p : grounded[i].pre)
      if (!state.contains(p)) {
        ok = false;
        break;
      }
    if (ok) applicable.push_back(i);
  }
  if (applicable.empty()) return false;
  std::size_t pick = applicable[rng() % applicable.size()];
  state = apply(state, actions[pick], domain, /*strict=*/true);
  return true;
}

}  // namespace

std::vector<Problem> generate_problems(const DomainBundle& bundle, int count,
                                       std::uint64_t seed, const WalkConfig& cfg) {
  if (count < 1) throw std::invalid_argument("generate_problems: count must be >= 1");
  const std::vector<GroundAction> actions = ground_all(bundle.domain, bundle.objects);
  std::vector<GroundedSets> grounded;
  for (const auto& a : actions)
    grounded.push_back(ground(*bundle.domain.find_action(a.schema), a.args));

  std::vector<Problem> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    auto rng = make_rng(seed, 0x70726f62ULL, static_cast<std::uint64_t>(k));
    Problem p;
    p.name = "p" + std::to_string(k);
    p.domain_name = bundle.domain.name;
    p.objects = bundle.objects;

    State init = bundle.base_init;
    int init_steps =
        cfg.init_walk_max > 0 ? static_cast<int>(rng() % (cfg.init_walk_max + 1)) : 0;
    for (int s = 0; s < init_steps; ++s)
      if (!walk_step(bundle.domain, actions, grounded, init, rng)) break;
    p.init = init;

    State reached = init;
    int span = cfg.walk_max - cfg.walk_min + 1;
    int steps = cfg.walk_min + (span > 0 ? static_cast<int>(rng() % span) : 0);
    for (int s = 0; s < steps; ++s)
      if (!walk_step(bundle.domain, actions, grounded, reached, rng)) break;

    // Goal from the reached state, favouring propositions the walk changed.
    std::vector<Proposition> changed, rest;
    for (const auto& prop : reached.props)
      (init.contains(prop) ? rest : changed).push_back(prop);
    std::vector<Proposition> pool = changed.empty() ? rest : changed;
    std::shuffle(pool.begin(), pool.end(), rng);
    int gspan = cfg.goal_max - cfg.goal_min + 1;
    std::size_t want = cfg.goal_min + (gspan > 0 ? rng() % gspan : 0);
    want = std::min<std::size_t>(std::max<std::size_t>(want, 1), pool.size());
    p.goal.assign(pool.begin(), pool.begin() + want);
    std::sort(p.goal.begin(), p.goal.end());
    out.push_back(std::move(p));
  }
  return out;
}

RenderedText render_state(const State& state, const TemplateSet& templates,
                          std::uint64_t seed) {
  auto rng = make_rng(seed, 0x72656e64ULL);
  RenderedText out;
  for (const auto& prop : state.props) {
    const SentenceTemplate* t = templates.find(topical_of(prop));
    if (!t)
      throw std::runtime_error("render: no template for " + topical_of(prop).str());
    int k = static_cast<int>(rng() % 5);
    out.sentences.push_back(t->render(prop, k));
    out.gold.push_back(prop);
  }
  // joint shuffle keeps gold aligned
  std::vector<std::size_t> order(out.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  RenderedText shuffled;
  for (std::size_t i : order) {
    shuffled.sentences.push_back(out.sentences[i]);
    shuffled.gold.push_back(out.gold[i]);
  }
  return shuffled;
}

std::vector<RenderedText> render(const std::vector<State>& trace,
                                 const TemplateSet& templates, std::uint64_t seed) {
  std::vector<RenderedText> out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i)
    out.push_back(render_state(trace[i], templates, derive_seed(seed, 0x74657874ULL, i)));
  return out;
}

void CorpusRecord::validate() const {
  task.validate();
  if (gold.size() != task.texts.size())
    throw std::invalid_argument("record " + std::to_string(id) +
                                ": gold/texts length mismatch");
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].size() != task.texts[i].size())
      throw std::invalid_argument("record " + std::to_string(id) + ": text " +
                                  std::to_string(i) + " gold misaligned");
  if (goal_gold.size() != task.goal_text.size())
    throw std::invalid_argument("record " + std::to_string(id) +
                                ": goal gold misaligned");
}

std::vector<const CorpusRecord*> Corpus::split(const std::string& which) const {
  std::vector<const CorpusRecord*> out;
  for (const auto& r : records)
    if (r.split == which) out.push_back(&r);
  return out;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& r : records) {
    for (const auto& t : r.task.texts) n += t.size();
    n += r.task.goal_text.size();
  }
  return n;
}

Corpus build_corpus(const DomainBundle& bundle, int train_count, int test_count,
                    std::uint64_t seed, const WalkConfig& cfg) {
  const int total = train_count + test_count;
  std::vector<Problem> problems = generate_problems(bundle, total, seed, cfg);
  Corpus corpus;
  corpus.domain_name = bundle.domain.name;
  corpus.records.reserve(total);
  for (int k = 0; k < total; ++k) {
    PlanResult res = solve(bundle.domain, problems[k],
                           derive_seed(seed, 0x736f6c76ULL, k), cfg.node_budget);
    CorpusRecord rec;
    rec.id = k;
    rec.split = k < train_count ? "train" : "test";
    rec.objects = bundle.objects;

    auto rendered = render(res.trace, bundle.templates, derive_seed(seed, 0x72656372ULL, k));
    for (auto& rt : rendered) {
      rec.task.texts.push_back(rt.sentences);
      rec.gold.push_back(rt.gold);
    }
    rec.task.init_text = rec.task.texts.front();
    rec.task.plan = res.plan;

    State goal_state;
    for (const auto& g : problems[k].goal) goal_state.insert(g);
    RenderedText goal_rt =
        render_state(goal_state, bundle.templates, derive_seed(seed, 0x676f616cULL, k));
    rec.task.goal_text = goal_rt.sentences;
    rec.goal_gold = goal_rt.gold;

    rec.validate();
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

// ------------------------------------------------------------- JSON (de)serialization

namespace {

json prop_to_json(const Proposition& p) {
  json j;
  j["predicate"] = p.predicate;
  json params = json::array();
  for (const auto& o : p.params) params.push_back(o.name);
  j["params"] = std::move(params);
  return j;
}

Proposition prop_from_json(const json& j,
                           const std::map<std::string, TypeName>& types) {
  Proposition p;
  p.predicate = j.at("predicate").get<std::string>();
  for (const auto& name : j.at("params")) {
    auto it = types.find(name.get<std::string>());
    if (it == types.end())
      throw std::runtime_error("corpus: undeclared object '" +
                               name.get<std::string>() + "'");
    p.params.push_back(ObjectRef{it->first, it->second});
  }
  return p;
}

}  // namespace

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::ostringstream os;
  for (const auto& r : corpus.records) {
    json j;
    j["id"] = r.id;
    j["split"] = r.split;
    j["domain"] = corpus.domain_name;
    json objs = json::object();
    for (const auto& o : r.objects) objs[o.name] = o.type;
    j["objects"] = std::move(objs);
    j["init_text"] = r.task.init_text;
    j["goal_text"] = r.task.goal_text;
    j["texts"] = r.task.texts;
    json plan = json::array();
    for (const auto& a : r.task.plan) {
      json ja;
      ja["action"] = a.schema;
      json args = json::array();
      for (const auto& o : a.args) args.push_back(o.name);
      ja["args"] = std::move(args);
      plan.push_back(std::move(ja));
    }
    j["plan"] = std::move(plan);
    json gold = json::array();
    for (const auto& text_gold : r.gold) {
      json tg = json::array();
      for (const auto& p : text_gold) tg.push_back(prop_to_json(p));
      gold.push_back(std::move(tg));
    }
    j["gold"] = std::move(gold);
    json gg = json::array();
    for (const auto& p : r.goal_gold) gg.push_back(prop_to_json(p));
    j["goal_gold"] = std::move(gg);
    os << j.dump() << '\n';
  }
  return os.str();
}

Corpus corpus_from_jsonl(const std::string& text) {
  Corpus corpus;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    CorpusRecord r;
    r.id = j.at("id").get<int>();
    r.split = j.at("split").get<std::string>();
    if (corpus.domain_name.empty())
      corpus.domain_name = j.value("domain", std::string{});
    std::map<std::string, TypeName> types;
    for (auto it = j.at("objects").begin(); it != j.at("objects").end(); ++it) {
      r.objects.push_back(ObjectRef{it.key(), it.value().get<std::string>()});
      types[it.key()] = it.value().get<std::string>();
    }
    r.task.init_text = j.at("init_text").get<Text>();
    r.task.goal_text = j.at("goal_text").get<Text>();
    for (const auto& t : j.at("texts")) r.task.texts.push_back(t.get<Text>());
    for (const auto& ja : j.at("plan")) {
      GroundAction a;
      a.schema = ja.at("action").get<std::string>();
      for (const auto& arg : ja.at("args")) {
        auto it = types.find(arg.get<std::string>());
        if (it == types.end())
          throw std::runtime_error("corpus: undeclared plan argument '" +
                                   arg.get<std::string>() + "'");
        a.args.push_back(ObjectRef{it->first, it->second});
      }
      r.task.plan.push_back(std::move(a));
    }
    for (const auto& tg : j.at("gold")) {
      std::vector<Proposition> props;
      for (const auto& p : tg) props.push_back(prop_from_json(p, types));
      r.gold.push_back(std::move(props));
    }
    for (const auto& p : j.at("goal_gold")) r.goal_gold.push_back(prop_from_json(p, types));
    r.validate();
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << corpus_to_jsonl(corpus);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return corpus_from_jsonl(ss.str());
}

std::string manifest_json(const Corpus& corpus, std::uint64_t seed) {
  json j;
  j["format"] = "textplan-corpus-v1";
  j["domain"] = corpus.domain_name;
  j["seed"] = seed;
  j["train_records"] = corpus.split("train").size();
  j["test_records"] = corpus.split("test").size();
  j["sentences"] = corpus.sentence_count();
  json headers = json::array();
  for (const auto& h : headers_from_corpus(corpus)) {
    json jh;
    jh["name"] = h.name;
    jh["param_types"] = h.param_types;
    headers.push_back(std::move(jh));
  }
  j["action_headers"] = std::move(headers);
  return j.dump(2) + "\n";
}

std::vector<ActionHeader> headers_from_corpus(const Corpus& corpus) {
  std::map<std::string, std::vector<TypeName>> seen;
  for (const auto& r : corpus.records)
    for (const auto& a : r.task.plan) {
      std::vector<TypeName> types;
      for (const auto& o : a.args) types.push_back(o.type);
      auto [it, inserted] = seen.emplace(a.schema, types);
      if (!inserted && it->second != types)
        throw std::runtime_error("corpus: action " + a.schema +
                                 " used with inconsistent parameter types");
    }
  std::vector<ActionHeader> out;
  for (auto& [name, types] : seen) out.push_back(ActionHeader{name, types});
  return out;
}

}  // namespace textplan
