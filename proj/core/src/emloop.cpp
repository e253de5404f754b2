#include "textplan/emloop.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "textplan/pddl.hpp"
#include "textplan/rng.hpp"

namespace textplan {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Deterministic parallel map: results land in slot order regardless of
// scheduling; per-item seeds derive from the item index.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

json prop_json(const Proposition& p) {
  json j;
  j["predicate"] = p.predicate;
  json params = json::array();
  for (const auto& o : p.params) params.push_back({{"name", o.name}, {"type", o.type}});
  j["params"] = std::move(params);
  return j;
}

Proposition prop_from(const json& j) {
  Proposition p;
  p.predicate = j.at("predicate").get<std::string>();
  for (const auto& jo : j.at("params"))
    p.params.push_back(ObjectRef{jo.at("name").get<std::string>(),
                                 jo.at("type").get<std::string>()});
  return p;
}

}  // namespace

std::string registry_to_json(const PropositionRegistry& psi) {
  json out = json::array();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    json j;
    j["index"] = i;
    j["predicate"] = psi.at(static_cast<int>(i)).predicate;
    j["types"] = psi.at(static_cast<int>(i)).signature.types;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

PropositionRegistry registry_from_json(const std::string& text) {
  PropositionRegistry psi;
  for (const auto& j : json::parse(text)) {
    TopicalProposition tp{j.at("predicate").get<std::string>(),
                          TypedSignature{j.at("types").get<std::vector<std::string>>()}};
    psi.insert(tp);
  }
  return psi;
}

std::string extraction_to_jsonl(const ExtractionResult& ext) {
  std::ostringstream os;
  json header;
  header["registry_size"] = ext.registry.size();
  header["fallbacks"] = ext.fallback_count;
  header["skipped"] = ext.skipped_sentences;
  os << header.dump() << '\n';
  for (std::size_t t = 0; t < ext.tasks.size(); ++t) {
    const TaskExtraction& task = ext.tasks[t];
    json j;
    j["task"] = t;
    json texts = json::array();
    for (const auto& assigns : task.text_assignments) {
      json ja = json::array();
      for (const auto& a : assigns) {
        json one = prop_json(a.p);
        one["registry"] = a.registry_index;
        one["sentence"] = a.sentence;
        ja.push_back(std::move(one));
      }
      texts.push_back(std::move(ja));
    }
    j["texts"] = std::move(texts);
    json goal = json::array();
    for (const auto& a : task.goal_assignments) {
      json one = prop_json(a.p);
      one["registry"] = a.registry_index;
      one["sentence"] = a.sentence;
      goal.push_back(std::move(one));
    }
    j["goal"] = std::move(goal);
    os << j.dump() << '\n';
  }
  return os.str();
}

ExtractionResult extraction_from_jsonl(const std::string& text) {
  ExtractionResult ext;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (first) {
      first = false;
      ext.fallback_count = j.value("fallbacks", 0u);
      ext.skipped_sentences = j.value("skipped", 0u);
      continue;
    }
    TaskExtraction task;
    for (const auto& ja : j.at("texts")) {
      std::vector<SentenceAssignment> assigns;
      State s;
      for (const auto& one : ja) {
        SentenceAssignment a;
        a.p = prop_from(one);
        a.registry_index = one.at("registry").get<int>();
        a.sentence = one.at("sentence").get<int>();
        s.insert(a.p);
        assigns.push_back(std::move(a));
      }
      task.states.push_back(std::move(s));
      task.text_assignments.push_back(std::move(assigns));
    }
    for (const auto& one : j.at("goal")) {
      SentenceAssignment a;
      a.p = prop_from(one);
      a.registry_index = one.at("registry").get<int>();
      a.sentence = one.at("sentence").get<int>();
      task.goal.insert(a.p);
      task.goal_assignments.push_back(std::move(a));
    }
    ext.tasks.push_back(std::move(task));
  }
  return ext;
}

ExtractionResult gold_extraction(const std::vector<const CorpusRecord*>& records) {
  ExtractionResult ext;
  for (const auto* rec : records) {
    TaskExtraction task;
    for (std::size_t xi = 0; xi < rec->gold.size(); ++xi) {
      State s;
      std::vector<SentenceAssignment> assigns;
      for (std::size_t si = 0; si < rec->gold[xi].size(); ++si) {
        const Proposition& p = rec->gold[xi][si];
        int idx = ext.registry.insert(topical_of(p));
        s.insert(p);
        assigns.push_back({p, idx, static_cast<int>(si)});
      }
      task.states.push_back(std::move(s));
      task.text_assignments.push_back(std::move(assigns));
    }
    for (std::size_t si = 0; si < rec->goal_gold.size(); ++si) {
      const Proposition& p = rec->goal_gold[si];
      int idx = ext.registry.insert(topical_of(p));
      task.goal.insert(p);
      task.goal_assignments.push_back({p, idx, static_cast<int>(si)});
    }
    ext.tasks.push_back(std::move(task));
  }
  return ext;
}

// --------------------------------------------------------------- the loop

namespace {

struct ConsensusArtifacts {
  Domain domain;
  std::vector<ActionScores> scores;
  std::vector<ColumnIndex> columns;
};

ConsensusArtifacts learn_domain(const std::vector<const CorpusRecord*>& records,
                                const ExtractionResult& extraction,
                                const std::vector<ActionHeader>& headers,
                                const RunConfig& cfg, int iteration) {
  // fixed plan sample, chosen once from the run seed
  std::vector<std::size_t> candidates(records.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  auto rng = make_rng(cfg.seed, 0x706c73656cULL);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::size_t n = std::min<std::size_t>(cfg.plan_cap, candidates.size());
  candidates.resize(n);

  std::vector<Domain> domains(n);
  std::vector<std::string> errors(n);
  parallel_for(n, cfg.threads, [&](std::size_t k) {
    std::size_t rec_idx = candidates[k];
    const TaskExtraction& task = extraction.tasks.at(rec_idx);
    try {
      domains[k] = learn_one(task.states, records[rec_idx]->task.plan, task.goal,
                             extraction.registry, headers,
                             derive_seed(cfg.seed, 0x736174ULL, iteration, k),
                             cfg.sat);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < n; ++k)
    if (!errors[k].empty())
      throw SolverError("per-plan learner " + std::to_string(k) + ": " + errors[k],
                        {});

  ConsensusArtifacts art;
  auto matrices = build_matrices(domains, extraction.registry, headers);
  for (auto& m : matrices) {
    ActionScores s;
    s.pre = fit(m.pre, cfg.consensus.epochs, cfg.consensus.lr);
    s.add = fit(m.add, cfg.consensus.epochs, cfg.consensus.lr);
    s.del = fit(m.del, cfg.consensus.epochs, cfg.consensus.lr);
    art.scores.push_back(std::move(s));
    art.columns.push_back(std::move(m.columns));
  }
  art.domain = threshold_and_assemble(art.scores, art.columns, cfg.consensus.lambda,
                                      headers, extraction.registry);
  return art;
}

struct LoopState {
  RunConfig cfg;
  fs::path dir;
  std::vector<const CorpusRecord*> records;
  std::vector<ActionHeader> headers;
  Vocabulary vocab;
  EncoderModel encoder;
  ExtractorModel extractor;
  bool extractor_ready = false;
  ExtractionResult extraction;
  Domain domain;
  json metrics = json::object();

  void checkpoint(int iteration, const ConsensusArtifacts& art) {
    fs::path it_dir = dir / ("iter_" + std::to_string(iteration));
    fs::create_directories(it_dir);
    write_file(it_dir / "domain.pddl", emit_domain(art.domain));
    write_file(it_dir / "registry.json", registry_to_json(extraction.registry));
    write_file(it_dir / "extraction.jsonl", extraction_to_jsonl(extraction));
    write_file(it_dir / "scores.json",
               scores_json(art.scores, art.columns, headers, extraction.registry));
    write_file(it_dir / "encoder.json", encoder.to_json());
    if (extractor_ready) write_file(it_dir / "extractor.json", extractor.to_json());
  }

  void write_state(int iteration, bool early, bool failed) {
    json j;
    j["format"] = "textplan-run-v1";
    j["completed_iteration"] = iteration;
    j["early_stopped"] = early;
    j["learner_failed"] = failed;
    j["extractor_ready"] = extractor_ready;
    write_file(dir / "state.json", j.dump(2) + "\n");
    write_file(dir / "metrics.json", metrics.dump(2) + "\n");
  }

  void finalize(const RunResult& result) {
    fs::path final_dir = dir / "final";
    fs::create_directories(final_dir);
    write_file(final_dir / "domain.pddl", emit_domain(result.final_domain));
    write_file(final_dir / "registry.json", registry_to_json(result.registry));
    write_file(final_dir / "encoder.json", encoder.to_json());
    if (extractor_ready) write_file(final_dir / "extractor.json", extractor.to_json());
  }
};

std::vector<TokenizedSentence> tokenize_split(
    const std::vector<const CorpusRecord*>& records, const Vocabulary& vocab) {
  std::vector<TokenizedSentence> out;
  for (const auto* rec : records) {
    for (const auto& text : rec->task.texts)
      for (const auto& sentence : text)
        out.push_back(vocab.tokenize(sentence, rec->objects));
    for (const auto& sentence : rec->task.goal_text)
      out.push_back(vocab.tokenize(sentence, rec->objects));
  }
  return out;
}

RunResult run_loop(LoopState& state, int start_iteration) {
  const RunConfig& cfg = state.cfg;
  RunResult result;
  result.run_dir = state.dir.string();
  result.final_domain = state.domain;
  result.registry = state.extraction.registry;
  result.completed_iteration = start_iteration;

  if (!cfg.no_em) {
    std::vector<Proposition> prev_assignments = state.extraction.flat_assignments();
    for (int k = start_iteration + 1; k <= cfg.iterations; ++k) {
      Dataset data = build_dataset(state.records, state.extraction, state.domain,
                                   state.vocab, cfg.extractor);
      if (data.empty()) break;
      if (!state.extractor_ready || !cfg.warm_start) {
        state.extractor = ExtractorModel(state.encoder.config(), cfg.extractor,
                                         derive_seed(cfg.seed, 0x65787469ULL, k));
      }
      ExtractorReport ext_report;
      train_extractor(state.extractor, state.encoder, data,
                      derive_seed(cfg.seed, 0x747261696eULL, k), &ext_report);
      state.extractor_ready = true;

      ExtractionResult next =
          extract_with_model(state.records, state.extractor, state.encoder);
      ConsensusArtifacts art;
      try {
        art = learn_domain(state.records, next, state.headers, cfg, k);
      } catch (const SolverError&) {
        result.learner_failed = true;
        break;
      }
      state.extraction = std::move(next);
      state.domain = art.domain;
      state.checkpoint(k, art);
      result.completed_iteration = k;
      result.final_domain = state.domain;
      result.registry = state.extraction.registry;

      json iter_metrics;
      iter_metrics["iteration"] = k;
      iter_metrics["extractor_loss"] = ext_report.epoch_loss;
      iter_metrics["examples"] = ext_report.examples;
      iter_metrics["registry_size"] = state.extraction.registry.size();

      std::vector<Proposition> cur_assignments = state.extraction.flat_assignments();
      bool fixpoint = cur_assignments == prev_assignments;
      iter_metrics["extraction_fixpoint"] = fixpoint;
      state.metrics["iterations"].push_back(iter_metrics);
      state.write_state(k, false, false);

      if (cfg.early_stop && fixpoint) {
        result.early_stopped = true;
        break;
      }
      prev_assignments = std::move(cur_assignments);
    }
  }
  state.write_state(result.completed_iteration, result.early_stopped,
                    result.learner_failed);
  state.finalize(result);
  return result;
}

}  // namespace

RunResult run(const Corpus& corpus, const std::vector<ActionHeader>& headers,
              const RunConfig& cfg, const std::string& out_dir,
              const RunHooks& hooks) {
  LoopState state;
  state.cfg = cfg;
  state.dir = out_dir;
  fs::create_directories(state.dir);
  write_file(state.dir / "config.echo",
             hooks.config_echo.empty() ? echo_config(cfg) : hooks.config_echo);

  state.records = corpus.split("train");
  if (state.records.empty()) throw std::invalid_argument("run: no training records");
  state.headers = headers;
  state.vocab = Vocabulary::build(corpus, "train");

  VaeReport vae_report;
  std::vector<TokenizedSentence> sentences = tokenize_split(state.records, state.vocab);
  state.encoder =
      train_vae(sentences, state.vocab, cfg.encoder, cfg.seed, &vae_report);
  state.metrics["vae_loss"] = vae_report.epoch_loss;
  state.metrics["vae_recon"] = vae_report.epoch_recon;
  state.metrics["vae_kl"] = vae_report.epoch_kl;
  state.metrics["iterations"] = json::array();

  if (hooks.extraction_override) {
    state.extraction = *hooks.extraction_override;
  } else if (cfg.no_init) {
    // untrained extractor in place of the initializer
    state.extractor = ExtractorModel(state.encoder.config(), cfg.extractor,
                                     derive_seed(cfg.seed, 0x65787469ULL, 0));
    state.extractor_ready = true;
    state.extraction =
        extract_with_model(state.records, state.extractor, state.encoder);
  } else {
    state.extraction = initialize_traces(state.records, state.encoder, cfg.seed);
  }

  RunResult result;
  ConsensusArtifacts art;
  try {
    art = learn_domain(state.records, state.extraction, state.headers, cfg, 0);
  } catch (const SolverError& e) {
    // degenerate start (possible without the initializer): nothing to output
    throw std::runtime_error(std::string("initial action-model learning failed: ") +
                             e.what());
  }
  state.domain = art.domain;
  state.checkpoint(0, art);
  state.write_state(0, false, false);
  return run_loop(state, 0);
}

RunResult resume(const Corpus& corpus, const std::vector<ActionHeader>& headers,
                 const std::string& out_dir) {
  LoopState state;
  state.dir = out_dir;
  state.cfg = parse_config(read_file(state.dir / "config.echo"));
  json st = json::parse(read_file(state.dir / "state.json"));
  int completed = st.at("completed_iteration").get<int>();

  state.records = corpus.split("train");
  state.headers = headers;
  state.vocab = Vocabulary::build(corpus, "train");
  if (fs::exists(state.dir / "metrics.json"))
    state.metrics = json::parse(read_file(state.dir / "metrics.json"));

  fs::path it_dir = state.dir / ("iter_" + std::to_string(completed));
  state.encoder = EncoderModel::from_json(read_file(it_dir / "encoder.json"));
  state.extractor_ready = fs::exists(it_dir / "extractor.json");
  if (state.extractor_ready)
    state.extractor = ExtractorModel::from_json(read_file(it_dir / "extractor.json"));
  state.extraction = extraction_from_jsonl(read_file(it_dir / "extraction.jsonl"));
  state.extraction.registry = registry_from_json(read_file(it_dir / "registry.json"));
  state.domain = parse_domain(read_file(it_dir / "domain.pddl"));

  return run_loop(state, completed);
}

ExtractionResult extract_for_eval(const Corpus& corpus, const std::string& run_dir) {
  fs::path dir(run_dir);
  fs::path final_dir = dir / "final";
  RunConfig cfg = parse_config(read_file(dir / "config.echo"));
  EncoderModel enc = EncoderModel::from_json(read_file(final_dir / "encoder.json"));
  auto records = corpus.split("test");
  if (fs::exists(final_dir / "extractor.json")) {
    ExtractorModel ext =
        ExtractorModel::from_json(read_file(final_dir / "extractor.json"));
    return extract_with_model(records, ext, enc);
  }
  return initialize_traces(records, enc, cfg.seed);
}

}  // namespace textplan
