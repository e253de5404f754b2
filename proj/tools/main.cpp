// textplan: corpus generation, pipeline runs, evaluation, and artifact
// inspection behind one binary.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "textplan/emloop.hpp"
#include "textplan/pddl.hpp"

namespace fs = std::filesystem;
using namespace textplan;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// --out is resolved against TEXTPLAN_OUT when relative.
std::string resolve_out(const std::string& out) {
  const char* root = std::getenv("TEXTPLAN_OUT");
  if (!root || fs::path(out).is_absolute()) return out;
  return (fs::path(root) / out).string();
}

struct RunFlags {
  std::string corpus_path;
  std::string config_path;
  std::string out = "run";
  // flag overlay; only flags the user actually passed are applied
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int> threads;
  bool no_em = false;
  bool no_init = false;
};

int cmd_gen(const std::string& domain, int train, int test, std::uint64_t seed,
            const std::string& out) {
  const DomainBundle& bundle = bundled_domain(domain);
  Corpus corpus = build_corpus(bundle, train, test, seed);
  std::string path = resolve_out(out);
  if (!fs::path(path).parent_path().empty())
    fs::create_directories(fs::path(path).parent_path());
  save_corpus(corpus, path);
  write_file(path + ".manifest.json", manifest_json(corpus, seed));
  std::cout << "wrote " << corpus.records.size() << " records ("
            << corpus.split("train").size() << " train, "
            << corpus.split("test").size() << " test), "
            << corpus.sentence_count() << " sentences -> " << path << "\n";
  return 0;
}

int cmd_run(const RunFlags& flags) {
  ConfigOverlay overlay;
  if (flags.seed) overlay.set("run.seed", std::to_string(*flags.seed));
  if (flags.iterations)
    overlay.set("run.iterations", std::to_string(*flags.iterations));
  if (flags.threads) overlay.set("run.threads", std::to_string(*flags.threads));
  if (flags.no_em) overlay.set("run.no_em", "true");
  if (flags.no_init) overlay.set("run.no_init", "true");

  std::string file_text;
  std::map<std::string, std::string> file_values;
  if (!flags.config_path.empty()) {
    file_text = read_file(flags.config_path);
    file_values = read_config_values(file_text);
  }
  RunConfig cfg = parse_config(file_text, overlay,
                               flags.config_path.empty() ? "<none>" : flags.config_path);

  Corpus corpus = load_corpus(flags.corpus_path);
  auto headers = headers_from_corpus(corpus);
  RunHooks hooks;
  hooks.config_echo = echo_config(cfg, overlay, file_values);
  RunResult result = run(corpus, headers, cfg, resolve_out(flags.out), hooks);
  std::cout << "run finished: " << result.completed_iteration << " iterations"
            << (result.early_stopped ? " (extraction fixpoint)" : "")
            << (result.learner_failed ? " (learner failed, last domain kept)" : "")
            << "\nfinal domain: " << result.run_dir << "/final/domain.pddl\n";
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& corpus_path,
             const std::string& out) {
  Corpus corpus = load_corpus(corpus_path);
  Domain domain =
      parse_domain(read_file((fs::path(run_dir) / "final" / "domain.pddl").string()));
  ExtractionResult extraction = extract_for_eval(corpus, run_dir);
  RunConfig cfg = parse_config(read_file((fs::path(run_dir) / "config.echo").string()));

  auto records = corpus.split("test");
  std::vector<EvalInput> inputs;
  std::vector<int> predicted, gold;
  std::map<TopicalProposition, int> gold_ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TaskExtraction& task = extraction.tasks.at(i);
    EvalInput input;
    input.record_id = records[i]->id;
    input.plan = records[i]->task.plan;
    if (!task.states.empty()) input.initial = task.states.front();
    input.goal = task.goal;
    inputs.push_back(std::move(input));
    // clustering pairs: predicted registry index vs gold topical proposition
    for (std::size_t xi = 0; xi < task.text_assignments.size(); ++xi)
      for (const auto& a : task.text_assignments[xi]) {
        predicted.push_back(a.registry_index);
        auto tp = topical_of(records[i]->gold.at(xi).at(a.sentence));
        gold.push_back(gold_ids.emplace(tp, gold_ids.size()).first->second);
      }
    for (const auto& a : task.goal_assignments) {
      predicted.push_back(a.registry_index);
      auto tp = topical_of(records[i]->goal_gold.at(a.sentence));
      gold.push_back(gold_ids.emplace(tp, gold_ids.size()).first->second);
    }
  }
  MetricsReport report = evaluate(domain, inputs, predicted, gold, cfg.eval);
  std::cout << report.table();
  std::string out_path = out.empty()
                             ? (fs::path(run_dir) / "metrics.eval.json").string()
                             : resolve_out(out);
  write_file(out_path, report.to_json());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) {
    // run directory: show state, final domain, metrics
    for (const char* name : {"state.json", "metrics.json"}) {
      fs::path f = p / name;
      if (fs::exists(f)) std::cout << "== " << name << " ==\n" << read_file(f.string());
    }
    fs::path dom = p / "final" / "domain.pddl";
    if (fs::exists(dom))
      std::cout << "== final/domain.pddl ==\n" << read_file(dom.string());
    return 0;
  }
  std::string text = read_file(path);
  if (p.extension() == ".pddl") {
    Domain d = parse_domain(text);
    std::cout << "domain " << d.name << ": " << d.types.size() << " types, "
              << d.predicates.size() << " predicates, " << d.actions.size()
              << " actions\n";
    for (const auto& a : d.actions) {
      std::cout << "  " << a.name << "/" << a.params.size() << ": pre="
                << a.pre.size() << " add=" << a.add.size() << " del=" << a.del.size()
                << "\n";
    }
    return 0;
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learn STRIPS action models from textual observation traces"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  std::string gen_domain = "blocks";
  int gen_train = 500, gen_test = 100;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "corpus.jsonl";
  gen->add_option("--domain", gen_domain, "bundled domain: blocks|minecraft|baking");
  gen->add_option("--train", gen_train, "training records");
  gen->add_option("--test", gen_test, "test records");
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--out", gen_out, "output corpus path (.jsonl)");

  // run
  auto* run_cmd = app.add_subcommand("run", "train the pipeline on a corpus");
  RunFlags rf;
  std::uint64_t run_seed = 0;
  int run_iters = 0, run_threads = 0;
  run_cmd->add_option("--corpus", rf.corpus_path, "corpus .jsonl path")->required();
  run_cmd->add_option("--config", rf.config_path, "config file");
  run_cmd->add_option("--out", rf.out, "run directory");
  auto* seed_opt = run_cmd->add_option("--seed", run_seed, "run seed");
  auto* iter_opt = run_cmd->add_option("--iterations", run_iters, "loop iterations");
  auto* thread_opt = run_cmd->add_option("--threads", run_threads, "worker threads");
  run_cmd->add_flag("--no-em", rf.no_em, "skip the improvement loop");
  run_cmd->add_flag("--no-init", rf.no_init,
                    "skip the initializer; start from the untrained extractor");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a finished run");
  std::string eval_run, eval_corpus, eval_out;
  eval_cmd->add_option("--run", eval_run, "run directory")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "corpus .jsonl path")->required();
  eval_cmd->add_option("--out", eval_out, "metrics output path");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "pretty-print artifacts");
  std::string inspect_path;
  inspect_cmd->add_option("path", inspect_path, "run dir, .pddl, or .json file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << app.help() << "\n";
    return app.exit(e, std::cerr, std::cerr) ? 1 : 1;
  }

  try {
    if (*gen) return cmd_gen(gen_domain, gen_train, gen_test, gen_seed, gen_out);
    if (*run_cmd) {
      if (seed_opt->count()) rf.seed = run_seed;
      if (iter_opt->count()) rf.iterations = run_iters;
      if (thread_opt->count()) rf.threads = run_threads;
      return cmd_run(rf);
    }
    if (*eval_cmd) return cmd_eval(eval_run, eval_corpus, eval_out);
    if (*inspect_cmd) return cmd_inspect(inspect_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
