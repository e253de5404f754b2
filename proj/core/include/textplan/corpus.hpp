// Synthetic corpus construction: random solvable problems, planner traces,
// and templated rendering of states to sentences with per-sentence gold
// labels (held out from the learners; used only by evaluation).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textplan/planner.hpp"
#include "textplan/templates.hpp"

namespace textplan {

struct WalkConfig {
  int init_walk_max = 6;   // random steps applied to the base state for init
  int walk_min = 2;        // goal walk length bounds
  int walk_max = 10;
  int goal_min = 1;        // goal proposition count bounds
  int goal_max = 3;
  std::size_t node_budget = 200000;
};

// Problems are generated goal-last: walk applicable actions from the
// initial state, then take the goal from the reached state, so every
// problem is solvable by construction.
std::vector<Problem> generate_problems(const DomainBundle& bundle, int count,
                                       std::uint64_t seed,
                                       const WalkConfig& cfg = {});

struct RenderedText {
  Text sentences;
  std::vector<Proposition> gold;  // gold[j] is the source of sentences[j]
};

RenderedText render_state(const State& state, const TemplateSet& templates,
                          std::uint64_t seed);

// One sentence per proposition per state, template chosen uniformly at
// random, sentence order shuffled per text.
std::vector<RenderedText> render(const std::vector<State>& trace,
                                 const TemplateSet& templates, std::uint64_t seed);

struct CorpusRecord {
  int id = 0;
  std::string split;  // "train" | "test"
  std::vector<ObjectRef> objects;
  TaskRecord task;
  std::vector<std::vector<Proposition>> gold;  // aligned with task.texts
  std::vector<Proposition> goal_gold;          // aligned with task.goal_text

  void validate() const;
};

struct Corpus {
  std::string domain_name;
  std::vector<CorpusRecord> records;

  std::vector<const CorpusRecord*> split(const std::string& which) const;
  std::size_t sentence_count() const;
};

Corpus build_corpus(const DomainBundle& bundle, int train_count, int test_count,
                    std::uint64_t seed, const WalkConfig& cfg = {});

// Line-delimited JSON, one record per line; manifest carries the action
// headers and object table the learners are entitled to see.
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus corpus_from_jsonl(const std::string& text);
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

std::string manifest_json(const Corpus& corpus, std::uint64_t seed);

// Action name -> parameter types, recovered from typed plan arguments.
std::vector<ActionHeader> headers_from_corpus(const Corpus& corpus);

}  // namespace textplan
