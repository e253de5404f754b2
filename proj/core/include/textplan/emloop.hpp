// Pipeline orchestration: train the sentence encoder, initialize traces,
// learn per-plan domains and a consensus domain, then alternate extractor
// training and relearning until the iteration budget or an extraction
// fixpoint. Every iteration is checkpointed; runs are resumable.
#pragma once

#include <optional>
#include <string>

#include "textplan/config.hpp"
#include "textplan/extractor.hpp"

namespace textplan {

struct RunResult {
  Domain final_domain;
  PropositionRegistry registry;
  int completed_iteration = 0;  // 0 = initial learn only
  bool early_stopped = false;
  bool learner_failed = false;  // solver gave up; last good domain kept
  std::string run_dir;
};

struct RunHooks {
  // Test hook: replaces the initial extraction (e.g. gold labels).
  std::optional<ExtractionResult> extraction_override;
  // Config echo written verbatim into the run directory; when empty a
  // default-provenance echo is generated.
  std::string config_echo;
};

RunResult run(const Corpus& corpus, const std::vector<ActionHeader>& headers,
              const RunConfig& cfg, const std::string& out_dir,
              const RunHooks& hooks = {});

// Continues an interrupted run from its last completed iteration; the
// remaining iterations reproduce an uninterrupted run bit-identically.
RunResult resume(const Corpus& corpus, const std::vector<ActionHeader>& headers,
                 const std::string& out_dir);

// Extraction artifacts round-trip (states are rebuilt from assignments).
std::string extraction_to_jsonl(const ExtractionResult& ext);
ExtractionResult extraction_from_jsonl(const std::string& text);
std::string registry_to_json(const PropositionRegistry& psi);
PropositionRegistry registry_from_json(const std::string& text);

// Test-split extraction with the models saved by a finished run: the
// trained extractor when one exists, otherwise the initializer path.
ExtractionResult extract_for_eval(const Corpus& corpus, const std::string& run_dir);

// Gold extraction (labels, states, goals straight from the corpus); oracle
// input for the learners and the evaluator.
ExtractionResult gold_extraction(const std::vector<const CorpusRecord*>& records);

}  // namespace textplan
