// Trace initializer: maps each sentence to a proposition by walking the
// word ranking under the rule cascade, growing the registry of topical
// propositions as it goes.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "textplan/corpus.hpp"
#include "textplan/encoder.hpp"

namespace textplan {

// Object names found verbatim in the sentence, in order of first
// occurrence, typed from the task's object table. Empty result is fine
// (zero-arity propositions).
std::vector<ObjectRef> extract_parameters(const std::string& sentence,
                                          const std::vector<ObjectRef>& task_objects);

struct RuleOutcome {
  Proposition p;
  int registry_index = -1;  // entry matching the emitted proposition
  bool created = false;     // rule 1 fired
  bool fallback = false;    // ranking exhausted; registered under top word
};

// Walks P(w) in descending order:
//   rule 1: unheaded word -> new proposition, register its topical lift;
//   rule 2: word heads an entry whose signature permutes theta's types ->
//           emit with theta reordered to the registered signature
//           (same-type positions keep the given order);
//   rule 3: word heads only incompatible entries -> skip the word.
// If every word is blocked by rule 3, registers a fresh signature under
// the top-ranked word and flags the conflict.
RuleOutcome apply_rule(PropositionRegistry& psi, const EncoderModel::WordScores& ranking,
                       const std::vector<ObjectRef>& theta,
                       const std::vector<std::string>& words);

struct SentenceAssignment {
  Proposition p;
  int registry_index = -1;
  int sentence = -1;  // index within its text
};

struct TaskExtraction {
  std::vector<State> states;                             // one per text
  State goal;
  std::vector<std::vector<SentenceAssignment>> text_assignments;
  std::vector<SentenceAssignment> goal_assignments;
};

struct ExtractionResult {
  std::vector<TaskExtraction> tasks;  // aligned with the records extracted
  PropositionRegistry registry;
  std::size_t fallback_count = 0;
  std::size_t skipped_sentences = 0;  // empty token sequences

  // Per-sentence propositions in (task, text, sentence) order; goal text
  // counts as the final text. Used for fixpoint detection.
  std::vector<Proposition> flat_assignments() const;
};

// P(w) provider for one sentence; the encoder-backed scorer is the default
// and tests may substitute an oracle.
using SentenceScorer = std::function<EncoderModel::WordScores(
    std::size_t task_idx, std::size_t text_idx, std::size_t sent_idx,
    const TokenizedSentence& tok)>;

// z = R(E(f)) with reparameterization noise seeded per (task, text,
// sentence); P(w) = softmax(V Tᵀ z).
SentenceScorer encoder_scorer(EncoderModel& model, std::uint64_t seed);

ExtractionResult initialize_traces(const std::vector<const CorpusRecord*>& records,
                                   const EncoderModel& model,
                                   const SentenceScorer& scorer);

// Convenience: trains nothing, uses the model's own sampled-z scorer.
ExtractionResult initialize_traces(const std::vector<const CorpusRecord*>& records,
                                   EncoderModel& model, std::uint64_t seed);

}  // namespace textplan
