// Neural proposition extractor: a predicate generator over the encoder's
// hidden state and a parameter sequencer that orders the extracted objects,
// plus the training-set builder that reconciles extracted traces with
// traces simulated under the current conclusive domain.
#pragma once

#include <cstdint>
#include <optional>

#include "textplan/encoder.hpp"
#include "textplan/initializer.hpp"

namespace textplan {

struct ExtractorConfig {
  int epochs = 3;
  double lr = 1e-4;
  int batch = 32;
  int max_index_arity = 2;  // one-hot width of the index sequence

  bool operator==(const ExtractorConfig&) const = default;
};

struct TrainingExample {
  std::string sentence;
  TokenizedSentence tok;
  std::vector<ObjectRef> theta;   // sentence order (sequencer input)
  int predicate_word = -1;        // target, vocabulary word index
  std::vector<int> index_seq;     // target slot of each sentence-order parameter
};

using Dataset = std::vector<TrainingExample>;

// Non-strict progression under a possibly inconsistent mid-run domain.
std::vector<State> simulate(const Domain& domain, const State& s0,
                            const std::vector<GroundAction>& plan);

struct ExtractorModel {
  ExtractorModel() = default;
  ExtractorModel(const EncoderConfig& enc_cfg, const ExtractorConfig& cfg,
                 std::uint64_t seed);

  const ExtractorConfig& config() const { return cfg_; }

  // deterministic encoder path (no reparameterization noise)
  EncoderModel::WordScores predicate_scores(const EncoderModel& enc,
                                            const Eigen::VectorXd& h) const;
  // predicted slot per sentence-order parameter; collisions and
  // out-of-range slots fall back to sentence order
  std::vector<int> sequence_indices(const EncoderModel& enc, const Eigen::VectorXd& h,
                                    const std::vector<ObjectRef>& theta) const;

  nn::Var dataset_loss(nn::Tape& t, EncoderModel& enc, const TrainingExample& ex,
                       nn::Var topic_logits_m);

  nn::ParamSet params();

  std::string to_json() const;
  static ExtractorModel from_json(const std::string& text);

  // δρ: two affine layers with tanh between, hidden → topics
  nn::Affine rho1, rho2;
  // δθ: GRU over parameter-type embeddings, seeded with h; affine to slots
  nn::GruCell seq_gru;
  nn::Affine seq_out;

 private:
  ExtractorConfig cfg_;
};

// Case A reorders parameters to the simulated proposition when a unique
// same-predicate permutation of the same objects exists; Case B relabels
// the predicate when the simulated state holds the same parameters in the
// same order under a different predicate. Sentences and their count are
// never changed.
Dataset build_dataset(const std::vector<const CorpusRecord*>& records,
                      const ExtractionResult& extraction, const Domain& domain,
                      const Vocabulary& vocab, const ExtractorConfig& cfg);

struct ExtractorReport {
  std::vector<double> epoch_loss;
  std::size_t examples = 0;
};

// Joint cross-entropy over predicate and index sequence; the encoder is
// updated with the same step size.
void train_extractor(ExtractorModel& model, EncoderModel& enc, const Dataset& data,
                     std::uint64_t seed, ExtractorReport* report = nullptr);

struct Prediction {
  Proposition p;
  int registry_index = -1;
  std::vector<int> index_seq;
};

// Full extraction path: predicate scores via the deterministic encoder,
// parameters reordered by the sequencer, then the rule cascade against the
// current registry.
Prediction predict(ExtractorModel& model, EncoderModel& enc,
                   const std::string& sentence, const std::vector<ObjectRef>& objects,
                   PropositionRegistry& psi);

// Extraction of whole records with the trained extractor (fresh registry
// owned by the caller).
ExtractionResult extract_with_model(const std::vector<const CorpusRecord*>& records,
                                    ExtractorModel& model, EncoderModel& enc);

std::string dataset_to_jsonl(const Dataset& data, const Vocabulary& vocab);

}  // namespace textplan
