// Sentence representation learner: GRU encoder, Gaussian reparameterization
// onto a topic simplex, and an embedded-topic decoder back to bag-of-words.
// Trained with reconstruction cross-entropy plus a KL term.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "textplan/nn.hpp"
#include "textplan/vocab.hpp"

namespace textplan {

struct EncoderConfig {
  int embed_dim = 64;   // word/topic embedding width
  int hidden_dim = 64;  // GRU hidden width and h dimension
  int topics = 32;      // latent topic count
  int epochs = 3;
  double lr = 1e-2;
  int batch = 32;

  bool operator==(const EncoderConfig&) const = default;
};

class EncoderModel {
 public:
  EncoderModel() = default;
  EncoderModel(Vocabulary vocab, const EncoderConfig& cfg, std::uint64_t seed);

  const Vocabulary& vocabulary() const { return vocab_; }
  const EncoderConfig& config() const { return cfg_; }

  // ---- deterministic inference (no tape) ----
  Eigen::VectorXd encode(const TokenizedSentence& s) const;  // throws on empty input
  Eigen::VectorXd mu(const Eigen::VectorXd& h) const;
  Eigen::VectorXd logvar(const Eigen::VectorXd& h) const;
  // z = softmax(mu + sigma .* eps), eps ~ N(0, I) from rng
  Eigen::VectorXd reparameterize(const Eigen::VectorXd& h, std::mt19937_64& rng) const;
  Eigen::MatrixXd topic_word_logits() const;  // V Tᵀ, |words| × topics
  Eigen::MatrixXd decode_matrix() const;      // per-column softmax of V Tᵀ
  Eigen::VectorXd decode(const Eigen::VectorXd& z) const;

  struct WordScores {
    Eigen::VectorXd probs;      // P(w), sums to 1
    std::vector<int> ranking;   // word indices, descending probability
  };
  // P(w) = softmax(V Tᵀ input); input is a topic mixture or a raw head output.
  WordScores topic_word_scores(const Eigen::VectorXd& input) const;
  static WordScores rank(const Eigen::VectorXd& probs);

  // ---- tape forward, shared by training and gradient checks ----
  nn::Var embed(nn::Tape& t, int token_id);
  nn::Var encode_var(nn::Tape& t, const std::vector<int>& ids);
  nn::Var decode_matrix_var(nn::Tape& t);
  struct VaeLossVars {
    nn::Var total, recon, kl;
  };
  VaeLossVars vae_loss(nn::Tape& t, const TokenizedSentence& s,
                       const Eigen::VectorXd& noise, nn::Var decode_m);

  // Built on demand: the set holds pointers into this model instance, so it
  // must not outlive it or survive a copy.
  nn::ParamSet params();

  std::string to_json() const;
  static EncoderModel from_json(const std::string& text);

  // parameters
  nn::Tensor emb;                 // table_size × embed_dim
  nn::Tensor topics;              // topics × embed_dim
  nn::GruCell gru;
  nn::Affine out;                 // hidden → hidden (h head)
  nn::Affine mu_head, lv_head;    // hidden → topics

 private:
  Vocabulary vocab_;
  EncoderConfig cfg_;
};

struct VaeReport {
  std::vector<double> epoch_loss;   // epoch-mean total loss
  std::vector<double> epoch_recon;
  std::vector<double> epoch_kl;
  std::size_t trained_sentences = 0;
  std::size_t skipped_sentences = 0;  // empty or all-unknown, excluded
  long unk_tokens = 0;
};

// Plain SGD with the configured step size; deterministic given the seed.
// Throws std::runtime_error with diagnostics when the loss goes non-finite.
EncoderModel train_vae(const std::vector<TokenizedSentence>& sentences,
                       Vocabulary vocab, const EncoderConfig& cfg,
                       std::uint64_t seed, VaeReport* report = nullptr);

}  // namespace textplan
