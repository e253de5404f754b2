#include "textplan/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textplan/rng.hpp"

namespace textplan {

using json = nlohmann::ordered_json;

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  Eigen::ArrayXd a = x.array() - x.maxCoeff();
  Eigen::ArrayXd e = a.exp();
  return (e / e.sum()).matrix();
}

}  // namespace

EncoderModel::EncoderModel(Vocabulary vocab, const EncoderConfig& cfg,
                           std::uint64_t seed)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  auto rng = make_rng(seed, 0x656e63ULL);
  emb.v = nn::glorot(vocab_.table_size(), cfg.embed_dim, rng);
  topics.v = nn::glorot(cfg.topics, cfg.embed_dim, rng);
  gru.init(cfg.embed_dim, cfg.hidden_dim, rng);
  out.init(cfg.hidden_dim, cfg.hidden_dim, rng);
  mu_head.init(cfg.hidden_dim, cfg.topics, rng);
  lv_head.init(cfg.hidden_dim, cfg.topics, rng);
}

nn::ParamSet EncoderModel::params() {
  nn::ParamSet ps;
  ps.add("emb", &emb);
  ps.add("topics", &topics);
  gru.register_params(ps, "gru");
  out.register_params(ps, "out");
  mu_head.register_params(ps, "mu");
  lv_head.register_params(ps, "lv");
  return ps;
}

// ---------------------------------------------------------------- inference

Eigen::VectorXd EncoderModel::encode(const TokenizedSentence& s) const {
  if (s.ids.empty()) throw std::invalid_argument("encode: empty token sequence");
  Eigen::VectorXd h = Eigen::VectorXd::Zero(cfg_.hidden_dim);
  for (int id : s.ids) {
    Eigen::VectorXd x = emb.v.row(id).transpose();
    Eigen::VectorXd z =
        (1.0 / (1.0 + (-(gru.Wz.v * x + gru.Uz.v * h + gru.bz.v)).array().exp()))
            .matrix();
    Eigen::VectorXd r =
        (1.0 / (1.0 + (-(gru.Wr.v * x + gru.Ur.v * h + gru.br.v)).array().exp()))
            .matrix();
    Eigen::VectorXd n =
        (gru.Wn.v * x + gru.Un.v * r.cwiseProduct(h) + gru.bn.v).array().tanh();
    h = (1.0 - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(n);
  }
  return out.W.v * h + out.b.v;
}

Eigen::VectorXd EncoderModel::mu(const Eigen::VectorXd& h) const {
  return mu_head.W.v * h + mu_head.b.v;
}

Eigen::VectorXd EncoderModel::logvar(const Eigen::VectorXd& h) const {
  return lv_head.W.v * h + lv_head.b.v;
}

Eigen::VectorXd EncoderModel::reparameterize(const Eigen::VectorXd& h,
                                             std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd m = mu(h);
  Eigen::VectorXd sigma = (0.5 * logvar(h).array()).exp();
  Eigen::VectorXd eps(m.size());
  for (int i = 0; i < eps.size(); ++i) eps[i] = normal(rng);
  return softmax(m + sigma.cwiseProduct(eps));
}

Eigen::MatrixXd EncoderModel::topic_word_logits() const {
  return emb.v.topRows(vocab_.word_count()) * topics.v.transpose();
}

Eigen::MatrixXd EncoderModel::decode_matrix() const {
  Eigen::MatrixXd logits = topic_word_logits();
  Eigen::MatrixXd out_m(logits.rows(), logits.cols());
  for (int c = 0; c < logits.cols(); ++c) out_m.col(c) = softmax(logits.col(c));
  return out_m;
}

Eigen::VectorXd EncoderModel::decode(const Eigen::VectorXd& z) const {
  return decode_matrix() * z;
}

EncoderModel::WordScores EncoderModel::rank(const Eigen::VectorXd& probs) {
  WordScores ws;
  ws.probs = probs;
  ws.ranking.resize(probs.size());
  std::iota(ws.ranking.begin(), ws.ranking.end(), 0);
  std::stable_sort(ws.ranking.begin(), ws.ranking.end(), [&](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;  // deterministic tie-break by word index
  });
  return ws;
}

EncoderModel::WordScores EncoderModel::topic_word_scores(
    const Eigen::VectorXd& input) const {
  return rank(softmax(topic_word_logits() * input));
}

// ------------------------------------------------------------- tape forward

nn::Var EncoderModel::embed(nn::Tape& t, int token_id) {
  return t.transpose(t.rows(t.leaf(emb), token_id, 1));
}

nn::Var EncoderModel::encode_var(nn::Tape& t, const std::vector<int>& ids) {
  if (ids.empty()) throw std::invalid_argument("encode_var: empty token sequence");
  nn::Var h = t.constant(Eigen::MatrixXd::Zero(cfg_.hidden_dim, 1));
  for (int id : ids) h = gru.step(t, embed(t, id), h);
  return out.apply(t, h);
}

nn::Var EncoderModel::decode_matrix_var(nn::Tape& t) {
  nn::Var words = t.rows(t.leaf(emb), 0, vocab_.word_count());
  return t.softmax_cols(t.matmul(words, t.transpose(t.leaf(topics))));
}

EncoderModel::VaeLossVars EncoderModel::vae_loss(nn::Tape& t,
                                                 const TokenizedSentence& s,
                                                 const Eigen::VectorXd& noise,
                                                 nn::Var decode_m) {
  nn::Var h = encode_var(t, s.ids);
  nn::Var m = mu_head.apply(t, h);
  nn::Var lv = lv_head.apply(t, h);
  nn::Var sigma = t.exp(t.scale(lv, 0.5));
  nn::Var z = t.softmax_vec(t.add(m, t.cmul(sigma, t.constant(noise))));
  nn::Var bhat = t.matmul(decode_m, z);
  VaeLossVars loss;
  loss.recon = t.cross_entropy(s.bag, bhat);
  loss.kl = t.kl_std_normal(m, lv);
  loss.total = t.add(loss.recon, loss.kl);
  return loss;
}

// ----------------------------------------------------------------- training

EncoderModel train_vae(const std::vector<TokenizedSentence>& sentences,
                       Vocabulary vocab, const EncoderConfig& cfg,
                       std::uint64_t seed, VaeReport* report) {
  if (sentences.empty()) throw std::invalid_argument("train_vae: empty corpus");
  EncoderModel model(std::move(vocab), cfg, seed);

  std::vector<std::size_t> usable;
  VaeReport local;
  VaeReport& rep = report ? *report : local;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    rep.unk_tokens += sentences[i].unk_count;
    if (sentences[i].trainable())
      usable.push_back(i);
    else
      ++rep.skipped_sentences;
  }
  if (usable.empty()) throw std::invalid_argument("train_vae: no trainable sentences");
  rep.trained_sentences = usable.size();

  nn::Tape tape;
  nn::ParamSet params = model.params();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto shuffle_rng = make_rng(seed, 0x76736866ULL, epoch);
    std::vector<std::size_t> order = usable;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_total = 0, epoch_recon = 0, epoch_kl = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t end = std::min(order.size(), start + cfg.batch);
      tape.reset();
      nn::Var decode_m = model.decode_matrix_var(tape);
      nn::Var batch_loss;
      for (std::size_t k = start; k < end; ++k) {
        std::size_t idx = order[k];
        auto noise_rng = make_rng(seed, 0x76656e63ULL, epoch, idx);
        Eigen::VectorXd noise(cfg.topics);
        for (int i = 0; i < cfg.topics; ++i) noise[i] = normal(noise_rng);
        auto loss = model.vae_loss(tape, sentences[idx], noise, decode_m);
        epoch_recon += tape.scalar(loss.recon);
        epoch_kl += tape.scalar(loss.kl);
        epoch_total += tape.scalar(loss.total);
        batch_loss = batch_loss.valid() ? tape.add(batch_loss, loss.total) : loss.total;
      }
      nn::Var objective = tape.scale(batch_loss, 1.0 / (end - start));
      if (!std::isfinite(tape.scalar(objective))) {
        std::ostringstream os;
        os << "train_vae: non-finite loss at epoch " << epoch << ", batch starting "
           << start << " (loss=" << tape.scalar(objective) << ")";
        throw std::runtime_error(os.str());
      }
      params.zero_grad();
      tape.backward(objective);
      params.sgd_step(cfg.lr);
    }
    rep.epoch_loss.push_back(epoch_total / order.size());
    rep.epoch_recon.push_back(epoch_recon / order.size());
    rep.epoch_kl.push_back(epoch_kl / order.size());
  }
  return model;
}

// ------------------------------------------------------------- checkpointing

namespace {

json tensor_to_json(const nn::Tensor& t) {
  json j;
  j["rows"] = t.v.rows();
  j["cols"] = t.v.cols();
  json data = json::array();
  for (int r = 0; r < t.v.rows(); ++r)
    for (int c = 0; c < t.v.cols(); ++c) data.push_back(t.v(r, c));
  j["data"] = std::move(data);
  return j;
}

void tensor_from_json(const json& j, nn::Tensor& t) {
  int rows = j.at("rows").get<int>();
  int cols = j.at("cols").get<int>();
  t.v.resize(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<int>(data.size()) != rows * cols)
    throw std::runtime_error("tensor size mismatch in checkpoint");
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t.v(r, c) = data[k++].get<double>();
}

}  // namespace

std::string EncoderModel::to_json() const {
  json j;
  j["format"] = "textplan-model-v1";
  j["kind"] = "encoder";
  j["config"] = {{"embed_dim", cfg_.embed_dim}, {"hidden_dim", cfg_.hidden_dim},
                 {"topics", cfg_.topics},       {"epochs", cfg_.epochs},
                 {"lr", cfg_.lr},               {"batch", cfg_.batch}};
  j["vocab"]["words"] = vocab_.words();
  j["vocab"]["types"] = vocab_.placeholder_types();
  json tensors = json::object();
  nn::ParamSet ps = const_cast<EncoderModel*>(this)->params();
  for (const auto& [name, t] : ps.items()) tensors[name] = tensor_to_json(*t);
  j["tensors"] = std::move(tensors);
  return j.dump();
}

EncoderModel EncoderModel::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != "textplan-model-v1" || j.value("kind", "") != "encoder")
    throw std::runtime_error("not an encoder checkpoint");
  EncoderConfig cfg;
  cfg.embed_dim = j["config"].at("embed_dim").get<int>();
  cfg.hidden_dim = j["config"].at("hidden_dim").get<int>();
  cfg.topics = j["config"].at("topics").get<int>();
  cfg.epochs = j["config"].at("epochs").get<int>();
  cfg.lr = j["config"].at("lr").get<double>();
  cfg.batch = j["config"].at("batch").get<int>();
  Vocabulary vocab = Vocabulary::from_words(
      j["vocab"].at("words").get<std::vector<std::string>>(),
      j["vocab"].at("types").get<std::vector<std::string>>());
  EncoderModel model(std::move(vocab), cfg, 0);
  nn::ParamSet ps = model.params();
  for (const auto& [name, t] : ps.items()) {
    if (!j["tensors"].contains(name))
      throw std::runtime_error("checkpoint missing tensor " + name);
    tensor_from_json(j["tensors"][name], *t);
  }
  return model;
}

}  // namespace textplan
