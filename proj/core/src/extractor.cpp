#include "textplan/extractor.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textplan/rng.hpp"

namespace textplan {

using json = nlohmann::ordered_json;

std::vector<State> simulate(const Domain& domain, const State& s0,
                            const std::vector<GroundAction>& plan) {
  std::vector<State> out;
  out.push_back(s0);
  for (const auto& action : plan)
    out.push_back(apply(out.back(), action, domain, /*strict=*/false));
  return out;
}

ExtractorModel::ExtractorModel(const EncoderConfig& enc_cfg,
                               const ExtractorConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  auto rng = make_rng(seed, 0x657874ULL);
  rho1.init(enc_cfg.hidden_dim, enc_cfg.hidden_dim, rng);
  rho2.init(enc_cfg.hidden_dim, enc_cfg.topics, rng);
  seq_gru.init(enc_cfg.embed_dim, enc_cfg.hidden_dim, rng);
  seq_out.init(enc_cfg.hidden_dim, cfg.max_index_arity, rng);
}

nn::ParamSet ExtractorModel::params() {
  nn::ParamSet ps;
  rho1.register_params(ps, "rho1");
  rho2.register_params(ps, "rho2");
  seq_gru.register_params(ps, "seq_gru");
  seq_out.register_params(ps, "seq_out");
  return ps;
}

EncoderModel::WordScores ExtractorModel::predicate_scores(
    const EncoderModel& enc, const Eigen::VectorXd& h) const {
  Eigen::VectorXd hidden = (rho1.W.v * h + rho1.b.v).array().tanh();
  Eigen::VectorXd head = rho2.W.v * hidden + rho2.b.v;
  return enc.topic_word_scores(head);
}

std::vector<int> ExtractorModel::sequence_indices(
    const EncoderModel& enc, const Eigen::VectorXd& h,
    const std::vector<ObjectRef>& theta) const {
  std::vector<int> slots;
  if (theta.empty()) return slots;
  Eigen::VectorXd state = h;
  for (const auto& obj : theta) {
    int ph = enc.vocabulary().placeholder_index(obj.type);
    if (ph < 0) ph = enc.vocabulary().unk_index();
    Eigen::VectorXd x = enc.emb.v.row(ph).transpose();
    Eigen::VectorXd z =
        (1.0 / (1.0 +
                (-(seq_gru.Wz.v * x + seq_gru.Uz.v * state + seq_gru.bz.v)).array().exp()))
            .matrix();
    Eigen::VectorXd r =
        (1.0 / (1.0 +
                (-(seq_gru.Wr.v * x + seq_gru.Ur.v * state + seq_gru.br.v)).array().exp()))
            .matrix();
    Eigen::VectorXd nn_ =
        (seq_gru.Wn.v * x + seq_gru.Un.v * r.cwiseProduct(state) + seq_gru.bn.v)
            .array()
            .tanh();
    state = (1.0 - z.array()).matrix().cwiseProduct(state) + z.cwiseProduct(nn_);
    Eigen::VectorXd logits = seq_out.W.v * state + seq_out.b.v;
    int slot = 0;
    logits.maxCoeff(&slot);
    slots.push_back(slot);
  }
  // collisions or out-of-range slots fall back to sentence order
  std::vector<bool> taken(theta.size(), false);
  std::vector<int> result(theta.size(), -1);
  std::vector<std::size_t> unplaced;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    int s = slots[i];
    if (s >= 0 && s < static_cast<int>(theta.size()) && !taken[s]) {
      taken[s] = true;
      result[i] = s;
    } else {
      unplaced.push_back(i);
    }
  }
  int cursor = 0;
  for (std::size_t i : unplaced) {
    while (taken[cursor]) ++cursor;
    taken[cursor] = true;
    result[i] = cursor;
  }
  return result;
}

nn::Var ExtractorModel::dataset_loss(nn::Tape& t, EncoderModel& enc,
                                     const TrainingExample& ex,
                                     nn::Var topic_logits_m) {
  nn::Var h = enc.encode_var(t, ex.tok.ids);
  nn::Var head = rho2.apply(t, t.tanh(rho1.apply(t, h)));
  nn::Var word_probs = t.softmax_vec(t.matmul(topic_logits_m, head));
  Eigen::MatrixXd target =
      Eigen::MatrixXd::Zero(enc.vocabulary().word_count(), 1);
  target(ex.predicate_word, 0) = 1.0;
  nn::Var loss = t.cross_entropy(target, word_probs);

  nn::Var state = h;
  for (std::size_t i = 0; i < ex.theta.size(); ++i) {
    int ph = enc.vocabulary().placeholder_index(ex.theta[i].type);
    if (ph < 0) ph = enc.vocabulary().unk_index();
    state = seq_gru.step(t, enc.embed(t, ph), state);
    nn::Var logits = seq_out.apply(t, state);
    Eigen::MatrixXd slot_target = Eigen::MatrixXd::Zero(cfg_.max_index_arity, 1);
    slot_target(ex.index_seq[i], 0) = 1.0;
    loss = t.add(loss, t.cross_entropy(slot_target, t.softmax_vec(logits)));
  }
  return loss;
}

// --------------------------------------------------------- dataset building

namespace {

bool same_object_multiset(const std::vector<ObjectRef>& a,
                          const std::vector<ObjectRef>& b) {
  if (a.size() != b.size()) return false;
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

std::vector<int> index_sequence(const std::vector<ObjectRef>& sentence_order,
                                const std::vector<ObjectRef>& target_order) {
  std::vector<int> seq(sentence_order.size(), -1);
  std::vector<bool> used(target_order.size(), false);
  for (std::size_t i = 0; i < sentence_order.size(); ++i) {
    for (std::size_t j = 0; j < target_order.size(); ++j) {
      if (used[j] || !(target_order[j] == sentence_order[i])) continue;
      seq[i] = static_cast<int>(j);
      used[j] = true;
      break;
    }
  }
  return seq;
}

}  // namespace

Dataset build_dataset(const std::vector<const CorpusRecord*>& records,
                      const ExtractionResult& extraction, const Domain& domain,
                      const Vocabulary& vocab, const ExtractorConfig& cfg) {
  Dataset out;
  for (std::size_t ti = 0; ti < records.size(); ++ti) {
    const CorpusRecord& rec = *records[ti];
    const TaskExtraction& ext = extraction.tasks.at(ti);
    std::vector<State> simulated;
    if (!ext.states.empty())
      simulated = simulate(domain, ext.states.front(), rec.task.plan);

    auto emit = [&](const std::string& sentence, const Proposition& target) {
      TrainingExample ex;
      ex.sentence = sentence;
      ex.tok = vocab.tokenize(sentence, rec.objects);
      ex.theta = extract_parameters(sentence, rec.objects);
      ex.predicate_word = vocab.word_index(target.predicate);
      ex.index_seq = index_sequence(ex.theta, target.params);
      bool in_range = std::all_of(ex.index_seq.begin(), ex.index_seq.end(),
                                  [&](int s) { return s >= 0 && s < cfg.max_index_arity; });
      if (ex.predicate_word < 0 || !in_range || ex.tok.ids.empty()) return false;
      out.push_back(std::move(ex));
      return true;
    };

    auto revised_target = [&](const Proposition& p, std::size_t text_idx) {
      Proposition target = p;
      if (text_idx == 0 || text_idx >= simulated.size()) return target;
      const State& sim = simulated[text_idx];
      // Case A: unique same-predicate permutation of the same objects
      const Proposition* reorder = nullptr;
      int reorder_count = 0;
      // Case B: same parameters in the same order, different predicate
      const Proposition* relabel = nullptr;
      int relabel_count = 0;
      for (const auto& cand : sim.props) {
        if (cand.predicate == p.predicate && cand.params != p.params &&
            same_object_multiset(cand.params, p.params)) {
          reorder = &cand;
          ++reorder_count;
        }
        if (cand.predicate != p.predicate && cand.params == p.params) {
          relabel = &cand;
          ++relabel_count;
        }
      }
      if (reorder_count == 1) {
        target.params = reorder->params;
      } else if (relabel_count == 1) {
        target.predicate = relabel->predicate;
      }
      return target;
    };

    for (std::size_t xi = 0; xi < rec.task.texts.size(); ++xi)
      for (const auto& a : ext.text_assignments.at(xi))
        emit(rec.task.texts[xi].at(a.sentence), revised_target(a.p, xi));
    for (const auto& a : ext.goal_assignments)
      emit(rec.task.goal_text.at(a.sentence), a.p);
  }
  return out;
}

// ----------------------------------------------------------------- training

void train_extractor(ExtractorModel& model, EncoderModel& enc, const Dataset& data,
                     std::uint64_t seed, ExtractorReport* report) {
  if (data.empty()) throw std::invalid_argument("train_extractor: empty dataset");
  const ExtractorConfig& cfg = model.config();
  ExtractorReport local;
  ExtractorReport& rep = report ? *report : local;
  rep.examples = data.size();

  nn::ParamSet params = model.params();
  nn::ParamSet enc_params = enc.params();
  for (const auto& [name, t] : enc_params.items()) params.add("enc." + name, t);

  nn::Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto shuffle_rng = make_rng(seed, 0x65787368ULL, epoch);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t end = std::min(order.size(), start + cfg.batch);
      tape.reset();
      // V Tᵀ shared across the batch
      nn::Var logits_m = tape.matmul(
          tape.rows(tape.leaf(enc.emb), 0, enc.vocabulary().word_count()),
          tape.transpose(tape.leaf(enc.topics)));
      nn::Var batch_loss;
      for (std::size_t k = start; k < end; ++k) {
        nn::Var loss = model.dataset_loss(tape, enc, data[order[k]], logits_m);
        epoch_loss += tape.scalar(loss);
        batch_loss = batch_loss.valid() ? tape.add(batch_loss, loss) : loss;
      }
      nn::Var objective = tape.scale(batch_loss, 1.0 / (end - start));
      if (!std::isfinite(tape.scalar(objective)))
        throw std::runtime_error("train_extractor: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(start / cfg.batch));
      params.zero_grad();
      tape.backward(objective);
      params.sgd_step(cfg.lr);
    }
    rep.epoch_loss.push_back(epoch_loss / order.size());
  }
}

// ---------------------------------------------------------------- inference

Prediction predict(ExtractorModel& model, EncoderModel& enc,
                   const std::string& sentence, const std::vector<ObjectRef>& objects,
                   PropositionRegistry& psi) {
  TokenizedSentence tok = enc.vocabulary().tokenize(sentence, objects);
  if (tok.ids.empty()) throw std::invalid_argument("predict: empty sentence");
  Eigen::VectorXd h = enc.encode(tok);
  std::vector<ObjectRef> theta = extract_parameters(sentence, objects);

  Prediction pred;
  pred.index_seq = model.sequence_indices(enc, h, theta);
  std::vector<ObjectRef> ordered(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) ordered[pred.index_seq[i]] = theta[i];

  auto scores = model.predicate_scores(enc, h);
  RuleOutcome outcome = apply_rule(psi, scores, ordered, enc.vocabulary().words());
  pred.p = outcome.p;
  pred.registry_index = outcome.registry_index;
  return pred;
}

ExtractionResult extract_with_model(const std::vector<const CorpusRecord*>& records,
                                    ExtractorModel& model, EncoderModel& enc) {
  ExtractionResult result;
  for (const auto* rec_ptr : records) {
    const CorpusRecord& rec = *rec_ptr;
    TaskExtraction ext;
    auto handle = [&](const Text& text, State& state,
                      std::vector<SentenceAssignment>& assigns) {
      for (std::size_t si = 0; si < text.size(); ++si) {
        TokenizedSentence tok = enc.vocabulary().tokenize(text[si], rec.objects);
        if (tok.ids.empty()) {
          ++result.skipped_sentences;
          continue;
        }
        Prediction pred = predict(model, enc, text[si], rec.objects, result.registry);
        state.insert(pred.p);
        assigns.push_back({pred.p, pred.registry_index, static_cast<int>(si)});
      }
    };
    for (const auto& text : rec.task.texts) {
      State s;
      std::vector<SentenceAssignment> assigns;
      handle(text, s, assigns);
      ext.states.push_back(std::move(s));
      ext.text_assignments.push_back(std::move(assigns));
    }
    handle(rec.task.goal_text, ext.goal, ext.goal_assignments);
    result.tasks.push_back(std::move(ext));
  }
  return result;
}

// ------------------------------------------------------------- housekeeping

std::string dataset_to_jsonl(const Dataset& data, const Vocabulary& vocab) {
  std::ostringstream os;
  for (const auto& ex : data) {
    json j;
    j["sentence"] = ex.sentence;
    j["predicate"] = vocab.word(ex.predicate_word);
    json params = json::array();
    for (const auto& o : ex.theta) params.push_back(o.name);
    j["params"] = std::move(params);
    j["index_seq"] = ex.index_seq;
    os << j.dump() << '\n';
  }
  return os.str();
}

std::string ExtractorModel::to_json() const {
  json j;
  j["format"] = "textplan-model-v1";
  j["kind"] = "extractor";
  j["config"] = {{"epochs", cfg_.epochs},
                 {"lr", cfg_.lr},
                 {"batch", cfg_.batch},
                 {"max_index_arity", cfg_.max_index_arity}};
  json tensors = json::object();
  nn::ParamSet ps = const_cast<ExtractorModel*>(this)->params();
  for (const auto& [name, t] : ps.items()) {
    json jt;
    jt["rows"] = t->v.rows();
    jt["cols"] = t->v.cols();
    json data = json::array();
    for (int r = 0; r < t->v.rows(); ++r)
      for (int c = 0; c < t->v.cols(); ++c) data.push_back(t->v(r, c));
    jt["data"] = std::move(data);
    tensors[name] = std::move(jt);
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

ExtractorModel ExtractorModel::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != "textplan-model-v1" ||
      j.value("kind", "") != "extractor")
    throw std::runtime_error("not an extractor checkpoint");
  ExtractorModel model;
  model.cfg_.epochs = j["config"].at("epochs").get<int>();
  model.cfg_.lr = j["config"].at("lr").get<double>();
  model.cfg_.batch = j["config"].at("batch").get<int>();
  model.cfg_.max_index_arity = j["config"].at("max_index_arity").get<int>();
  nn::ParamSet ps = model.params();
  for (const auto& [name, t] : ps.items()) {
    if (!j["tensors"].contains(name))
      throw std::runtime_error("checkpoint missing tensor " + name);
    const auto& jt = j["tensors"][name];
    int rows = jt.at("rows").get<int>();
    int cols = jt.at("cols").get<int>();
    t->v.resize(rows, cols);
    int k = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) t->v(r, c) = jt.at("data")[k++].get<double>();
  }
  return model;
}

}  // namespace textplan
