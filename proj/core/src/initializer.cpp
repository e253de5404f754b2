#include "textplan/initializer.hpp"

#include <algorithm>

#include "textplan/rng.hpp"

namespace textplan {

std::vector<ObjectRef> extract_parameters(const std::string& sentence,
                                          const std::vector<ObjectRef>& task_objects) {
  std::vector<ObjectRef> out;
  for (const auto& tok : Vocabulary::cased_tokens(sentence)) {
    for (const auto& o : task_objects) {
      if (o.name != tok) continue;
      bool seen = std::any_of(out.begin(), out.end(),
                              [&](const ObjectRef& p) { return p.name == o.name; });
      if (!seen) out.push_back(o);
      break;
    }
  }
  return out;
}

namespace {

// Reorders theta to the registered signature; positions of equal type keep
// their incoming order.
std::vector<ObjectRef> reorder_to_signature(const std::vector<ObjectRef>& theta,
                                            const TypedSignature& sig) {
  std::vector<bool> used(theta.size(), false);
  std::vector<ObjectRef> out;
  out.reserve(theta.size());
  for (const auto& type : sig.types) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (used[i] || theta[i].type != type) continue;
      used[i] = true;
      out.push_back(theta[i]);
      break;
    }
  }
  return out;
}

bool type_bijection(const TypedSignature& sig, const std::vector<ObjectRef>& theta) {
  if (sig.types.size() != theta.size()) return false;
  std::vector<TypeName> a = sig.types;
  std::vector<TypeName> b;
  for (const auto& o : theta) b.push_back(o.type);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

RuleOutcome apply_rule(PropositionRegistry& psi,
                       const EncoderModel::WordScores& ranking,
                       const std::vector<ObjectRef>& theta,
                       const std::vector<std::string>& words) {
  for (int word_idx : ranking.ranking) {
    const std::string& w = words.at(word_idx);
    std::vector<int> headed = psi.entries_with_predicate(w);
    if (headed.empty()) {
      // rule 1: word heads nothing yet
      Proposition p{w, theta};
      RuleOutcome out;
      out.p = p;
      out.registry_index = psi.insert(topical_of(p));
      out.created = true;
      return out;
    }
    for (int entry : headed) {
      if (!type_bijection(psi.at(entry).signature, theta)) continue;
      // rule 2: adjust parameter order to the registered signature
      RuleOutcome out;
      out.p = Proposition{w, reorder_to_signature(theta, psi.at(entry).signature)};
      out.registry_index = entry;
      return out;
    }
    // rule 3: incompatible signatures only; try the next word
  }
  // Every word blocked: register under the top-ranked word with a fresh
  // signature for this parameter list.
  const std::string& top = words.at(ranking.ranking.front());
  Proposition p{top, theta};
  RuleOutcome out;
  out.p = p;
  out.registry_index = psi.insert(topical_of(p));
  out.created = true;
  out.fallback = true;
  return out;
}

SentenceScorer encoder_scorer(EncoderModel& model, std::uint64_t seed) {
  return [&model, seed](std::size_t task_idx, std::size_t text_idx,
                        std::size_t sent_idx,
                        const TokenizedSentence& tok) -> EncoderModel::WordScores {
    Eigen::VectorXd h = model.encode(tok);
    auto rng = make_rng(seed, derive_seed(0x696e6974ULL, task_idx, text_idx, sent_idx));
    Eigen::VectorXd z = model.reparameterize(h, rng);
    return model.topic_word_scores(z);
  };
}

ExtractionResult initialize_traces(const std::vector<const CorpusRecord*>& records,
                                   const EncoderModel& model,
                                   const SentenceScorer& scorer) {
  ExtractionResult result;
  const auto& vocab = model.vocabulary();
  for (std::size_t ti = 0; ti < records.size(); ++ti) {
    const CorpusRecord& rec = *records[ti];
    TaskExtraction ext;
    auto handle_text = [&](const Text& text, std::size_t text_idx, State& state,
                           std::vector<SentenceAssignment>& assignments) {
      for (std::size_t si = 0; si < text.size(); ++si) {
        TokenizedSentence tok = vocab.tokenize(text[si], rec.objects);
        if (tok.ids.empty()) {
          ++result.skipped_sentences;
          continue;
        }
        std::vector<ObjectRef> theta = extract_parameters(text[si], rec.objects);
        auto scores = scorer(ti, text_idx, si, tok);
        RuleOutcome outcome =
            apply_rule(result.registry, scores, theta, vocab.words());
        if (outcome.fallback) ++result.fallback_count;
        state.insert(outcome.p);
        assignments.push_back(
            {outcome.p, outcome.registry_index, static_cast<int>(si)});
      }
    };
    for (std::size_t xi = 0; xi < rec.task.texts.size(); ++xi) {
      State s;
      std::vector<SentenceAssignment> assigns;
      handle_text(rec.task.texts[xi], xi, s, assigns);
      ext.states.push_back(std::move(s));
      ext.text_assignments.push_back(std::move(assigns));
    }
    handle_text(rec.task.goal_text, rec.task.texts.size(), ext.goal,
                ext.goal_assignments);
    result.tasks.push_back(std::move(ext));
  }
  return result;
}

ExtractionResult initialize_traces(const std::vector<const CorpusRecord*>& records,
                                   EncoderModel& model, std::uint64_t seed) {
  return initialize_traces(records, model, encoder_scorer(model, seed));
}

std::vector<Proposition> ExtractionResult::flat_assignments() const {
  std::vector<Proposition> out;
  for (const auto& task : tasks) {
    for (const auto& text : task.text_assignments)
      for (const auto& a : text) out.push_back(a.p);
    for (const auto& a : task.goal_assignments) out.push_back(a.p);
  }
  return out;
}

}  // namespace textplan
