#include "textplan/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace textplan {

std::vector<std::string> Vocabulary::cased_tokens(const std::string& sentence) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : sentence) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> Vocabulary::lower_tokens(const std::string& sentence) {
  auto toks = cased_tokens(sentence);
  for (auto& t : toks)
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  return toks;
}

Vocabulary Vocabulary::build(const Corpus& corpus, const std::string& split) {
  std::set<std::string> words;
  std::set<TypeName> types;
  for (const auto& rec : corpus.records) {
    if (!split.empty() && rec.split != split) continue;
    std::set<std::string> object_names;
    for (const auto& o : rec.objects) {
      object_names.insert(o.name);
      types.insert(o.type);
    }
    auto scan = [&](const Text& text) {
      for (const auto& sentence : text) {
        auto cased = cased_tokens(sentence);
        for (const auto& tok : cased) {
          if (object_names.count(tok)) continue;
          std::string lower = tok;
          std::transform(lower.begin(), lower.end(), lower.begin(),
                         [](unsigned char c) { return std::tolower(c); });
          words.insert(lower);
        }
      }
    };
    for (const auto& t : rec.task.texts) scan(t);
    scan(rec.task.goal_text);
  }
  return from_words({words.begin(), words.end()}, {types.begin(), types.end()});
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words,
                                  std::vector<TypeName> placeholder_types) {
  Vocabulary v;
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  v.words_ = std::move(words);
  for (std::size_t i = 0; i < v.words_.size(); ++i)
    v.word_index_[v.words_[i]] = static_cast<int>(i);
  std::sort(placeholder_types.begin(), placeholder_types.end());
  placeholder_types.erase(
      std::unique(placeholder_types.begin(), placeholder_types.end()),
      placeholder_types.end());
  v.types_ = std::move(placeholder_types);
  for (std::size_t i = 0; i < v.types_.size(); ++i)
    v.type_index_[v.types_[i]] = static_cast<int>(v.words_.size() + i);
  return v;
}

int Vocabulary::word_index(const std::string& token) const {
  auto it = word_index_.find(token);
  return it == word_index_.end() ? -1 : it->second;
}

int Vocabulary::placeholder_index(const TypeName& type) const {
  auto it = type_index_.find(type);
  return it == type_index_.end() ? -1 : it->second;
}

std::string Vocabulary::token_name(int idx) const {
  if (idx < word_count()) return words_.at(idx);
  if (idx == unk_index()) return "<unk>";
  return "<obj:" + types_.at(idx - word_count()) + ">";
}

TokenizedSentence Vocabulary::tokenize(const std::string& sentence,
                                       const std::vector<ObjectRef>& objects) const {
  TokenizedSentence out;
  out.bag = Eigen::VectorXd::Zero(word_count());
  auto cased = cased_tokens(sentence);
  for (const auto& tok : cased) {
    const ObjectRef* obj = nullptr;
    for (const auto& o : objects)
      if (o.name == tok) {
        obj = &o;
        break;
      }
    if (obj) {
      int idx = placeholder_index(obj->type);
      out.ids.push_back(idx >= 0 ? idx : unk_index());
      continue;
    }
    std::string lower = tok;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    int w = word_index(lower);
    if (w >= 0) {
      out.ids.push_back(w);
      out.bag[w] += 1.0;
    } else {
      out.ids.push_back(unk_index());
      ++out.unk_count;
    }
  }
  double total = out.bag.sum();
  if (total > 0) out.bag /= total;
  return out;
}

}  // namespace textplan
