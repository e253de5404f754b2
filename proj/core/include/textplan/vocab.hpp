// Vocabulary and tokenization. Object names never enter the vocabulary:
// the token sequence maps each object mention to a per-type placeholder,
// and the bag-of-words carries mass only on ordinary words.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "textplan/corpus.hpp"

namespace textplan {

struct TokenizedSentence {
  std::vector<int> ids;    // indices into the full token table
  Eigen::VectorXd bag;     // |words|, sums to 1; zero when no known words
  int unk_count = 0;
  bool trainable() const { return !ids.empty() && bag.sum() > 0; }
};

class Vocabulary {
 public:
  // Collects word tokens from the given split ("" = all records);
  // placeholders are created for every object type seen.
  static Vocabulary build(const Corpus& corpus, const std::string& split = "");
  static Vocabulary from_words(std::vector<std::string> words,
                               std::vector<TypeName> placeholder_types);

  int word_count() const { return static_cast<int>(words_.size()); }
  // words + type placeholders + UNK; the embedding-table size
  int table_size() const { return word_count() + static_cast<int>(types_.size()) + 1; }
  int unk_index() const { return table_size() - 1; }

  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(int idx) const { return words_.at(idx); }
  int word_index(const std::string& token) const;            // -1 if absent
  int placeholder_index(const TypeName& type) const;         // -1 if absent
  const std::vector<TypeName>& placeholder_types() const { return types_; }

  // Display name for any table index (words, "<obj:type>", "<unk>").
  std::string token_name(int idx) const;

  TokenizedSentence tokenize(const std::string& sentence,
                             const std::vector<ObjectRef>& objects) const;

  // Lowercased word tokens (objects not treated specially).
  static std::vector<std::string> lower_tokens(const std::string& sentence);
  // Tokens with original casing, for verbatim object matching.
  static std::vector<std::string> cased_tokens(const std::string& sentence);

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> words_;        // sorted, unique
  std::map<std::string, int> word_index_;
  std::vector<TypeName> types_;           // sorted, unique
  std::map<TypeName, int> type_index_;
};

}  // namespace textplan
