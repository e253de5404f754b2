// Sentence templates: five surface patterns per topical proposition, used
// to render propositional states as text.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "textplan/strips.hpp"

namespace textplan {

struct SentenceTemplate {
  TopicalProposition topical;
  std::array<std::string, 5> patterns;  // slots "{0}", "{1}", ...

  // Every pattern must reference each slot exactly once, and at most
  // max_predicate_fraction of the patterns may contain the predicate name
  // as a token (surface forms are allowed to omit it entirely).
  void validate(double max_predicate_fraction = 0.6) const;

  // Instantiates pattern `k` with the proposition's object names.
  std::string render(const Proposition& p, int k) const;
};

struct TemplateSet {
  std::vector<SentenceTemplate> templates;

  const SentenceTemplate* find(const TopicalProposition& tp) const;
  void validate(double max_predicate_fraction = 0.6) const;
};

// A planning domain bundled with its object inventory, canonical initial
// state, and sentence templates.
struct DomainBundle {
  Domain domain;
  std::vector<ObjectRef> objects;
  State base_init;
  TemplateSet templates;
};

// Bundled domains: "blocks", "minecraft", "baking".
const DomainBundle& bundled_domain(const std::string& name);
std::vector<std::string> bundled_domain_names();

}  // namespace textplan
