// Reader/writer for the STRIPS + :typing PDDL subset. Emission is
// normalized: alphabetical predicates, declaration-order actions, sorted
// atom lists, lowercase keywords. parse(emit(d)) == d on normalized
// domains.
#pragma once

#include <stdexcept>
#include <string>

#include "textplan/strips.hpp"

namespace textplan {

struct PddlError : std::runtime_error {
  int line;
  int column;
  PddlError(int line, int column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                           ": " + msg),
        line(line),
        column(column) {}
};

// Problem instance over a domain.
struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<ObjectRef> objects;
  State init;
  std::vector<Proposition> goal;
};

std::string emit_domain(const Domain& d);
Domain parse_domain(const std::string& text);

std::string emit_problem(const Problem& p);
Problem parse_problem(const std::string& text);

}  // namespace textplan
