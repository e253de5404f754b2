#include "textplan/pddl.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace textplan {

namespace {

// ---------------------------------------------------------------- emitter

void emit_typed_vars(std::ostringstream& os, const std::vector<Variable>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) os << ' ';
    os << '?' << vars[i].name << " - " << vars[i].type;
  }
}

void emit_atom(std::ostringstream& os, const ActionSchema& schema,
               const LiftedAtom& atom) {
  os << '(' << atom.predicate;
  for (int idx : atom.params) os << " ?" << schema.params[idx].name;
  os << ')';
}

}  // namespace

std::string emit_domain(const Domain& domain) {
  Domain d = domain;
  d.normalize();
  d.validate();
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  os << "  (:requirements :strips :typing)\n";
  os << "  (:types";
  for (const auto& t : d.types) os << ' ' << t;
  os << ")\n";
  os << "  (:predicates";
  for (const auto& p : d.predicates) {
    os << "\n    (" << p.predicate;
    for (std::size_t i = 0; i < p.signature.types.size(); ++i)
      os << " ?x" << i << " - " << p.signature.types[i];
    os << ')';
  }
  os << ")\n";
  for (const auto& a : d.actions) {
    os << "  (:action " << a.name << "\n";
    os << "    :parameters (";
    emit_typed_vars(os, a.params);
    os << ")\n";
    os << "    :precondition (and";
    for (const auto& atom : a.pre) {
      os << ' ';
      emit_atom(os, a, atom);
    }
    os << ")\n";
    os << "    :effect (and";
    for (const auto& atom : a.add) {
      os << ' ';
      emit_atom(os, a, atom);
    }
    for (const auto& atom : a.del) {
      os << " (not ";
      emit_atom(os, a, atom);
      os << ')';
    }
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string emit_problem(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "  (:domain " << p.domain_name << ")\n";
  os << "  (:objects";
  auto objects = p.objects;
  std::sort(objects.begin(), objects.end());
  for (const auto& o : objects) os << ' ' << o.name << " - " << o.type;
  os << ")\n";
  os << "  (:init";
  for (const auto& prop : p.init.props) {
    os << " (" << prop.predicate;
    for (const auto& o : prop.params) os << ' ' << o.name;
    os << ')';
  }
  os << ")\n";
  os << "  (:goal (and";
  auto goal = p.goal;
  std::sort(goal.begin(), goal.end());
  for (const auto& prop : goal) {
    os << " (" << prop.predicate;
    for (const auto& o : prop.params) os << ' ' << o.name;
    os << ')';
  }
  os << ")))\n";
  return os.str();
}

// ----------------------------------------------------------------- parser

namespace {

struct Token {
  enum Kind { LParen, RParen, Symbol, End } kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t{Token::End, "", line_, col_};
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '(') {
      t.kind = Token::LParen;
      advance();
      return t;
    }
    if (c == ')') {
      t.kind = Token::RParen;
      advance();
      return t;
    }
    t.kind = Token::Symbol;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '(' && src_[pos_] != ')' && src_[pos_] != ';') {
      t.text += src_[pos_];
      advance();
    }
    if (t.text.empty())
      throw PddlError(line_, col_, "unexpected character '" + std::string(1, c) + "'");
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lexer_(src) { shift(); }

  Domain domain() {
    expect_lparen();
    expect_symbol("define");
    expect_lparen();
    expect_symbol("domain");
    Domain d;
    d.name = symbol("domain name");
    expect_rparen();
    while (cur_.kind == Token::LParen) {
      shift();
      std::string section = symbol("section keyword");
      if (section == ":requirements") {
        requirements();
      } else if (section == ":types") {
        while (cur_.kind == Token::Symbol) {
          if (cur_.text == "-")
            fail("unsupported PDDL feature 'type hierarchy'");
          d.types.push_back(cur_.text);
          shift();
        }
        expect_rparen();
      } else if (section == ":predicates") {
        while (cur_.kind == Token::LParen) d.predicates.push_back(predicate_decl());
        expect_rparen();
      } else if (section == ":action") {
        d.actions.push_back(action());
      } else {
        fail("unsupported PDDL feature '" + section + "'");
      }
    }
    expect_rparen();
    expect_end();
    d.normalize();
    d.validate();
    return d;
  }

  Problem problem() {
    expect_lparen();
    expect_symbol("define");
    expect_lparen();
    expect_symbol("problem");
    Problem p;
    p.name = symbol("problem name");
    expect_rparen();
    while (cur_.kind == Token::LParen) {
      shift();
      std::string section = symbol("section keyword");
      if (section == ":domain") {
        p.domain_name = symbol("domain name");
        expect_rparen();
      } else if (section == ":objects") {
        typed_list(p.objects);
        expect_rparen();
      } else if (section == ":init") {
        while (cur_.kind == Token::LParen) p.init.insert(ground_atom(p.objects));
        expect_rparen();
      } else if (section == ":goal") {
        expect_lparen();
        expect_symbol("and");
        while (cur_.kind == Token::LParen) p.goal.push_back(ground_atom(p.objects));
        expect_rparen();
        expect_rparen();
      } else {
        fail("unsupported PDDL feature '" + section + "'");
      }
    }
    expect_rparen();
    expect_end();
    return p;
  }

 private:
  void requirements() {
    while (cur_.kind == Token::Symbol) {
      if (cur_.text != ":strips" && cur_.text != ":typing")
        fail("unsupported PDDL feature '" + cur_.text + "'");
      shift();
    }
    expect_rparen();
  }

  TopicalProposition predicate_decl() {
    expect_lparen();
    TopicalProposition tp;
    tp.predicate = symbol("predicate name");
    std::vector<ObjectRef> vars;
    typed_list(vars, /*variables=*/true);
    for (const auto& v : vars) tp.signature.types.push_back(v.type);
    expect_rparen();
    return tp;
  }

  ActionSchema action() {
    ActionSchema a;
    a.name = symbol("action name");
    while (cur_.kind == Token::Symbol) {
      std::string key = symbol("action section");
      if (key == ":parameters") {
        expect_lparen();
        std::vector<ObjectRef> vars;
        typed_list(vars, /*variables=*/true);
        for (const auto& v : vars) a.params.push_back(Variable{v.name, v.type});
        expect_rparen();
      } else if (key == ":precondition") {
        conjunction(a, /*effect=*/false);
      } else if (key == ":effect") {
        conjunction(a, /*effect=*/true);
      } else {
        fail("unsupported PDDL feature '" + key + "'");
      }
    }
    expect_rparen();
    return a;
  }

  // (and item*) where item is an atom or, in effects, (not atom).
  void conjunction(ActionSchema& a, bool effect) {
    expect_lparen();
    expect_symbol("and");
    while (cur_.kind == Token::LParen) {
      int line = cur_.line, col = cur_.col;
      shift();
      std::string head = symbol("atom predicate");
      bool negated = false;
      if (head == "not" && cur_.kind == Token::LParen) {
        if (!effect)
          throw PddlError(line, col, "unsupported PDDL feature 'not' in precondition");
        negated = true;
        shift();
        head = symbol("atom predicate");
      }
      for (const char* bad : {"or", "forall", "exists", "when", "imply", "="})
        if (head == bad)
          throw PddlError(line, col, std::string("unsupported PDDL feature '") + bad + "'");
      LiftedAtom atom;
      atom.predicate = head;
      while (cur_.kind == Token::Symbol) {
        std::string v = cur_.text;
        if (v.empty() || v[0] != '?')
          fail("expected variable, got '" + v + "'");
        atom.params.push_back(param_index(a, v.substr(1)));
        shift();
      }
      expect_rparen();
      if (negated) expect_rparen();
      if (!effect) {
        a.pre.push_back(atom);
      } else if (negated) {
        a.del.push_back(atom);
      } else {
        a.add.push_back(atom);
      }
    }
    expect_rparen();
  }

  int param_index(const ActionSchema& a, const std::string& name) {
    for (std::size_t i = 0; i < a.params.size(); ++i)
      if (a.params[i].name == name) return static_cast<int>(i);
    fail("unknown parameter ?" + name + " in action " + a.name);
    return -1;
  }

  Proposition ground_atom(const std::vector<ObjectRef>& objects) {
    expect_lparen();
    Proposition p;
    p.predicate = symbol("predicate name");
    while (cur_.kind == Token::Symbol) {
      auto it = std::find_if(objects.begin(), objects.end(),
                             [&](const ObjectRef& o) { return o.name == cur_.text; });
      if (it == objects.end()) fail("undeclared object '" + cur_.text + "'");
      p.params.push_back(*it);
      shift();
    }
    expect_rparen();
    return p;
  }

  // name - type pairs; `variables` strips the leading '?'.
  void typed_list(std::vector<ObjectRef>& out, bool variables = false) {
    std::vector<std::string> pending;
    while (cur_.kind == Token::Symbol) {
      if (cur_.text == "-") {
        shift();
        std::string type = symbol("type name");
        for (auto& n : pending) out.push_back(ObjectRef{n, type});
        pending.clear();
      } else {
        std::string n = cur_.text;
        if (variables) {
          if (n.empty() || n[0] != '?') fail("expected variable, got '" + n + "'");
          n = n.substr(1);
        }
        pending.push_back(n);
        shift();
      }
    }
    if (!pending.empty()) fail("missing '- type' after name list");
  }

  std::string symbol(const std::string& what) {
    if (cur_.kind != Token::Symbol) fail("expected " + what);
    std::string s = cur_.text;
    shift();
    return s;
  }
  void expect_lparen() {
    if (cur_.kind != Token::LParen) fail("expected '('");
    shift();
  }
  void expect_rparen() {
    if (cur_.kind != Token::RParen) fail("expected ')'");
    shift();
  }
  void expect_symbol(const std::string& s) {
    if (cur_.kind != Token::Symbol || cur_.text != s) fail("expected '" + s + "'");
    shift();
  }
  void expect_end() {
    if (cur_.kind != Token::End) fail("trailing input after domain");
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw PddlError(cur_.line, cur_.col, msg);
  }
  void shift() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

Domain parse_domain(const std::string& text) { return Parser(text).domain(); }

Problem parse_problem(const std::string& text) { return Parser(text).problem(); }

}  // namespace textplan
