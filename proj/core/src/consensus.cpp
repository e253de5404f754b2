#include "textplan/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace textplan {

int ColumnIndex::find(int topical, const std::vector<int>& binding) const {
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i].first == topical && cols[i].second == binding)
      return static_cast<int>(i);
  return -1;
}

ColumnIndex enumerate_columns(const ActionHeader& header,
                              const PropositionRegistry& psi) {
  ColumnIndex idx;
  for (std::size_t t = 0; t < psi.size(); ++t)
    for (auto& binding : enumerate_bindings(psi.at(t).signature, header))
      idx.cols.push_back({static_cast<int>(t), binding});
  return idx;
}

std::vector<ActionMatrices> build_matrices(const std::vector<Domain>& domains,
                                           const PropositionRegistry& psi,
                                           const std::vector<ActionHeader>& headers) {
  const int n = static_cast<int>(domains.size());
  std::vector<ActionMatrices> out;
  out.reserve(headers.size());
  for (const auto& header : headers) {
    ActionMatrices m;
    m.columns = enumerate_columns(header, psi);
    const int l = static_cast<int>(m.columns.size());
    m.pre = Eigen::MatrixXd::Zero(n, l);
    m.add = Eigen::MatrixXd::Zero(n, l);
    m.del = Eigen::MatrixXd::Zero(n, l);
    for (int row = 0; row < n; ++row) {
      const ActionSchema* schema = domains[row].find_action(header.name);
      if (!schema) continue;  // absent action: all-zero row
      auto fill = [&](const std::vector<LiftedAtom>& atoms, Eigen::MatrixXd& target) {
        for (const auto& atom : atoms) {
          int t = psi.find(schema->topical(atom));
          if (t < 0)
            throw std::invalid_argument("build_matrices: domain " +
                                        std::to_string(row) + " atom " +
                                        schema->topical(atom).str() +
                                        " not in the registry");
          int col = m.columns.find(t, atom.params);
          if (col < 0)
            throw std::invalid_argument("build_matrices: no column for atom " +
                                        atom.predicate + " of " + header.name);
          target(row, col) = 1.0;
        }
      };
      fill(schema->pre, m.pre);
      fill(schema->add, m.add);
      fill(schema->del, m.del);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::VectorXd fit(const Eigen::MatrixXd& M, int epochs, double lr) {
  if (M.rows() == 0 || M.cols() == 0)
    return Eigen::VectorXd::Zero(M.cols());
  const double n = static_cast<double>(M.rows());
  Eigen::VectorXd colsum = M.colwise().sum().transpose();
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(M.cols(), 0.5);
  for (int e = 0; e < epochs; ++e) {
    // d/dβ ||M - 1βᵀ||²/2 = Nβ - colsum
    beta -= lr * (n * beta - colsum);
    if (!beta.allFinite())
      throw std::runtime_error("consensus fit: non-finite scores at epoch " +
                               std::to_string(e));
  }
  return beta.cwiseMax(0.0).cwiseMin(1.0);
}

Domain threshold_and_assemble(const std::vector<ActionScores>& scores,
                              const std::vector<ColumnIndex>& columns,
                              double lambda,
                              const std::vector<ActionHeader>& headers,
                              const PropositionRegistry& psi) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw std::invalid_argument("threshold: lambda must be in (0,1)");
  Domain d;
  d.name = "learned";
  std::set<TypeName> types;
  for (const auto& tp : psi.entries())
    for (const auto& t : tp.signature.types) types.insert(t);

  for (std::size_t a = 0; a < headers.size(); ++a) {
    ActionSchema s;
    s.name = headers[a].name;
    for (std::size_t i = 0; i < headers[a].param_types.size(); ++i) {
      s.params.push_back(Variable{"x" + std::to_string(i), headers[a].param_types[i]});
      types.insert(headers[a].param_types[i]);
    }
    const ColumnIndex& cols = columns[a];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      LiftedAtom atom{psi.at(cols.cols[c].first).predicate, cols.cols[c].second};
      bool in_pre = scores[a].pre[c] > lambda;
      bool in_add = scores[a].add[c] > lambda;
      bool in_del = scores[a].del[c] > lambda;
      // STRIPS repair: thresholding each slot independently can break the
      // schema invariants.
      if (in_add && in_pre) in_add = false;
      if (in_del && !in_pre) in_pre = true;
      if (in_pre) s.pre.push_back(atom);
      if (in_add) s.add.push_back(atom);
      if (in_del) s.del.push_back(atom);
    }
    d.actions.push_back(std::move(s));
  }
  d.types.assign(types.begin(), types.end());
  d.predicates = psi.entries();
  d.normalize();
  d.validate();
  return d;
}

Domain conclusive(const std::vector<Domain>& domains, const PropositionRegistry& psi,
                  const std::vector<ActionHeader>& headers,
                  const ConsensusConfig& cfg) {
  auto matrices = build_matrices(domains, psi, headers);
  std::vector<ActionScores> scores;
  std::vector<ColumnIndex> columns;
  for (auto& m : matrices) {
    ActionScores s;
    s.pre = fit(m.pre, cfg.epochs, cfg.lr);
    s.add = fit(m.add, cfg.epochs, cfg.lr);
    s.del = fit(m.del, cfg.epochs, cfg.lr);
    scores.push_back(std::move(s));
    columns.push_back(std::move(m.columns));
  }
  return threshold_and_assemble(scores, columns, cfg.lambda, headers, psi);
}

std::string scores_json(const std::vector<ActionScores>& scores,
                        const std::vector<ColumnIndex>& columns,
                        const std::vector<ActionHeader>& headers,
                        const PropositionRegistry& psi) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < headers.size(); ++a) {
    nlohmann::ordered_json ja;
    ja["action"] = headers[a].name;
    nlohmann::ordered_json slots = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < columns[a].size(); ++c) {
      const auto& [topical, binding] = columns[a].cols[c];
      nlohmann::ordered_json jc;
      jc["topical"] = psi.at(topical).str();
      jc["binding"] = binding;
      jc["pre"] = scores[a].pre[c];
      jc["add"] = scores[a].add[c];
      jc["del"] = scores[a].del[c];
      slots.push_back(std::move(jc));
    }
    ja["slots"] = std::move(slots);
    out.push_back(std::move(ja));
  }
  return out.dump(2) + "\n";
}

}  // namespace textplan
