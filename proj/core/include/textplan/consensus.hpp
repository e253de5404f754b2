// Consensus over per-plan domains: stack membership rows into binary
// matrices, fit a rank-one score vector per slot by gradient descent, and
// threshold into one conclusive domain.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "textplan/satlearn.hpp"
#include "textplan/strips.hpp"

namespace textplan {

struct ConsensusConfig {
  int epochs = 25000;
  double lr = 1e-2;
  double lambda = 0.5;  // strict threshold: membership iff score > lambda
  int max_arity = 4;
};

// Candidate slot: (topical index, binding) pairs for one action header, in
// registry-then-lexicographic order. Column count L is their total.
struct ColumnIndex {
  std::vector<std::pair<int, std::vector<int>>> cols;

  int find(int topical, const std::vector<int>& binding) const;
  std::size_t size() const { return cols.size(); }
};

ColumnIndex enumerate_columns(const ActionHeader& header,
                              const PropositionRegistry& psi);

struct ActionMatrices {
  ColumnIndex columns;
  Eigen::MatrixXd pre;  // N × L, binary
  Eigen::MatrixXd add;
  Eigen::MatrixXd del;
};

// Row n is all zeros when domain n lacks the action. Throws when a domain
// carries an atom whose topical lift is not in the registry.
std::vector<ActionMatrices> build_matrices(const std::vector<Domain>& domains,
                                           const PropositionRegistry& psi,
                                           const std::vector<ActionHeader>& headers);

// Gradient descent on ||M - 1_N bᵀ||_F² / 2 with the all-ones factor fixed;
// converges to the column mean. Result clamped to [0,1].
Eigen::VectorXd fit(const Eigen::MatrixXd& M, int epochs = 25000, double lr = 1e-2);

struct ActionScores {
  Eigen::VectorXd pre, add, del;
};

// Strict threshold then STRIPS repair: an add already in pre is dropped
// from add, a del missing from pre pulls the atom into pre.
Domain threshold_and_assemble(const std::vector<ActionScores>& scores,
                              const std::vector<ColumnIndex>& columns,
                              double lambda,
                              const std::vector<ActionHeader>& headers,
                              const PropositionRegistry& psi);

Domain conclusive(const std::vector<Domain>& domains, const PropositionRegistry& psi,
                  const std::vector<ActionHeader>& headers,
                  const ConsensusConfig& cfg = {});

// Score vectors as JSON, one object per action.
std::string scores_json(const std::vector<ActionScores>& scores,
                        const std::vector<ColumnIndex>& columns,
                        const std::vector<ActionHeader>& headers,
                        const PropositionRegistry& psi);

}  // namespace textplan
