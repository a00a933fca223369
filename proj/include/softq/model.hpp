#pragma once

#include <Eigen/Core>

#include "softq/mdp.hpp"

namespace softq {

/// Stacked linear-algebra view of a tabular MDP together with a visit
/// distribution.  Row (s, a) of P is P(.|s, a); R holds the expected
/// one-step reward per pair; d is the diagonal of the visit matrix D.
struct ModelMatrices {
  Eigen::MatrixXd P;  // n_pairs x n_states
  Eigen::VectorXd R;  // n_pairs
  Eigen::VectorXd d;  // n_pairs, strictly positive, sums to 1
  double d_min = 0.0;
  double d_max = 0.0;
  double discount = 0.0;
  int n_states = 0;
  int n_actions = 0;

  int n_pairs() const { return n_states * n_actions; }
};

/// Assembles P, R and D in the flat action-major ordering.  d must have
/// length n_pairs, strictly positive entries and unit sum (within 1e-10);
/// a nonpositive entry raises ZeroVisitProbability.
ModelMatrices assemble_matrices(const TabularMdp& mdp, const Eigen::VectorXd& d);

/// The n_states x n_pairs policy-averaging matrix: row s selects
/// E_{a~pi(s)}[Q(s, a)] from a flat Q vector.
Eigen::MatrixXd policy_matrix(const StochasticPolicy& policy);

/// The greedy selector for q: a 0/1 matrix whose product with the flat Q
/// vector gives the per-state maximum.  Ties break toward the lowest
/// action index so that the selector is a deterministic function of q.
Eigen::MatrixXd greedy_selector(const QTable& q);

/// Greedy action per state under the same lowest-index tie rule.
std::vector<int> greedy_actions(const QTable& q);

/// Stationary state-action distribution d(s, a) = p(s) pi(a|s) of the
/// chain induced by the policy.  Power iteration (capped at 1e6 sweeps)
/// with a direct linear-solve fallback for small chains; raises Reducible
/// when the chain has more than one recurrent class and NotConverged when
/// no method reaches the tolerance.
Eigen::VectorXd stationary_state_action(const TabularMdp& mdp, const StochasticPolicy& policy,
                                        double tol = 1e-12);

}  // namespace softq
