#pragma once

#include <vector>

#include <Eigen/Core>

#include "softq/errors.hpp"

namespace softq {

/// Flat index of the state-action pair (s, a) in the action-major layout:
/// all states for action 0, then all states for action 1, and so on.
/// Every vector and matrix in this library uses this ordering.
int flat_index(int s, int a, int n_states);

/// Raw model description, as read from a file or built inline.
/// Indices are 0-based here; the file format is 1-based (see mdp_io).
struct MdpSpec {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Eigen::MatrixXd> transition;  // per action: P_a(s, s')
  std::vector<Eigen::MatrixXd> reward;      // per action: r(s, a, s')
  double discount = 0.0;
  Eigen::VectorXd initial_distribution;     // empty = uniform
  // When set, enforces unit-bounded rewards (|r| <= 1).  On by default;
  // turn off to model general reward scales.
  bool strict_assumptions = true;
};

/// A validated tabular MDP.  Immutable after construction and safe to
/// share across threads.
class TabularMdp {
 public:
  explicit TabularMdp(MdpSpec spec);

  int n_states() const { return spec_.n_states; }
  int n_actions() const { return spec_.n_actions; }
  int n_pairs() const { return spec_.n_states * spec_.n_actions; }
  double discount() const { return spec_.discount; }
  bool strict_assumptions() const { return spec_.strict_assumptions; }

  /// P_a as an n_states x n_states row-stochastic matrix.
  const Eigen::MatrixXd& transition(int a) const { return spec_.transition.at(a); }
  /// r(s, a, s').
  double reward(int s, int a, int s_next) const { return spec_.reward[a](s, s_next); }
  const Eigen::MatrixXd& reward_matrix(int a) const { return spec_.reward.at(a); }
  /// E[r(s, a, s') | s, a].
  double expected_reward(int s, int a) const;

  const Eigen::VectorXd& initial_distribution() const { return spec_.initial_distribution; }
  double max_abs_reward() const { return max_abs_reward_; }

 private:
  MdpSpec spec_;
  double max_abs_reward_ = 0.0;
};

/// Validating factory for TabularMdp.  Throws NonStochasticRow,
/// NegativeProbability, RewardOutOfBounds (strict mode only) or
/// InvalidDiscount.
TabularMdp build_mdp(MdpSpec spec);

/// A state-indexed table of Q-values stored as one flat vector in the
/// action-major layout of flat_index.
class QTable {
 public:
  QTable() = default;
  QTable(int n_states, int n_actions);  // zero-initialized
  QTable(int n_states, int n_actions, Eigen::VectorXd values);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int size() const { return static_cast<int>(values_.size()); }

  double get(int s, int a) const { return values_[flat_index(s, a, n_states_)]; }
  void set(int s, int a, double v) { values_[flat_index(s, a, n_states_)] = v; }

  /// Q(s, .) as a dense vector over actions.
  Eigen::VectorXd action_values(int s) const;

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double max_abs() const { return values_.size() ? values_.lpNorm<Eigen::Infinity>() : 0.0; }

  friend bool operator==(const QTable& a, const QTable& b) {
    return a.n_states_ == b.n_states_ && a.n_actions_ == b.n_actions_ &&
           a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
  }

 private:
  int n_states_ = 0;
  int n_actions_ = 0;
  Eigen::VectorXd values_;
};

/// Row-stochastic policy: probs(s, a) = probability of action a in state s.
struct StochasticPolicy {
  Eigen::MatrixXd probs;

  /// Validates row sums (within 1e-12) and nonnegativity.
  void validate() const;

  static StochasticPolicy uniform(int n_states, int n_actions);
  static StochasticPolicy deterministic(int n_states, int n_actions, int action);
};

}  // namespace softq
