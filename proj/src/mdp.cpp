#include "softq/mdp.hpp"

#include <cmath>
#include <string>

namespace softq {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_row_stochastic(const Eigen::MatrixXd& m, const std::string& what) {
  for (int i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      const double p = m(i, j);
      if (!(p >= 0.0)) {
        throw NegativeProbability(what + ": negative entry " + std::to_string(p) + " in row " +
                                  std::to_string(i));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw NonStochasticRow(what + ": row " + std::to_string(i) + " sums to " +
                             std::to_string(sum));
    }
  }
}

}  // namespace

int flat_index(int s, int a, int n_states) {
  if (n_states <= 0 || s < 0 || s >= n_states || a < 0) {
    throw IndexOutOfRange("flat_index: (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                          ", n_states=" + std::to_string(n_states) + ")");
  }
  return a * n_states + s;
}

TabularMdp::TabularMdp(MdpSpec spec) : spec_(std::move(spec)) {
  if (spec_.n_states <= 0 || spec_.n_actions <= 0) {
    throw ValidationError("TabularMdp: state and action counts must be positive");
  }
  if (!(spec_.discount >= 0.0) || spec_.discount >= 1.0) {
    throw InvalidDiscount("TabularMdp: discount " + std::to_string(spec_.discount) +
                          " outside [0, 1)");
  }
  if (static_cast<int>(spec_.transition.size()) != spec_.n_actions) {
    throw ValidationError("TabularMdp: expected one transition matrix per action");
  }
  if (static_cast<int>(spec_.reward.size()) != spec_.n_actions) {
    throw ValidationError("TabularMdp: expected one reward matrix per action");
  }
  for (int a = 0; a < spec_.n_actions; ++a) {
    const auto& p = spec_.transition[a];
    if (p.rows() != spec_.n_states || p.cols() != spec_.n_states) {
      throw DimensionMismatch("TabularMdp: transition matrix for action " + std::to_string(a) +
                              " has wrong shape");
    }
    check_row_stochastic(p, "transition matrix for action " + std::to_string(a));
    const auto& r = spec_.reward[a];
    if (r.rows() != spec_.n_states || r.cols() != spec_.n_states) {
      throw DimensionMismatch("TabularMdp: reward matrix for action " + std::to_string(a) +
                              " has wrong shape");
    }
    for (int s = 0; s < spec_.n_states; ++s) {
      for (int s2 = 0; s2 < spec_.n_states; ++s2) {
        const double v = r(s, s2);
        if (!std::isfinite(v)) {
          throw NonFiniteInput("TabularMdp: non-finite reward at (s=" + std::to_string(s) +
                               ", a=" + std::to_string(a) + ", s'=" + std::to_string(s2) + ")");
        }
        max_abs_reward_ = std::max(max_abs_reward_, std::abs(v));
      }
    }
  }
  if (spec_.strict_assumptions && max_abs_reward_ > 1.0) {
    throw RewardOutOfBounds("TabularMdp: |r| = " + std::to_string(max_abs_reward_) +
                            " exceeds 1 in strict-assumption mode");
  }
  if (spec_.initial_distribution.size() == 0) {
    spec_.initial_distribution =
        Eigen::VectorXd::Constant(spec_.n_states, 1.0 / spec_.n_states);
  } else {
    if (spec_.initial_distribution.size() != spec_.n_states) {
      throw DimensionMismatch("TabularMdp: initial distribution has wrong length");
    }
    check_row_stochastic(spec_.initial_distribution.transpose(), "initial distribution");
  }
}

double TabularMdp::expected_reward(int s, int a) const {
  return spec_.transition[a].row(s).dot(spec_.reward[a].row(s));
}

TabularMdp build_mdp(MdpSpec spec) { return TabularMdp(std::move(spec)); }

QTable::QTable(int n_states, int n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_states) * n_actions)) {
  if (n_states <= 0 || n_actions <= 0) {
    throw ValidationError("QTable: dimensions must be positive");
  }
}

QTable::QTable(int n_states, int n_actions, Eigen::VectorXd values)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
  if (n_states <= 0 || n_actions <= 0) {
    throw ValidationError("QTable: dimensions must be positive");
  }
  if (values_.size() != static_cast<Eigen::Index>(n_states) * n_actions) {
    throw DimensionMismatch("QTable: value vector length " + std::to_string(values_.size()) +
                            " != n_states*n_actions");
  }
}

Eigen::VectorXd QTable::action_values(int s) const {
  Eigen::VectorXd out(n_actions_);
  for (int a = 0; a < n_actions_; ++a) out[a] = values_[flat_index(s, a, n_states_)];
  return out;
}

void StochasticPolicy::validate() const {
  for (int s = 0; s < probs.rows(); ++s) {
    double sum = 0.0;
    for (int a = 0; a < probs.cols(); ++a) {
      if (!(probs(s, a) >= 0.0)) {
        throw NegativeProbability("policy: negative probability in state " + std::to_string(s));
      }
      sum += probs(s, a);
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw NonStochasticRow("policy: row " + std::to_string(s) + " sums to " +
                             std::to_string(sum));
    }
  }
}

StochasticPolicy StochasticPolicy::uniform(int n_states, int n_actions) {
  return {Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions)};
}

StochasticPolicy StochasticPolicy::deterministic(int n_states, int n_actions, int action) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_states, n_actions);
  p.col(action).setOnes();
  return {p};
}

}  // namespace softq
