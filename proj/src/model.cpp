#include "softq/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace softq {

ModelMatrices assemble_matrices(const TabularMdp& mdp, const Eigen::VectorXd& d) {
  const int n_states = mdp.n_states();
  const int n_actions = mdp.n_actions();
  const int n_pairs = n_states * n_actions;

  if (d.size() != n_pairs) {
    throw DimensionMismatch("assemble_matrices: d has length " + std::to_string(d.size()) +
                            ", expected " + std::to_string(n_pairs));
  }
  for (int i = 0; i < n_pairs; ++i) {
    if (!(d[i] > 0.0)) {
      throw ZeroVisitProbability("assemble_matrices: d entry " + std::to_string(i) +
                                 " is not strictly positive");
    }
  }
  if (std::abs(d.sum() - 1.0) > 1e-10) {
    throw ValidationError("assemble_matrices: d sums to " + std::to_string(d.sum()));
  }

  ModelMatrices mm;
  mm.n_states = n_states;
  mm.n_actions = n_actions;
  mm.discount = mdp.discount();
  mm.P.resize(n_pairs, n_states);
  mm.R.resize(n_pairs);
  mm.d = d;
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      const int row = flat_index(s, a, n_states);
      mm.P.row(row) = mdp.transition(a).row(s);
      mm.R[row] = mdp.expected_reward(s, a);
    }
  }
  mm.d_min = d.minCoeff();
  mm.d_max = d.maxCoeff();
  return mm;
}

Eigen::MatrixXd policy_matrix(const StochasticPolicy& policy) {
  policy.validate();
  const int n_states = static_cast<int>(policy.probs.rows());
  const int n_actions = static_cast<int>(policy.probs.cols());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n_states, n_states * n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      pi(s, flat_index(s, a, n_states)) = policy.probs(s, a);
    }
  }
  return pi;
}

std::vector<int> greedy_actions(const QTable& q) {
  std::vector<int> best(q.n_states(), 0);
  for (int s = 0; s < q.n_states(); ++s) {
    double best_v = q.get(s, 0);
    for (int a = 1; a < q.n_actions(); ++a) {
      const double v = q.get(s, a);
      if (v > best_v) {  // strict: ties keep the lowest action index
        best_v = v;
        best[s] = a;
      }
    }
  }
  return best;
}

Eigen::MatrixXd greedy_selector(const QTable& q) {
  const int n_states = q.n_states();
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n_states, q.size());
  const std::vector<int> best = greedy_actions(q);
  for (int s = 0; s < n_states; ++s) {
    sel(s, flat_index(s, best[s], n_states)) = 1.0;
  }
  return sel;
}

namespace {

// Sink strongly-connected components of the support graph of M are the
// recurrent classes of the chain.
int count_recurrent_classes(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<int>> adj(n), radj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (m(i, j) > 0.0) {
        adj[i].push_back(j);
        radj[j].push_back(i);
      }
    }
  }
  // Kosaraju: order by finish time, then sweep the transposed graph.
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::pair<int, size_t>> stack{{start, 0}};
    seen[start] = 1;
    while (!stack.empty()) {
      auto& [v, idx] = stack.back();
      if (idx < adj[v].size()) {
        const int u = adj[v][idx++];
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back({u, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> stack{*it};
    comp[*it] = n_comp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : radj[v]) {
        if (comp[u] < 0) {
          comp[u] = n_comp;
          stack.push_back(u);
        }
      }
    }
    ++n_comp;
  }
  std::vector<char> has_exit(n_comp, 0);
  for (int i = 0; i < n; ++i) {
    for (int j : adj[i]) {
      if (comp[i] != comp[j]) has_exit[comp[i]] = 1;
    }
  }
  int sinks = 0;
  for (int c = 0; c < n_comp; ++c) {
    if (!has_exit[c]) ++sinks;
  }
  return sinks;
}

}  // namespace

Eigen::VectorXd stationary_state_action(const TabularMdp& mdp, const StochasticPolicy& policy,
                                        double tol) {
  policy.validate();
  const int n = mdp.n_states();
  if (policy.probs.rows() != n || policy.probs.cols() != mdp.n_actions()) {
    throw DimensionMismatch("stationary_state_action: policy shape mismatch");
  }

  // State chain M(s, s') = sum_a pi(a|s) P_a(s, s').
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < mdp.n_actions(); ++a) {
    m += policy.probs.col(a).asDiagonal() * mdp.transition(a);
  }

  if (count_recurrent_classes(m) != 1) {
    throw Reducible("stationary_state_action: chain has multiple recurrent classes");
  }

  const auto residual = [&](const Eigen::RowVectorXd& p) {
    return (p * m - p).lpNorm<Eigen::Infinity>();
  };

  // Power iteration on the lazy chain (M + I)/2, which has the same
  // stationary distribution but no periodicity.
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Constant(n, 1.0 / n);
  const Eigen::MatrixXd lazy = 0.5 * (m + Eigen::MatrixXd::Identity(n, n));
  bool converged = false;
  constexpr long kMaxIter = 1'000'000;
  for (long it = 0; it < kMaxIter; ++it) {
    Eigen::RowVectorXd next = p * lazy;
    next /= next.sum();
    p = next;
    if (residual(p) <= tol) {
      converged = true;
      break;
    }
  }

  if (!converged && n <= 64) {
    // Direct solve: p is the left null vector of (M - I); one equation is
    // replaced by the normalization constraint sum(p) = 1.
    Eigen::MatrixXd a = (m - Eigen::MatrixXd::Identity(n, n)).transpose();
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;
    Eigen::VectorXd sol = a.fullPivLu().solve(b);
    p = sol.transpose();
    converged = residual(p) <= std::max(tol, 1e-13);
  }
  if (!converged) {
    throw NotConverged("stationary_state_action: residual " + std::to_string(residual(p)) +
                       " above tolerance after power iteration");
  }

  Eigen::VectorXd d(n * mdp.n_actions());
  for (int a = 0; a < mdp.n_actions(); ++a) {
    for (int s = 0; s < n; ++s) {
      d[flat_index(s, a, n)] = p[s] * policy.probs(s, a);
    }
  }
  return d;
}

}  // namespace softq
