#pragma once

// Test-local reference implementations.  Everything here is written with
// plain loops over raw indices, independent of the library's Eigen-based
// production paths, so a bug cannot cancel out of both sides of a check.

#include <cmath>
#include <vector>

#include "softq/learner.hpp"
#include "softq/model.hpp"

namespace test_oracle {

inline double brute_max(const Eigen::VectorXd& v) {
  double m = v[0];
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > m) m = v[i];
  }
  return m;
}

inline int brute_argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

// Greedy action of q at state s, lowest index on ties.
inline int greedy_action(const softq::QTable& q, int s) {
  std::vector<double> row(q.n_actions());
  for (int a = 0; a < q.n_actions(); ++a) row[static_cast<size_t>(a)] = q.get(s, a);
  return brute_argmax_lowest(row);
}

// Element (i, j) of I + alpha (gamma D P Pi_q - D), assembled from the
// definition one scalar at a time.
inline double switching_entry(const softq::QTable& q, const softq::ModelMatrices& mm,
                              double alpha, double gamma, int i, int j) {
  const int n_states = mm.n_states;
  double acc = (i == j) ? 1.0 - alpha * mm.d[i] : 0.0;
  for (int s = 0; s < n_states; ++s) {
    const int sel = softq::flat_index(s, greedy_action(q, s), n_states);
    if (sel == j) acc += alpha * gamma * mm.d[i] * mm.P(i, s);
  }
  return acc;
}

// Dense loop evaluation of one lower-comparison step.
inline Eigen::VectorXd lower_step_by_loops(softq::OperatorKind kind, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& w, const softq::QTable& q_star,
                                           const softq::ModelMatrices& mm, double alpha,
                                           double beta) {
  const int n = mm.n_pairs();
  const double gamma = mm.discount;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += switching_entry(q_star, mm, alpha, gamma, i, j) * x[j];
    acc += alpha * w[i];
    if (kind == softq::OperatorKind::Boltzmann) {
      double row = 0.0;
      for (int s = 0; s < mm.n_states; ++s) {
        row += mm.d[i] * mm.P(i, s) * std::log(static_cast<double>(mm.n_actions)) / beta;
      }
      acc -= alpha * gamma * row;
    }
    out[i] = acc;
  }
  return out;
}

// Stationary distribution of a two-state chain in closed form.
inline Eigen::Vector2d two_state_stationary(const Eigen::MatrixXd& chain) {
  const double a = chain(0, 1);
  const double b = chain(1, 0);
  return Eigen::Vector2d{b / (a + b), a / (a + b)};
}

}  // namespace test_oracle
