#include "softq/solvers.hpp"

#include <cmath>
#include <limits>

#include "softq/rng.hpp"

namespace softq {

namespace {

// One synchronous backup R + gamma P h(Q) over all pairs.
QTable backup(const TabularMdp& mdp, const QTable& q, const SoftOperator& op) {
  QTable next(mdp.n_states(), mdp.n_actions());
  Eigen::VectorXd h = soft_backup(q, op);
  for (int a = 0; a < mdp.n_actions(); ++a) {
    for (int s = 0; s < mdp.n_states(); ++s) {
      next.set(s, a, mdp.expected_reward(s, a) + mdp.discount() * mdp.transition(a).row(s).dot(h));
    }
  }
  return next;
}

struct IterationResult {
  QTable q;
  bool converged;
  long iterations;
  double residual;
};

IterationResult iterate_to_fixed_point(const TabularMdp& mdp, QTable q, const SoftOperator& op,
                                       double step_tol, long max_iter) {
  long it = 0;
  double step = std::numeric_limits<double>::infinity();
  for (; it < max_iter; ++it) {
    QTable next = backup(mdp, q, op);
    step = (next.values() - q.values()).lpNorm<Eigen::Infinity>();
    q = std::move(next);
    if (step <= step_tol) return {std::move(q), true, it + 1, step};
  }
  return {std::move(q), false, it, step};
}

}  // namespace

QTable optimal_q(const TabularMdp& mdp, double tol, long max_iter) {
  const double gamma = mdp.discount();
  // ||Q_k - Q*|| <= gamma/(1-gamma) * ||Q_{k+1} - Q_k||, so this step
  // threshold puts the result within tol of the fixed point.
  const double step_tol =
      gamma > 0.0 ? tol * (1.0 - gamma) / gamma : std::numeric_limits<double>::infinity();
  auto res = iterate_to_fixed_point(mdp, QTable(mdp.n_states(), mdp.n_actions()),
                                    SoftOperator::hard_max(), step_tol, max_iter);
  if (!res.converged) {
    throw NotConverged("optimal_q: value iteration did not reach tolerance in " +
                       std::to_string(max_iter) + " sweeps");
  }
  return res.q;
}

FixedPointReport soft_fixed_point(const TabularMdp& mdp, const SoftOperator& op, double tol,
                                  long max_iter, int n_probes) {
  if (n_probes < 1) throw ValidationError("soft_fixed_point: n_probes must be >= 1");
  const int n = mdp.n_pairs();
  const double box = 1.0 / (1.0 - mdp.discount());

  // Fixed internal stream so probe initializations are reproducible.
  Rng rng = Rng::stream(UINT64_C(0x5B1785C3), {static_cast<std::uint64_t>(n_probes)});

  FixedPointReport report;
  for (int probe = 0; probe < n_probes; ++probe) {
    Eigen::VectorXd init;
    if (probe == 0) {
      init = Eigen::VectorXd::Zero(n);
    } else if (probe == 1) {
      init = Eigen::VectorXd::Constant(n, box);
    } else if (probe == 2) {
      init = Eigen::VectorXd::Constant(n, -box);
    } else {
      init.resize(n);
      for (int i = 0; i < n; ++i) init[i] = rng.uniform(-box, box);
    }
    // Stop on estimated distance to the fixed point, not on the raw step:
    // a gamma-contraction moving by s is within s*gamma/(1-gamma) of its
    // limit, so this keeps every probe within tol of it (and the one-step
    // residual below tol as well).
    const double gamma = mdp.discount();
    const double step_tol = gamma > 0.0 ? std::min(tol, tol * (1.0 - gamma) / gamma) : tol;
    auto res = iterate_to_fixed_point(mdp, QTable(mdp.n_states(), mdp.n_actions(), init), op,
                                      step_tol, max_iter);
    BasinWitness w;
    w.probe_id = probe;
    w.limit = res.q;
    w.converged = res.converged;
    w.iterations = res.iterations;
    w.residual = res.residual;
    report.basin_witnesses.push_back(std::move(w));
  }

  const auto& first = report.basin_witnesses.front();
  report.q = first.limit;
  report.iterations = first.iterations;
  report.residual = first.residual;
  report.converged = true;
  for (const auto& w : report.basin_witnesses) report.converged = report.converged && w.converged;

  for (size_t i = 0; i < report.basin_witnesses.size(); ++i) {
    for (size_t j = i + 1; j < report.basin_witnesses.size(); ++j) {
      const auto& a = report.basin_witnesses[i];
      const auto& b = report.basin_witnesses[j];
      if (!a.converged || !b.converged) continue;
      const double gap = (a.limit.values() - b.limit.values()).lpNorm<Eigen::Infinity>();
      if (gap > 10.0 * tol) report.multiple_fixed_points_suspected = true;
    }
  }
  return report;
}

double bellman_residual(const TabularMdp& mdp, const QTable& q, const SoftOperator& op) {
  return (q.values() - backup(mdp, q, op).values()).lpNorm<Eigen::Infinity>();
}

}  // namespace softq
