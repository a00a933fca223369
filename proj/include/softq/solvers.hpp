#pragma once

#include <vector>

#include "softq/mdp.hpp"
#include "softq/soft_ops.hpp"

namespace softq {

/// Ground-truth optimal Q via value iteration.  Stops once the sup-norm
/// step falls below tol*(1-gamma)/gamma, which guarantees the returned
/// table is within tol of the fixed point; also satisfies
/// ||Q - (R + gamma P max Q)||_inf <= tol.
QTable optimal_q(const TabularMdp& mdp, double tol = 1e-10, long max_iter = 1'000'000);

struct BasinWitness {
  int probe_id = 0;
  QTable limit;
  bool converged = false;
  long iterations = 0;
  double residual = 0.0;
};

struct FixedPointReport {
  QTable q;           // limit of the first probe
  bool converged = false;
  long iterations = 0;
  double residual = 0.0;
  /// True when two converged probes disagree by more than 10*tol, which
  /// is evidence (not proof) of multiple fixed points.
  bool multiple_fixed_points_suspected = false;
  std::vector<BasinWitness> basin_witnesses;
};

/// Iterates Q <- R + gamma P soft_backup(Q) from several initializations:
/// zeros, +/- (1/(1-gamma)) * ones, then uniform draws inside that box.
/// The LSE branch is a contraction and converges from every probe; the
/// Boltzmann branch may settle in different limits, all of which are
/// reported.  Probe failures are recorded per witness, never thrown.
FixedPointReport soft_fixed_point(const TabularMdp& mdp, const SoftOperator& op,
                                  double tol = 1e-10, long max_iter = 1'000'000,
                                  int n_probes = 4);

/// ||q - (R + gamma P soft_backup(q))||_inf.
double bellman_residual(const TabularMdp& mdp, const QTable& q, const SoftOperator& op);

}  // namespace softq
