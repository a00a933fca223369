#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "softq/learner.hpp"

namespace softq {

/// Affine pieces of the switching-system form of the update rule:
/// A = I + alpha (gamma D P Pi_q - D) for the greedy selector Pi_q of q,
/// and b = alpha gamma D P (Pi_q - Pi_{q*}) q*, which vanishes at q = q*.
struct SwitchingMatrices {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

SwitchingMatrices switching_matrices(const QTable& q, const QTable& q_star,
                                     const ModelMatrices& mm, double alpha, double gamma);

/// Advances the lower comparison system, expressed in deviation
/// coordinates x = q_lower - q*.  The LSE variant is linear in x; the
/// Boltzmann variant subtracts the constant operator-gap drift.
Eigen::VectorXd lower_step(OperatorKind kind, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                           const SwitchingMatrices& fixed_at_q_star, double alpha, double beta,
                           const ModelMatrices& mm);

/// Advances the upper comparison system, whose matrix switches with the
/// learner's current iterate.  The LSE variant adds the operator-gap
/// drift; the Boltzmann variant is drift-free.
Eigen::VectorXd upper_step(OperatorKind kind, const Eigen::VectorXd& x, const QTable& q_learner,
                           const Eigen::VectorXd& w, double alpha, double beta,
                           const ModelMatrices& mm, const QTable& q_star);

/// Advances the noise-free error system e = q_upper - q_lower:
/// e' = A_{q} e + (A_{q} - A_{q*}) x_lower + alpha gamma D P (ln|A|/beta) 1.
/// The same recursion serves both operator variants.
Eigen::VectorXd error_step(OperatorKind kind, const Eigen::VectorXd& e,
                           const Eigen::VectorXd& x_lower, const QTable& q_learner, double alpha,
                           double beta, const ModelMatrices& mm, const QTable& q_star);

struct CoupledStep {
  long step = 0;
  Eigen::VectorXd learner_dev;  // q_learner - q*
  Eigen::VectorXd lower_dev;    // q_lower - q*
  Eigen::VectorXd upper_dev;    // q_upper - q*
  Eigen::VectorXd w;            // realized noise consumed at this step
  bool lower_ok = true;
  bool upper_ok = true;
  double lower_min_slack = 0.0;  // min over components of learner_dev - lower_dev
  double upper_min_slack = 0.0;  // min over components of upper_dev - learner_dev
};

struct CoupledTrace {
  OperatorKind kind = OperatorKind::LSE;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  QTable q_star;
  std::vector<CoupledStep> steps;
  long n_violations = 0;
  double min_lower_slack = 0.0;
  double min_upper_slack = 0.0;
};

/// Runs the learner and both comparison systems in one loop, all three
/// consuming the identical realized-noise sequence.  Requires IID
/// sampling and starts the comparison iterates at q0, so the orderings
/// hold with equality at step 0.  Ordering violations beyond
/// sandwich_slack are counted and flagged in the trace, never dropped.
CoupledTrace co_simulate(const LearnerConfig& cfg, const TabularMdp& mdp, const QTable& q_star,
                         double sandwich_slack = 1e-9);

/// CSV export: step,lower_min_slack,upper_min_slack,linf_learner_error,
/// linf_lower_error,linf_upper_error.
void write_coupled_csv(std::ostream& out, const CoupledTrace& trace);

}  // namespace softq
