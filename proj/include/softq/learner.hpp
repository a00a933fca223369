#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "softq/model.hpp"
#include "softq/rng.hpp"
#include "softq/soft_ops.hpp"

namespace softq {

/// State-action pairs drawn i.i.d. from a fixed distribution d (flat
/// action-major order), next states from the model.  This is the sampling
/// model under which every finite-time bound is stated.
struct IidSampling {
  Eigen::VectorXd d;
};

/// Behavior policy that recomputes softmax(Q(s, .)) from the current
/// iterate at every step (temperature 1).  Time-varying by construction.
struct SoftmaxOfQ {};

struct FixedBehavior {
  StochasticPolicy policy;
};

using Behavior = std::variant<SoftmaxOfQ, FixedBehavior>;

/// Episodic rollouts: the state is resampled from the initial
/// distribution once an episode reaches max_episode_steps.
struct TrajectorySampling {
  Behavior behavior = SoftmaxOfQ{};
  int max_episode_steps = 50;
  Eigen::VectorXd initial_distribution;  // empty = MDP's own
};

using SamplingMode = std::variant<IidSampling, TrajectorySampling>;

struct LearnerConfig {
  SoftOperator op = SoftOperator::hard_max();
  double step_size = 0.1;
  long n_steps = 0;
  SamplingMode sampling;
  std::uint64_t seed = 0;
  QTable q0;
  /// Snapshot schedule: > 0 records every stride-th iterate, 0 picks the
  /// default (every step up to 1e4, every 100th beyond), < 0 records only
  /// the first and last iterates.
  long snapshot_stride = 0;
  /// Record the realized noise vector of every step (IID mode only).
  bool record_noise = false;
  /// Enforce ||q0||_inf <= 1.
  bool strict_assumptions = true;

  void validate(const TabularMdp& mdp) const;
};

struct Transition {
  int s = 0;
  int a = 0;
  int s_next = 0;
  double r = 0.0;
  long step = 0;
};

struct SamplerState {
  int current_state = -1;  // -1 = episode not started
  int episode_step = 0;
};

/// Draws one transition.  IID mode uses two draws (pair, next state);
/// trajectory mode draws the reset state when an episode begins, then the
/// action and the next state.
Transition sample_transition(Rng& rng, const LearnerConfig& cfg, const TabularMdp& mdp,
                             const QTable& q, SamplerState& state);

/// One asynchronous update: only entry (t.s, t.a) changes, by
/// alpha * (r + gamma * soft_value(Q(s', .)) - Q(s, a)); every other
/// entry is returned bit-for-bit unchanged.
QTable step(const QTable& q, const Transition& t, const SoftOperator& op, double alpha,
            double gamma);

/// The realized noise of one update: the sampled one-step direction minus
/// its expectation under the model matrices.  Zero-mean when (s, a) ~ d
/// and s' ~ P.
Eigen::VectorXd realized_noise(const QTable& q, const Transition& t, const SoftOperator& op,
                               const ModelMatrices& mm);

/// Same, with a guard that mm was assembled from the sampler's own
/// distribution; raises DistributionMismatch otherwise.
Eigen::VectorXd realized_noise(const QTable& q, const Transition& t, const SoftOperator& op,
                               const ModelMatrices& mm, const Eigen::VectorXd& sampler_d);

struct Trace {
  QTable q0;
  QTable q_final;
  std::vector<long> snapshot_steps;
  std::vector<QTable> snapshots;
  std::vector<Transition> transitions;
  std::vector<Eigen::VectorXd> noise;  // filled when record_noise is set
  /// Mean of the last 1% of iterates (at least one), including the final.
  QTable tail_mean;
  /// Per-pair visit counts over the run.
  Eigen::VectorXd visit_counts;
  std::vector<std::string> assumption_violations;
};

/// Runs the full loop.  Deterministic given cfg.seed.
Trace run(const LearnerConfig& cfg, const TabularMdp& mdp);

/// Columnar export: step,seed,linf_error,l2_error,q_0..q_{n-1} with
/// 17-significant-digit values (errors are against q_star).
void write_trace_csv(std::ostream& out, const Trace& trace, const QTable& q_star,
                     std::uint64_t seed);

}  // namespace softq
