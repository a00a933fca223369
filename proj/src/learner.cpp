#include "softq/learner.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace softq {

void LearnerConfig::validate(const TabularMdp& mdp) const {
  if (!(step_size > 0.0) || !(step_size < 1.0)) {
    throw ValidationError("LearnerConfig: step size must lie in (0, 1)");
  }
  if (n_steps < 0) throw ValidationError("LearnerConfig: n_steps must be >= 0");
  if (q0.size() != 0 &&
      (q0.n_states() != mdp.n_states() || q0.n_actions() != mdp.n_actions())) {
    throw DimensionMismatch("LearnerConfig: q0 shape does not match the MDP");
  }
  if (strict_assumptions && q0.max_abs() > 1.0) {
    throw ValidationError("LearnerConfig: ||q0||_inf > 1 in strict-assumption mode");
  }
  if (const auto* iid = std::get_if<IidSampling>(&sampling)) {
    if (iid->d.size() != mdp.n_pairs()) {
      throw DimensionMismatch("LearnerConfig: IID distribution has wrong length");
    }
    for (Eigen::Index i = 0; i < iid->d.size(); ++i) {
      if (!(iid->d[i] > 0.0)) {
        throw ZeroVisitProbability("LearnerConfig: IID distribution must be strictly positive");
      }
    }
  } else {
    const auto& traj = std::get<TrajectorySampling>(sampling);
    if (traj.max_episode_steps <= 0) {
      throw ValidationError("LearnerConfig: max_episode_steps must be positive");
    }
    if (traj.initial_distribution.size() != 0 &&
        traj.initial_distribution.size() != mdp.n_states()) {
      throw DimensionMismatch("LearnerConfig: initial distribution has wrong length");
    }
    if (record_noise) {
      throw ValidationError("LearnerConfig: noise recording requires IID sampling");
    }
  }
}

namespace {

Eigen::VectorXd softmax_policy_row(const QTable& q, int s) {
  Eigen::VectorXd v = q.action_values(s);
  const double m = v.maxCoeff();
  Eigen::VectorXd w = (v.array() - m).exp();
  return w / w.sum();
}

}  // namespace

Transition sample_transition(Rng& rng, const LearnerConfig& cfg, const TabularMdp& mdp,
                             const QTable& q, SamplerState& state) {
  Transition t;
  if (const auto* iid = std::get_if<IidSampling>(&cfg.sampling)) {
    const int pair = rng.categorical(iid->d);
    t.s = pair % mdp.n_states();
    t.a = pair / mdp.n_states();
  } else {
    const auto& traj = std::get<TrajectorySampling>(cfg.sampling);
    if (state.current_state < 0 || state.episode_step >= traj.max_episode_steps) {
      const Eigen::VectorXd& init = traj.initial_distribution.size()
                                        ? traj.initial_distribution
                                        : mdp.initial_distribution();
      state.current_state = rng.categorical(init);
      state.episode_step = 0;
    }
    t.s = state.current_state;
    if (std::holds_alternative<SoftmaxOfQ>(traj.behavior)) {
      t.a = rng.categorical(softmax_policy_row(q, t.s));
    } else {
      const auto& fixed = std::get<FixedBehavior>(traj.behavior);
      t.a = rng.categorical(fixed.policy.probs.row(t.s).transpose());
    }
  }
  t.s_next = rng.categorical(mdp.transition(t.a).row(t.s).transpose());
  t.r = mdp.reward(t.s, t.a, t.s_next);
  if (std::holds_alternative<TrajectorySampling>(cfg.sampling)) {
    state.current_state = t.s_next;
    state.episode_step += 1;
  }
  return t;
}

QTable step(const QTable& q, const Transition& t, const SoftOperator& op, double alpha,
            double gamma) {
  QTable next = q;
  const double td_error =
      t.r + gamma * soft_value(q.action_values(t.s_next), op) - q.get(t.s, t.a);
  next.set(t.s, t.a, q.get(t.s, t.a) + alpha * td_error);
  return next;
}

Eigen::VectorXd realized_noise(const QTable& q, const Transition& t, const SoftOperator& op,
                               const ModelMatrices& mm) {
  if (q.size() != mm.n_pairs()) {
    throw DimensionMismatch("realized_noise: q does not match the model matrices");
  }
  const double gamma = mm.discount;
  const Eigen::VectorXd h = soft_backup(q, op);
  // Sampled one-step direction, supported on the (s, a) coordinate only.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(q.size());
  const int idx = flat_index(t.s, t.a, q.n_states());
  w[idx] = t.r + gamma * h[t.s_next] - q.values()[idx];
  // Subtract the model expectation D R + gamma D P H(q) - D q.
  w -= mm.d.asDiagonal() * (mm.R + gamma * (mm.P * h) - q.values());
  return w;
}

Eigen::VectorXd realized_noise(const QTable& q, const Transition& t, const SoftOperator& op,
                               const ModelMatrices& mm, const Eigen::VectorXd& sampler_d) {
  if (sampler_d.size() != mm.d.size() ||
      (sampler_d - mm.d).lpNorm<Eigen::Infinity>() > 1e-12) {
    throw DistributionMismatch(
        "realized_noise: model matrices were assembled from a different distribution than the "
        "sampler's");
  }
  return realized_noise(q, t, op, mm);
}

Trace run(const LearnerConfig& cfg, const TabularMdp& mdp) {
  cfg.validate(mdp);
  const QTable q0 =
      cfg.q0.size() ? cfg.q0 : QTable(mdp.n_states(), mdp.n_actions());

  Trace trace;
  trace.q0 = q0;
  trace.visit_counts = Eigen::VectorXd::Zero(mdp.n_pairs());

  const auto record_at = [&](long k) {
    if (k == 0 || k == cfg.n_steps) return true;
    if (cfg.snapshot_stride > 0) return k % cfg.snapshot_stride == 0;
    if (cfg.snapshot_stride < 0) return false;
    return k <= 10'000 || k % 100 == 0;
  };

  ModelMatrices mm;
  if (cfg.record_noise) {
    mm = assemble_matrices(mdp, std::get<IidSampling>(cfg.sampling).d);
  }

  QTable q = q0;
  Rng rng(cfg.seed);
  SamplerState sampler;
  const long tail_window = std::max<long>(1, cfg.n_steps / 100);
  Eigen::VectorXd tail_acc = Eigen::VectorXd::Zero(mdp.n_pairs());
  long tail_count = 0;

  trace.snapshot_steps.push_back(0);
  trace.snapshots.push_back(q0);
  if (cfg.n_steps == 0) {
    tail_acc = q0.values();
    tail_count = 1;
  }

  for (long k = 0; k < cfg.n_steps; ++k) {
    const Transition t = sample_transition(rng, cfg, mdp, q, sampler);
    trace.transitions.push_back(t);
    trace.visit_counts[flat_index(t.s, t.a, mdp.n_states())] += 1.0;
    if (cfg.record_noise) {
      trace.noise.push_back(realized_noise(q, t, cfg.op, mm));
    }
    q = step(q, t, cfg.op, cfg.step_size, mdp.discount());
    const long k_next = k + 1;
    if (record_at(k_next)) {
      trace.snapshot_steps.push_back(k_next);
      trace.snapshots.push_back(q);
    }
    if (k_next > cfg.n_steps - tail_window) {
      tail_acc += q.values();
      tail_count += 1;
    }
  }

  trace.q_final = q;
  trace.tail_mean = QTable(mdp.n_states(), mdp.n_actions(), tail_acc / tail_count);
  if (const auto* traj = std::get_if<TrajectorySampling>(&cfg.sampling)) {
    if (std::holds_alternative<SoftmaxOfQ>(traj->behavior)) {
      trace.assumption_violations.push_back("time-varying-policy");
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const Trace& trace, const QTable& q_star,
                     std::uint64_t seed) {
  const int n = trace.q0.size();
  out << "step,seed";
  out << ",linf_error,l2_error";
  for (int i = 0; i < n; ++i) out << ",q_" << i;
  out << "\n";
  char buf[32];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << ',' << buf;
  };
  for (size_t i = 0; i < trace.snapshots.size(); ++i) {
    const Eigen::VectorXd dev = trace.snapshots[i].values() - q_star.values();
    out << trace.snapshot_steps[i] << ',' << seed;
    put(dev.lpNorm<Eigen::Infinity>());
    put(dev.norm());
    for (int j = 0; j < n; ++j) put(trace.snapshots[i].values()[j]);
    out << "\n";
  }
}

}  // namespace softq
