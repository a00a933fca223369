#include "softq/comparison.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace softq {

namespace {

// alpha * gamma * D P (ln|A|/beta) 1: the constant drift injected by the
// operator-gap envelope.
Eigen::VectorXd gap_drift(const ModelMatrices& mm, double alpha, double beta) {
  const double gap = std::log(static_cast<double>(mm.n_actions)) / beta;
  // P 1 = 1, so D P (gap 1) = gap d.
  return alpha * mm.discount * gap * mm.d;
}

void check_kind(OperatorKind kind) {
  if (kind == OperatorKind::HardMax) {
    throw ValidationError("comparison systems are defined for the LSE and Boltzmann operators");
  }
}

}  // namespace

SwitchingMatrices switching_matrices(const QTable& q, const QTable& q_star,
                                     const ModelMatrices& mm, double alpha, double gamma) {
  const int n = mm.n_pairs();
  if (q.size() != n || q_star.size() != n) {
    throw DimensionMismatch("switching_matrices: table size does not match model");
  }
  const Eigen::MatrixXd sel_q = greedy_selector(q);
  const Eigen::MatrixXd sel_star = greedy_selector(q_star);
  const Eigen::MatrixXd dp = mm.d.asDiagonal() * mm.P;
  SwitchingMatrices out;
  out.A = Eigen::MatrixXd::Identity(n, n) +
          alpha * (gamma * dp * sel_q - Eigen::MatrixXd(mm.d.asDiagonal()));
  out.b = alpha * gamma * (dp * ((sel_q - sel_star) * q_star.values()));
  return out;
}

Eigen::VectorXd lower_step(OperatorKind kind, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                           const SwitchingMatrices& fixed_at_q_star, double alpha, double beta,
                           const ModelMatrices& mm) {
  check_kind(kind);
  Eigen::VectorXd next = fixed_at_q_star.A * x + alpha * w;
  if (kind == OperatorKind::Boltzmann) next -= gap_drift(mm, alpha, beta);
  return next;
}

Eigen::VectorXd upper_step(OperatorKind kind, const Eigen::VectorXd& x, const QTable& q_learner,
                           const Eigen::VectorXd& w, double alpha, double beta,
                           const ModelMatrices& mm, const QTable& q_star) {
  check_kind(kind);
  const SwitchingMatrices at_learner =
      switching_matrices(q_learner, q_star, mm, alpha, mm.discount);
  Eigen::VectorXd next = at_learner.A * x + alpha * w;
  if (kind == OperatorKind::LSE) next += gap_drift(mm, alpha, beta);
  return next;
}

Eigen::VectorXd error_step(OperatorKind kind, const Eigen::VectorXd& e,
                           const Eigen::VectorXd& x_lower, const QTable& q_learner, double alpha,
                           double beta, const ModelMatrices& mm, const QTable& q_star) {
  check_kind(kind);
  const SwitchingMatrices at_learner =
      switching_matrices(q_learner, q_star, mm, alpha, mm.discount);
  const SwitchingMatrices at_star = switching_matrices(q_star, q_star, mm, alpha, mm.discount);
  const Eigen::MatrixXd B = at_learner.A - at_star.A;
  return at_learner.A * e + B * x_lower + gap_drift(mm, alpha, beta);
}

CoupledTrace co_simulate(const LearnerConfig& cfg, const TabularMdp& mdp, const QTable& q_star,
                         double sandwich_slack) {
  cfg.validate(mdp);
  const auto* iid = std::get_if<IidSampling>(&cfg.sampling);
  if (!iid) {
    throw ValidationError("co_simulate: the comparison systems assume IID sampling");
  }
  check_kind(cfg.op.kind());

  const ModelMatrices mm = assemble_matrices(mdp, iid->d);
  const double alpha = cfg.step_size;
  const double beta = cfg.op.beta();
  const SwitchingMatrices at_star =
      switching_matrices(q_star, q_star, mm, alpha, mdp.discount());

  CoupledTrace trace;
  trace.kind = cfg.op.kind();
  trace.alpha = alpha;
  trace.beta = beta;
  trace.seed = cfg.seed;
  trace.q_star = q_star;
  trace.min_lower_slack = std::numeric_limits<double>::infinity();
  trace.min_upper_slack = std::numeric_limits<double>::infinity();
  trace.steps.reserve(static_cast<size_t>(cfg.n_steps) + 1);

  QTable q = cfg.q0.size() ? cfg.q0 : QTable(mdp.n_states(), mdp.n_actions());
  Eigen::VectorXd x_lower = q.values() - q_star.values();
  Eigen::VectorXd x_upper = x_lower;

  Rng rng(cfg.seed);
  SamplerState sampler;

  const auto record = [&](long k, const Eigen::VectorXd& w) {
    CoupledStep rec;
    rec.step = k;
    rec.learner_dev = q.values() - q_star.values();
    rec.lower_dev = x_lower;
    rec.upper_dev = x_upper;
    rec.w = w;
    rec.lower_min_slack = (rec.learner_dev - rec.lower_dev).minCoeff();
    rec.upper_min_slack = (rec.upper_dev - rec.learner_dev).minCoeff();
    rec.lower_ok = rec.lower_min_slack >= -sandwich_slack;
    rec.upper_ok = rec.upper_min_slack >= -sandwich_slack;
    if (!rec.lower_ok || !rec.upper_ok) trace.n_violations += 1;
    trace.min_lower_slack = std::min(trace.min_lower_slack, rec.lower_min_slack);
    trace.min_upper_slack = std::min(trace.min_upper_slack, rec.upper_min_slack);
    trace.steps.push_back(std::move(rec));
  };

  record(0, Eigen::VectorXd::Zero(mdp.n_pairs()));
  for (long k = 0; k < cfg.n_steps; ++k) {
    const Transition t = sample_transition(rng, cfg, mdp, q, sampler);
    const Eigen::VectorXd w = realized_noise(q, t, cfg.op, mm, iid->d);
    const QTable q_pre = q;  // the switching matrix uses the pre-update iterate
    q = step(q, t, cfg.op, alpha, mdp.discount());
    x_lower = lower_step(cfg.op.kind(), x_lower, w, at_star, alpha, beta, mm);
    x_upper = upper_step(cfg.op.kind(), x_upper, q_pre, w, alpha, beta, mm, q_star);
    record(k + 1, w);
  }
  return trace;
}

void write_coupled_csv(std::ostream& out, const CoupledTrace& trace) {
  out << "step,lower_min_slack,upper_min_slack,linf_learner_error,linf_lower_error,"
         "linf_upper_error\n";
  char buf[32];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << ',' << buf;
  };
  for (const auto& s : trace.steps) {
    out << s.step;
    put(s.lower_min_slack);
    put(s.upper_min_slack);
    put(s.learner_dev.lpNorm<Eigen::Infinity>());
    put(s.lower_dev.lpNorm<Eigen::Infinity>());
    put(s.upper_dev.lpNorm<Eigen::Infinity>());
    out << "\n";
  }
}

}  // namespace softq
