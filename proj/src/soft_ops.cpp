#include "softq/soft_ops.hpp"

#include <cmath>

namespace softq {

SoftOperator::SoftOperator(OperatorKind kind, double beta) : kind_(kind), beta_(beta) {
  if (kind != OperatorKind::HardMax && !(beta > 0.0)) {
    throw ValidationError("SoftOperator: beta must be positive");
  }
}

const char* SoftOperator::name() const {
  switch (kind_) {
    case OperatorKind::LSE:
      return "lse";
    case OperatorKind::Boltzmann:
      return "boltzmann";
    case OperatorKind::HardMax:
      return "max";
  }
  return "?";
}

namespace {

void check_input(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw EmptyActionSet("soft_value: empty action-value vector");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteInput("soft_value: non-finite entry at index " + std::to_string(i));
    }
  }
}

}  // namespace

double soft_value(const Eigen::VectorXd& v, const SoftOperator& op) {
  check_input(v);
  const double m = v.maxCoeff();
  switch (op.kind()) {
    case OperatorKind::HardMax:
      return m;
    case OperatorKind::LSE: {
      const double beta = op.beta();
      double sum = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::exp(beta * (v[i] - m));
      return m + std::log(sum) / beta;
    }
    case OperatorKind::Boltzmann: {
      // Explicit normalized softmax; the shifted exponentials keep the
      // weights in [0, 1] and the result inside the hull of v.
      const double beta = op.beta();
      double norm = 0.0;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double w = std::exp(beta * (v[i] - m));
        norm += w;
        acc += w * v[i];
      }
      return acc / norm;
    }
  }
  throw ValidationError("soft_value: unknown operator kind");
}

Eigen::VectorXd soft_backup(const QTable& q, const SoftOperator& op) {
  Eigen::VectorXd out(q.n_states());
  for (int s = 0; s < q.n_states(); ++s) out[s] = soft_value(q.action_values(s), op);
  return out;
}

Envelope operator_envelope(const Eigen::VectorXd& v, const SoftOperator& op) {
  check_input(v);
  const double m = v.maxCoeff();
  switch (op.kind()) {
    case OperatorKind::HardMax:
      return {m, m};
    case OperatorKind::LSE:
      return {m, m + std::log(static_cast<double>(v.size())) / op.beta()};
    case OperatorKind::Boltzmann:
      return {m - std::log(static_cast<double>(v.size())) / op.beta(), m};
  }
  throw ValidationError("operator_envelope: unknown operator kind");
}

}  // namespace softq
