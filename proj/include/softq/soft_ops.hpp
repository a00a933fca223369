#pragma once

#include <Eigen/Core>

#include "softq/mdp.hpp"

namespace softq {

enum class OperatorKind { LSE, Boltzmann, HardMax };

/// A backup operator over action values: log-sum-exp or Boltzmann
/// averaging with sharpness beta, or the plain maximum.  Larger beta makes
/// both smooth operators approach the maximum.
class SoftOperator {
 public:
  static SoftOperator lse(double beta) { return SoftOperator(OperatorKind::LSE, beta); }
  static SoftOperator boltzmann(double beta) {
    return SoftOperator(OperatorKind::Boltzmann, beta);
  }
  static SoftOperator hard_max() { return SoftOperator(OperatorKind::HardMax, 0.0); }

  OperatorKind kind() const { return kind_; }
  /// Sharpness parameter; meaningless for HardMax.
  double beta() const { return beta_; }

  const char* name() const;

 private:
  SoftOperator(OperatorKind kind, double beta);

  OperatorKind kind_;
  double beta_;
};

/// Applies the operator to a vector of action values.  Both smooth
/// operators shift by the maximum before exponentiating, so no
/// intermediate overflows for beta * range up to at least 1e6.
double soft_value(const Eigen::VectorXd& v, const SoftOperator& op);

/// Stacked per-state application: component s is soft_value(Q(s, .)).
Eigen::VectorXd soft_backup(const QTable& q, const SoftOperator& op);

struct Envelope {
  double lower;
  double upper;
};

/// Provable enclosure of soft_value(v, op): the LSE operator lies in
/// [max v, max v + ln(n)/beta], the Boltzmann operator in
/// [max v - ln(n)/beta, max v], and HardMax collapses to a point.
Envelope operator_envelope(const Eigen::VectorXd& v, const SoftOperator& op);

}  // namespace softq
