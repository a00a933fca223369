#include "softq/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "softq/errors.hpp"

namespace softq {

void BoundParams::validate() const {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ValidationError("BoundParams: alpha not in (0,1)");
  if (!(beta > 0.0)) throw ValidationError("BoundParams: beta must be positive");
  if (!(gamma >= 0.0) || gamma >= 1.0) throw ValidationError("BoundParams: gamma not in [0,1)");
  if (!(d_min > 0.0) || d_min > d_max || !(d_max < 1.0)) {
    throw ValidationError("BoundParams: need 0 < d_min <= d_max < 1");
  }
  if (n_pairs < 1 || n_actions < 1 || n_pairs < n_actions) {
    throw ValidationError("BoundParams: inconsistent cardinalities");
  }
  if (q0_gap_l2 < 0.0 || q0_gap_linf < 0.0) {
    throw ValidationError("BoundParams: gaps must be nonnegative");
  }
}

namespace {

// rho^k and k rho^{k-1} evaluated in log space.  rho = 1 - delta with the
// decrement delta known exactly, so log1p(-delta) avoids the cancellation
// of forming rho first; the transient stays resolved out to k ~ 1e7 even
// when rho is within 1e-5 of one.
double log_rho(const BoundParams& p) {
  return std::log1p(-p.alpha * p.d_min * (1.0 - p.gamma));
}

double rho_pow(const BoundParams& p, long k) {
  if (k == 0) return 1.0;
  return std::exp(static_cast<double>(k) * log_rho(p));
}

double k_rho_pow_km1(const BoundParams& p, long k) {
  if (k == 0) return 0.0;
  return std::exp(std::log(static_cast<double>(k)) + static_cast<double>(k - 1) * log_rho(p));
}

double ln_actions(const BoundParams& p) { return std::log(static_cast<double>(p.n_actions)); }

// The scale-free stand-in for ||Q0 - Q*||_2 used by the verbatim
// closed-form constants.
double loose_gap(const BoundParams& p) {
  return std::sqrt(static_cast<double>(p.n_pairs)) * 2.0 / (1.0 - p.gamma);
}

}  // namespace

double decay_rate(const BoundParams& p) {
  p.validate();
  return 1.0 - p.alpha * p.d_min * (1.0 - p.gamma);
}

double lse_lower_bound(long k, const BoundParams& p) {
  p.validate();
  const double n = p.n_pairs;
  const double constant = std::sqrt(6.0) * std::sqrt(p.alpha) * (ln_actions(p) + p.beta) * n /
                          (p.beta * std::sqrt(p.d_min) * std::pow(1.0 - p.gamma, 1.5));
  return constant + n * p.q0_gap_l2 * rho_pow(p, k);
}

double lse_final_bound(long k, const BoundParams& p, BoundMode mode) {
  p.validate();
  const double n = p.n_pairs;
  const double gap = mode == BoundMode::PaperLoose ? loose_gap(p) : p.q0_gap_l2;
  const double term1 = 3.0 * std::sqrt(6.0) * std::sqrt(p.alpha) * p.d_max *
                       (ln_actions(p) + p.beta) * n /
                       (p.beta * std::pow(p.d_min, 1.5) * std::pow(1.0 - p.gamma, 2.5));
  const double term2 = 2.0 * p.alpha * p.gamma * p.d_max * n * gap * k_rho_pow_km1(p, k);
  const double term3 = ln_actions(p) / (p.beta * p.d_min * (1.0 - p.gamma));
  const double term4 = n * gap * rho_pow(p, k);
  return term1 + term2 + term3 + term4;
}

double boltz_lower_bound(long k, const BoundParams& p) {
  p.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(p.n_pairs));
  const double term1 = sqrt_n * p.q0_gap_l2 * rho_pow(p, k);
  const double term2 = std::sqrt(6.0) * std::sqrt(p.alpha) * (ln_actions(p) + p.beta) * sqrt_n /
                       (p.beta * std::sqrt(p.d_min) * std::pow(1.0 - p.gamma, 1.5));
  const double term3 =
      p.gamma * p.d_max * ln_actions(p) * sqrt_n / (p.beta * p.d_min * (1.0 - p.gamma));
  return term1 + term2 + term3;
}

double boltz_final_bound(long k, const BoundParams& p, BoundMode mode) {
  p.validate();
  const double sqrt_n = std::sqrt(static_cast<double>(p.n_pairs));
  const double gap = mode == BoundMode::PaperLoose ? loose_gap(p) : p.q0_gap_l2;
  const double term1 = 2.0 * p.alpha * p.gamma * p.d_max * sqrt_n * gap * k_rho_pow_km1(p, k);
  const double term2 = 3.0 * std::sqrt(6.0) * std::sqrt(p.alpha) * p.d_max *
                       (ln_actions(p) + p.beta) * sqrt_n /
                       (p.beta * std::pow(p.d_min, 1.5) * std::pow(1.0 - p.gamma, 2.5));
  const double term3 = 4.0 * p.d_max * ln_actions(p) * sqrt_n /
                       (p.beta * p.d_min * p.d_min * (1.0 - p.gamma) * (1.0 - p.gamma));
  const double term4 = sqrt_n * gap * rho_pow(p, k);
  return term1 + term2 + term3 + term4;
}

double trace_bound(long k, const BoundParams& p) {
  p.validate();
  const double n = p.n_pairs;
  const double lnb = ln_actions(p) + p.beta;
  const double constant = 6.0 * p.alpha * lnb * lnb * n * n /
                          (p.beta * p.beta * p.d_min * std::pow(1.0 - p.gamma, 3.0));
  const double r = rho_pow(p, k);
  return constant + n * n * p.q0_gap_l2 * p.q0_gap_l2 * r * r;
}

double noise_moment_bound(const BoundParams& p) {
  p.validate();
  const double lnb = ln_actions(p) + p.beta;
  return 6.0 * lnb * lnb / (p.beta * p.beta * (1.0 - p.gamma) * (1.0 - p.gamma));
}

double iterate_bound(const BoundParams& p) {
  p.validate();
  return (1.0 + p.gamma * ln_actions(p) / p.beta) / (1.0 - p.gamma);
}

const char* bound_kind_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::LSELower:
      return "lse-lower";
    case BoundKind::LSEFinal:
      return "lse-final";
    case BoundKind::BoltzLower:
      return "boltz-lower";
    case BoundKind::BoltzFinal:
      return "boltz-final";
    case BoundKind::TraceXk:
      return "trace";
  }
  return "?";
}

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "lse-lower") return BoundKind::LSELower;
  if (name == "lse-final") return BoundKind::LSEFinal;
  if (name == "boltz-lower") return BoundKind::BoltzLower;
  if (name == "boltz-final") return BoundKind::BoltzFinal;
  if (name == "trace") return BoundKind::TraceXk;
  throw ValidationError("unknown bound kind: " + name);
}

BoundCurve bound_curve(BoundKind kind, const std::vector<long>& ks, const BoundParams& p,
                       BoundMode mode) {
  BoundCurve curve;
  curve.kind = kind;
  curve.values.reserve(ks.size());
  for (long k : ks) {
    double v = 0.0;
    switch (kind) {
      case BoundKind::LSELower:
        v = lse_lower_bound(k, p);
        break;
      case BoundKind::LSEFinal:
        v = lse_final_bound(k, p, mode);
        break;
      case BoundKind::BoltzLower:
        v = boltz_lower_bound(k, p);
        break;
      case BoundKind::BoltzFinal:
        v = boltz_final_bound(k, p, mode);
        break;
      case BoundKind::TraceXk:
        v = trace_bound(k, p);
        break;
    }
    curve.values.emplace_back(k, v);
  }
  return curve;
}

void write_bound_csv(std::ostream& out, const BoundCurve& curve) {
  out << "k,bound\n";
  char buf[32];
  for (const auto& [k, v] : curve.values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << ',' << buf << "\n";
  }
}

Eigen::MatrixXd propagate_autocorrelation(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& a,
                                          const std::vector<Eigen::MatrixXd>& w_seq, double alpha,
                                          long k) {
  const Eigen::Index n = x0.rows();
  if (x0.cols() != n || a.rows() != n || a.cols() != n) {
    throw DimensionMismatch("propagate_autocorrelation: inconsistent matrix shapes");
  }
  if (k < 0 || static_cast<size_t>(k) > w_seq.size()) {
    throw DimensionMismatch("propagate_autocorrelation: need one W per step");
  }
  Eigen::MatrixXd x = 0.5 * (x0 + x0.transpose());
  for (long i = 0; i < k; ++i) {
    const Eigen::MatrixXd& w = w_seq[static_cast<size_t>(i)];
    if (w.rows() != n || w.cols() != n) {
      throw DimensionMismatch("propagate_autocorrelation: W_" + std::to_string(i) +
                              " has wrong shape");
    }
    x = a * x * a.transpose() + (alpha * alpha) * w;
    x = 0.5 * (x + x.transpose());
  }
  return x;
}

}  // namespace softq
