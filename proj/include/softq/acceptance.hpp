#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softq/bounds.hpp"
#include "softq/mdp.hpp"

namespace softq {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;   // headline measurement (worst case over the sweep)
  double threshold = 0.0;  // what it was compared against
  std::string details;
  double runtime_s = 0.0;
  double runtime_limit_s = 0.0;  // 0 = no limit
};

struct AcceptanceReport {
  bool quick = false;
  std::vector<CriterionResult> criteria;
  bool all_pass = false;
  double total_runtime_s = 0.0;
};

/// Runs the full verification suite on the built-in benchmark MDP,
/// printing one pass/fail line per criterion to log.  Quick mode shrinks
/// sample counts and run lengths for a fast smoke check; the full run is
/// the normative gate.
AcceptanceReport run_acceptance(bool quick, std::ostream& log);

std::string report_to_json(const AcceptanceReport& report);

/// Independent reference implementations used only to check the
/// production paths.  They share no code with the implementations they
/// validate.
namespace oracle {

/// Q* by exhaustive policy enumeration: solves the linear system of every
/// deterministic policy exactly and takes the componentwise-best values.
/// Only viable when n_actions^n_states is small.
QTable policy_enumeration_q(const TabularMdp& mdp);

// Direct transcriptions of the closed-form bounds, evaluated with plain
// std::pow arithmetic.
double naive_decay_rate(const BoundParams& p);
double naive_lse_lower(long k, const BoundParams& p);
double naive_lse_final(long k, const BoundParams& p, bool loose_gap);
double naive_boltz_lower(long k, const BoundParams& p);
double naive_boltz_final(long k, const BoundParams& p, bool loose_gap);
double naive_trace(long k, const BoundParams& p);
double naive_noise_moment(const BoundParams& p);
double naive_iterate_bound(const BoundParams& p);

}  // namespace oracle

}  // namespace softq
