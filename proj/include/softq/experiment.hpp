#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "softq/bounds.hpp"
#include "softq/mdp_io.hpp"

namespace softq {

enum class Algorithm { LSE, Boltzmann, Both };
enum class SweepAxis { Beta, Alpha };
enum class Protocol { Iid, Paper };

/// A full sweep description.  Defaults reproduce the beta sweep on the
/// built-in MDP: alpha = 0.001, beta in {10, 100, 1000, 10000}, 10 seeds,
/// 1e5 steps, IID uniform sampling, measured-gap bounds.
struct ExperimentConfig {
  std::string mdp = "builtin";
  Algorithm algorithm = Algorithm::Both;
  SweepAxis axis = SweepAxis::Beta;
  std::vector<double> sweep_values = {10.0, 100.0, 1000.0, 10000.0};
  double fixed_value = 0.001;  // the non-swept parameter
  int n_seeds = 10;
  long n_steps = 100000;
  Protocol protocol = Protocol::Iid;
  BoundMode bound_mode = BoundMode::MeasuredGap;
  std::uint64_t base_seed = 3;
  std::string out_dir = "out";

  double alpha_at(double sweep_value) const {
    return axis == SweepAxis::Alpha ? sweep_value : fixed_value;
  }
  double beta_at(double sweep_value) const {
    return axis == SweepAxis::Beta ? sweep_value : fixed_value;
  }

  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Named presets: fig2-lse, fig2-boltz (beta sweep at alpha = 0.001) and
/// fig3-lse, fig3-boltz (alpha sweep at beta = 1000).
ExperimentConfig preset_config(const std::string& name);

/// Parses a JSON config, starting from the preset (or the defaults when
/// preset is empty) and overriding any key present in the document.
/// Raises ParseError on malformed text, ValidationError on a violated
/// invariant.
ExperimentConfig parse_config(const std::string& text, const std::string& preset = "");

/// Canonical serialization; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

struct SweepPoint {
  double sweep_value = 0.0;
  double mean_error = 0.0;    // seed mean of ||Q_final - Q*||_inf
  double stderr_error = 0.0;  // standard error of that mean (0 when n_seeds == 1)
  double bound = 0.0;         // finite-time bound at k = n_steps
  double mean_tail_error = 0.0;  // seed mean of the tail-averaged iterate error
  std::vector<double> per_seed_error;
  std::vector<double> per_seed_tail_error;
};

struct SweepResult {
  Algorithm algorithm = Algorithm::LSE;
  SweepAxis axis = SweepAxis::Beta;
  int n_seeds = 0;
  long n_steps = 0;
  BoundMode bound_mode = BoundMode::MeasuredGap;
  std::vector<SweepPoint> points;  // ascending in sweep_value
  std::vector<std::string> assumption_violations;
};

/// Runs one algorithm over every (sweep value, seed) pair on a worker
/// pool.  Each run owns the stream derived from (base_seed, algorithm,
/// value index, seed index), so results do not depend on scheduling.
SweepResult run_sweep(const ExperimentConfig& cfg, Algorithm algorithm);

/// Resolves Algorithm::Both into the one-or-two concrete sweeps.
std::vector<SweepResult> run_sweeps(const ExperimentConfig& cfg);

/// CSV with header sweep_value,mean_error,stderr,bound,n_seeds,n_steps,
/// rows ascending in sweep value, 17-significant-digit values.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

/// Per-seed companion table (schema: sweep_value,seed_index,final_error,
/// tail_error).
void emit_details_csv(const SweepResult& result, const std::filesystem::path& path);

/// Self-contained SVG: empirical mean with standard-error band plus the
/// finite-time bound, on log axes.
void emit_plot(const SweepResult& result, const std::filesystem::path& path);

const char* algorithm_name(Algorithm a);

/// Full `run` subcommand: runs the configured sweeps and writes
/// <alg>_sweep.csv, <alg>_details.csv, <alg>_sweep.svg and meta.json into
/// cfg.out_dir.  Returns the process exit code.
int run_command(const ExperimentConfig& cfg);

}  // namespace softq
