#include "softq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "softq/learner.hpp"
#include "softq/solvers.hpp"
#include "softq/svg.hpp"

namespace softq {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  if (sweep_values.empty()) throw ValidationError("config: sweep values must be nonempty");
  for (double v : sweep_values) {
    if (!(v > 0.0)) throw ValidationError("config: sweep values must be positive");
  }
  if (!(fixed_value > 0.0)) throw ValidationError("config: fixed parameter must be positive");
  if (n_seeds < 1) throw ValidationError("config: n_seeds must be >= 1");
  if (n_steps < 0) throw ValidationError("config: n_steps must be >= 0");
  for (double v : sweep_values) {
    const double a = alpha_at(v);
    if (!(a > 0.0) || !(a < 1.0)) {
      throw ValidationError("config: step size " + std::to_string(a) + " not in (0, 1)");
    }
  }
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "fig2-lse" || name == "fig2-boltz") {
    cfg.axis = SweepAxis::Beta;
    cfg.sweep_values = {10.0, 100.0, 1000.0, 10000.0};
    cfg.fixed_value = 0.001;
  } else if (name == "fig3-lse" || name == "fig3-boltz") {
    cfg.axis = SweepAxis::Alpha;
    cfg.sweep_values = {1e-4, 1e-3, 1e-2};
    cfg.fixed_value = 1000.0;
  } else {
    throw ValidationError("unknown preset: " + name);
  }
  cfg.algorithm = name.ends_with("lse") ? Algorithm::LSE : Algorithm::Boltzmann;
  return cfg;
}

namespace {

Algorithm parse_algorithm(const std::string& s) {
  if (s == "lse") return Algorithm::LSE;
  if (s == "boltzmann" || s == "boltz") return Algorithm::Boltzmann;
  if (s == "both") return Algorithm::Both;
  throw ValidationError("config: unknown algorithm '" + s + "'");
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "beta") return SweepAxis::Beta;
  if (s == "alpha") return SweepAxis::Alpha;
  throw ValidationError("config: unknown sweep axis '" + s + "'");
}

Protocol parse_protocol(const std::string& s) {
  if (s == "iid") return Protocol::Iid;
  if (s == "paper") return Protocol::Paper;
  throw ValidationError("config: unknown protocol '" + s + "'");
}

BoundMode parse_bound_mode(const std::string& s) {
  if (s == "measured-gap") return BoundMode::MeasuredGap;
  if (s == "paper-loose") return BoundMode::PaperLoose;
  throw ValidationError("config: unknown bound mode '" + s + "'");
}

const char* axis_name(SweepAxis a) { return a == SweepAxis::Beta ? "beta" : "alpha"; }
const char* protocol_name(Protocol p) { return p == Protocol::Iid ? "iid" : "paper"; }
const char* bound_mode_name(BoundMode m) {
  return m == BoundMode::MeasuredGap ? "measured-gap" : "paper-loose";
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::LSE:
      return "lse";
    case Algorithm::Boltzmann:
      return "boltzmann";
    case Algorithm::Both:
      return "both";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::string& preset) {
  ExperimentConfig cfg = preset.empty() ? ExperimentConfig{} : preset_config(preset);
  if (!text.empty()) {
    ordered_json doc;
    try {
      doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
    try {
      if (doc.contains("mdp")) cfg.mdp = doc["mdp"].get<std::string>();
      if (doc.contains("algorithm")) cfg.algorithm = parse_algorithm(doc["algorithm"]);
      if (doc.contains("sweep")) {
        const auto& sweep = doc["sweep"];
        if (sweep.contains("axis")) cfg.axis = parse_axis(sweep["axis"]);
        if (sweep.contains("values")) {
          cfg.sweep_values = sweep["values"].get<std::vector<double>>();
        }
      }
      if (doc.contains("fixed")) cfg.fixed_value = doc["fixed"].get<double>();
      if (doc.contains("n_seeds")) cfg.n_seeds = doc["n_seeds"].get<int>();
      if (doc.contains("n_steps")) cfg.n_steps = doc["n_steps"].get<long>();
      if (doc.contains("protocol")) cfg.protocol = parse_protocol(doc["protocol"]);
      if (doc.contains("bound_mode")) cfg.bound_mode = parse_bound_mode(doc["bound_mode"]);
      if (doc.contains("base_seed")) cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
      if (doc.contains("out_dir")) cfg.out_dir = doc["out_dir"].get<std::string>();
    } catch (const ordered_json::exception& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ordered_json doc;
  doc["mdp"] = cfg.mdp;
  doc["algorithm"] = algorithm_name(cfg.algorithm);
  doc["sweep"] = ordered_json{{"axis", axis_name(cfg.axis)}, {"values", cfg.sweep_values}};
  doc["fixed"] = cfg.fixed_value;
  doc["n_seeds"] = cfg.n_seeds;
  doc["n_steps"] = cfg.n_steps;
  doc["protocol"] = protocol_name(cfg.protocol);
  doc["bound_mode"] = bound_mode_name(cfg.bound_mode);
  doc["base_seed"] = cfg.base_seed;
  doc["out_dir"] = cfg.out_dir;
  return doc.dump(2) + "\n";
}

namespace {

struct RunOutcome {
  double final_error = 0.0;
  double tail_error = 0.0;
  Eigen::VectorXd visit_counts;
};

std::uint64_t algorithm_stream_id(Algorithm a) { return a == Algorithm::LSE ? 1 : 2; }

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, Algorithm algorithm) {
  cfg.validate();
  if (algorithm == Algorithm::Both) {
    throw ValidationError("run_sweep: resolve Algorithm::Both via run_sweeps");
  }
  const TabularMdp mdp = load_mdp(cfg.mdp);
  const QTable q_star = optimal_q(mdp);
  const int n_values = static_cast<int>(cfg.sweep_values.size());

  std::vector<double> values = cfg.sweep_values;
  std::sort(values.begin(), values.end());

  std::vector<std::vector<RunOutcome>> outcomes(n_values);
  for (auto& row : outcomes) row.resize(cfg.n_seeds);

  struct Task {
    int value_index;
    int seed_index;
  };
  std::vector<Task> tasks;
  for (int vi = 0; vi < n_values; ++vi) {
    for (int si = 0; si < cfg.n_seeds; ++si) tasks.push_back({vi, si});
  }

  const auto run_task = [&](const Task& task) {
    const double value = values[static_cast<size_t>(task.value_index)];
    const double alpha = cfg.alpha_at(value);
    const double beta = cfg.beta_at(value);
    LearnerConfig lc;
    lc.op = algorithm == Algorithm::LSE ? SoftOperator::lse(beta) : SoftOperator::boltzmann(beta);
    lc.step_size = alpha;
    lc.n_steps = cfg.n_steps;
    if (cfg.protocol == Protocol::Iid) {
      lc.sampling =
          IidSampling{Eigen::VectorXd::Constant(mdp.n_pairs(), 1.0 / mdp.n_pairs())};
    } else {
      lc.sampling = TrajectorySampling{SoftmaxOfQ{}, 50, mdp.initial_distribution()};
    }
    lc.seed = Rng::stream(cfg.base_seed,
                          {algorithm_stream_id(algorithm),
                           static_cast<std::uint64_t>(task.value_index),
                           static_cast<std::uint64_t>(task.seed_index)})
                  .next_u64();
    lc.q0 = QTable(mdp.n_states(), mdp.n_actions());
    lc.snapshot_stride = -1;
    const Trace trace = run(lc, mdp);
    RunOutcome out;
    out.final_error = (trace.q_final.values() - q_star.values()).lpNorm<Eigen::Infinity>();
    out.tail_error = (trace.tail_mean.values() - q_star.values()).lpNorm<Eigen::Infinity>();
    out.visit_counts = trace.visit_counts;
    outcomes[static_cast<size_t>(task.value_index)][static_cast<size_t>(task.seed_index)] =
        std::move(out);
  };

  const unsigned n_workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(tasks.size())));
  if (n_workers <= 1) {
    for (const auto& t : tasks) run_task(t);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) {
      pool.emplace_back([&] {
        for (size_t j = next.fetch_add(1); j < tasks.size(); j = next.fetch_add(1)) {
          run_task(tasks[j]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  result.algorithm = algorithm;
  result.axis = cfg.axis;
  result.n_seeds = cfg.n_seeds;
  result.n_steps = cfg.n_steps;
  result.bound_mode = cfg.bound_mode;
  if (cfg.protocol == Protocol::Paper) {
    result.assumption_violations.push_back("time-varying-policy");
  }

  const QTable q0(mdp.n_states(), mdp.n_actions());
  const double q0_gap_l2 = (q0.values() - q_star.values()).norm();
  const double q0_gap_linf = (q0.values() - q_star.values()).lpNorm<Eigen::Infinity>();

  for (int vi = 0; vi < n_values; ++vi) {
    const double value = values[static_cast<size_t>(vi)];
    SweepPoint pt;
    pt.sweep_value = value;
    double sum = 0.0, tail_sum = 0.0;
    Eigen::VectorXd visits = Eigen::VectorXd::Zero(mdp.n_pairs());
    for (int si = 0; si < cfg.n_seeds; ++si) {
      const auto& out = outcomes[static_cast<size_t>(vi)][static_cast<size_t>(si)];
      pt.per_seed_error.push_back(out.final_error);
      pt.per_seed_tail_error.push_back(out.tail_error);
      sum += out.final_error;
      tail_sum += out.tail_error;
      visits += out.visit_counts;
    }
    pt.mean_error = sum / cfg.n_seeds;
    pt.mean_tail_error = tail_sum / cfg.n_seeds;
    if (cfg.n_seeds > 1) {
      double ss = 0.0;
      for (double e : pt.per_seed_error) ss += (e - pt.mean_error) * (e - pt.mean_error);
      pt.stderr_error = std::sqrt(ss / (cfg.n_seeds - 1)) / std::sqrt(double(cfg.n_seeds));
    }

    // Visit distribution backing the bound: the exact IID distribution, or
    // the pooled empirical frequencies under the episodic protocol.
    Eigen::VectorXd d;
    if (cfg.protocol == Protocol::Iid) {
      d = Eigen::VectorXd::Constant(mdp.n_pairs(), 1.0 / mdp.n_pairs());
    } else if (visits.sum() > 0.0) {
      d = visits / visits.sum();
    }
    if (d.size() == 0 || d.minCoeff() <= 0.0 || d.maxCoeff() >= 1.0) {
      pt.bound = std::numeric_limits<double>::infinity();
    } else {
      BoundParams p;
      p.alpha = cfg.alpha_at(value);
      p.beta = cfg.beta_at(value);
      p.gamma = mdp.discount();
      p.d_min = d.minCoeff();
      p.d_max = d.maxCoeff();
      p.n_pairs = mdp.n_pairs();
      p.n_actions = mdp.n_actions();
      p.q0_gap_l2 = q0_gap_l2;
      p.q0_gap_linf = q0_gap_linf;
      pt.bound = algorithm == Algorithm::LSE
                     ? lse_final_bound(cfg.n_steps, p, cfg.bound_mode)
                     : boltz_final_bound(cfg.n_steps, p, cfg.bound_mode);
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

std::vector<SweepResult> run_sweeps(const ExperimentConfig& cfg) {
  std::vector<SweepResult> results;
  if (cfg.algorithm == Algorithm::Both) {
    results.push_back(run_sweep(cfg, Algorithm::LSE));
    results.push_back(run_sweep(cfg, Algorithm::Boltzmann));
  } else {
    results.push_back(run_sweep(cfg, cfg.algorithm));
  }
  return results;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sweep_value,mean_error,stderr,bound,n_seeds,n_steps\n";
  for (const auto& pt : result.points) {
    out << format_g17(pt.sweep_value) << ',' << format_g17(pt.mean_error) << ','
        << format_g17(pt.stderr_error) << ',' << format_g17(pt.bound) << ',' << result.n_seeds
        << ',' << result.n_steps << "\n";
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

void emit_details_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sweep_value,seed_index,final_error,tail_error\n";
  for (const auto& pt : result.points) {
    for (size_t si = 0; si < pt.per_seed_error.size(); ++si) {
      out << format_g17(pt.sweep_value) << ',' << si << ',' << format_g17(pt.per_seed_error[si])
          << ',' << format_g17(pt.per_seed_tail_error[si]) << "\n";
    }
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) {
  if (result.points.empty()) throw ValidationError("emit_plot: need at least one sweep point");
  svg::ChartSpec chart;
  chart.title = std::string(algorithm_name(result.algorithm)) + " soft Q-learning, " +
                axis_name(result.axis) + " sweep";
  chart.x_label = axis_name(result.axis);
  chart.y_label = "sup-norm error at k = " + std::to_string(result.n_steps);
  chart.log_x = true;

  svg::Series empirical;
  empirical.label = "empirical mean +/- stderr";
  empirical.color = "#1f77b4";
  svg::Series bound;
  bound.label = "finite-time bound";
  bound.color = "#d62728";
  bool all_positive = true;
  for (const auto& pt : result.points) {
    empirical.x.push_back(pt.sweep_value);
    empirical.y.push_back(pt.mean_error);
    empirical.y_err.push_back(pt.stderr_error);
    bound.x.push_back(pt.sweep_value);
    bound.y.push_back(pt.bound);
    all_positive = all_positive && pt.mean_error > 0.0 && pt.bound > 0.0 &&
                   std::isfinite(pt.bound);
  }
  chart.log_y = all_positive;
  chart.series = {empirical, bound};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg::render_line_chart(chart);
  if (!out) throw IoError("failed while writing " + path.string());
}

int run_command(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const std::vector<SweepResult> results = run_sweeps(cfg);
  for (const auto& result : results) {
    const std::string stem = algorithm_name(result.algorithm);
    emit_csv(result, std::filesystem::path(cfg.out_dir) / (stem + "_sweep.csv"));
    emit_details_csv(result, std::filesystem::path(cfg.out_dir) / (stem + "_details.csv"));
    emit_plot(result, std::filesystem::path(cfg.out_dir) / (stem + "_sweep.svg"));
  }
  ordered_json meta;
  meta["config"] = ordered_json::parse(serialize_config(cfg));
  ordered_json tags = ordered_json::array();
  for (const auto& result : results) {
    for (const auto& t : result.assumption_violations) tags.push_back(t);
  }
  meta["assumption_violations"] = tags;
  std::ofstream meta_out(std::filesystem::path(cfg.out_dir) / "meta.json");
  if (!meta_out) throw IoError("cannot write meta.json");
  meta_out << meta.dump(2) << "\n";
  return 0;
}

}  // namespace softq
