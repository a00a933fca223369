#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "softq/acceptance.hpp"
#include "softq/experiment.hpp"
#include "softq/solvers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriterionFailure = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw softq::IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

softq::BoundParams parse_bound_params(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw softq::ParseError(std::string("params: ") + e.what());
  }
  softq::BoundParams p;
  try {
    p.alpha = doc.at("alpha").get<double>();
    p.beta = doc.at("beta").get<double>();
    p.gamma = doc.at("gamma").get<double>();
    p.d_min = doc.at("d_min").get<double>();
    p.d_max = doc.at("d_max").get<double>();
    p.n_pairs = doc.at("n_pairs").get<int>();
    p.n_actions = doc.at("n_actions").get<int>();
    if (doc.contains("q0_gap_l2")) p.q0_gap_l2 = doc.at("q0_gap_l2").get<double>();
    if (doc.contains("q0_gap_linf")) p.q0_gap_linf = doc.at("q0_gap_linf").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw softq::ParseError(std::string("params: ") + e.what());
  }
  p.validate();
  return p;
}

void print_table(const softq::QTable& q) {
  for (int s = 0; s < q.n_states(); ++s) {
    std::printf("  state %d:", s + 1);
    for (int a = 0; a < q.n_actions(); ++a) std::printf(" %.12g", q.get(s, a));
    std::printf("\n");
  }
}

int cmd_run(const std::string& config_path, const std::string& preset,
            const std::string& protocol, const std::string& out_dir) {
  const std::string text = config_path.empty() ? "" : read_file(config_path);
  softq::ExperimentConfig cfg = softq::parse_config(text, preset);
  if (!protocol.empty()) {
    cfg.protocol = protocol == "paper" ? softq::Protocol::Paper : softq::Protocol::Iid;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (const char* seed_env = std::getenv("SOFTQ_SEED")) {
    cfg.base_seed = std::strtoull(seed_env, nullptr, 10);
  }
  cfg.validate();
  return softq::run_command(cfg);
}

int cmd_verify(bool quick, const std::string& report_path) {
  const softq::AcceptanceReport report = softq::run_acceptance(quick, std::cout);
  const std::string json = softq::report_to_json(report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw softq::IoError("cannot write " + report_path);
    out << json;
  } else {
    std::cout << json;
  }
  return report.all_pass ? kExitOk : kExitCriterionFailure;
}

int cmd_bounds(const std::string& kind_name, long k, const std::string& params_path,
               const std::string& mode_name, const std::string& curve_path) {
  const softq::BoundKind kind = softq::parse_bound_kind(kind_name);
  const softq::BoundParams p = parse_bound_params(read_file(params_path));
  const softq::BoundMode mode = mode_name == "paper-loose" ? softq::BoundMode::PaperLoose
                                                           : softq::BoundMode::MeasuredGap;
  const softq::BoundCurve curve = softq::bound_curve(kind, {k}, p, mode);
  std::printf("%s(k=%ld) = %.17g\n", kind_name.c_str(), k, curve.values.front().second);
  std::printf("rho = %.17g\n", softq::decay_rate(p));
  if (!curve_path.empty()) {
    std::vector<long> ks;
    for (long i = 0; i <= k; i += std::max<long>(1, k / 200)) ks.push_back(i);
    if (ks.empty() || ks.back() != k) ks.push_back(k);
    std::ofstream out(curve_path);
    if (!out) throw softq::IoError("cannot write " + curve_path);
    softq::write_bound_csv(out, softq::bound_curve(kind, ks, p, mode));
  }
  return kExitOk;
}

int cmd_solve(const std::string& mdp_path, const std::string& op_name, double beta) {
  const softq::TabularMdp mdp = softq::load_mdp(mdp_path);
  if (op_name == "max") {
    const softq::QTable q = softq::optimal_q(mdp);
    std::printf("optimal Q (value iteration, tol 1e-10):\n");
    print_table(q);
    std::printf("bellman residual: %.3g\n",
                softq::bellman_residual(mdp, q, softq::SoftOperator::hard_max()));
    return kExitOk;
  }
  const softq::SoftOperator op = op_name == "lse" ? softq::SoftOperator::lse(beta)
                                                  : softq::SoftOperator::boltzmann(beta);
  const softq::FixedPointReport report = softq::soft_fixed_point(mdp, op);
  std::printf("%s fixed point (beta=%g), probe 0 limit:\n", op_name.c_str(), beta);
  print_table(report.q);
  std::printf("converged: %s, residual %.3g\n", report.converged ? "yes" : "no",
              report.residual);
  for (const auto& w : report.basin_witnesses) {
    std::printf("  probe %d: converged=%s iterations=%ld residual=%.3g limit:",
                w.probe_id, w.converged ? "yes" : "no", w.iterations, w.residual);
    for (int i = 0; i < w.limit.size(); ++i) std::printf(" %.12g", w.limit.values()[i]);
    std::printf("\n");
  }
  if (report.multiple_fixed_points_suspected) {
    std::printf("note: probes disagree beyond 10x tolerance -- multiple fixed points "
                "suspected\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softq: tabular soft Q-learning laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a sweep and write CSV/SVG outputs");
  std::string config_path, preset, protocol, out_dir;
  run->add_option("--config", config_path, "JSON experiment config");
  run->add_option("--preset", preset, "fig2-lse|fig2-boltz|fig3-lse|fig3-boltz")
      ->check(CLI::IsMember({"fig2-lse", "fig2-boltz", "fig3-lse", "fig3-boltz"}));
  run->add_option("--protocol", protocol, "iid (analysis model) or paper (episodic softmax)")
      ->check(CLI::IsMember({"iid", "paper"}));
  run->add_option("--out", out_dir, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  bool quick = false;
  std::string report_path;
  verify->add_flag("--quick", quick, "reduced-scale smoke run");
  verify->add_option("--report", report_path, "write the JSON report here instead of stdout");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate a closed-form bound");
  std::string kind_name, params_path, mode_name = "measured-gap", curve_path;
  long k_steps = 0;
  bounds->add_option("--kind", kind_name, "lse-lower|lse-final|boltz-lower|boltz-final|trace")
      ->required();
  bounds->add_option("--k", k_steps, "step index")->required();
  bounds->add_option("--params", params_path, "JSON file of bound parameters")->required();
  bounds->add_option("--mode", mode_name, "measured-gap (default) or paper-loose")
      ->check(CLI::IsMember({"measured-gap", "paper-loose"}));
  bounds->add_option("--curve", curve_path, "also write a k,bound CSV curve here");

  // solve
  auto* solve = app.add_subcommand("solve", "compute Q* or a soft fixed point");
  std::string mdp_path, op_name = "max";
  double beta = 1000.0;
  solve->add_option("--mdp", mdp_path, "MDP JSON file, or 'builtin'")->required();
  solve->add_option("--operator", op_name, "lse|boltz|max (default max)")
      ->check(CLI::IsMember({"lse", "boltz", "max"}));
  solve->add_option("--beta", beta, "sharpness for lse/boltz (default 1000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, preset, protocol, out_dir);
    if (verify->parsed()) return cmd_verify(quick, report_path);
    if (bounds->parsed()) return cmd_bounds(kind_name, k_steps, params_path, mode_name, curve_path);
    if (solve->parsed()) return cmd_solve(mdp_path, op_name, beta);
  } catch (const softq::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const softq::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const softq::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCriterionFailure;
  }
  return kExitUsage;
}
