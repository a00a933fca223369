#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "softq/acceptance.hpp"
#include "softq/bounds.hpp"
#include "softq/comparison.hpp"
#include "softq/mdp_io.hpp"
#include "softq/rng.hpp"
#include "softq/solvers.hpp"

using namespace softq;

namespace {

// Parameter point matching the benchmark MDP with uniform visits.
BoundParams benchmark_params() {
  BoundParams p;
  p.alpha = 0.001;
  p.beta = 1000.0;
  p.gamma = 0.9;
  p.d_min = 0.25;
  p.d_max = 0.25;
  p.n_pairs = 4;
  p.n_actions = 2;
  p.q0_gap_l2 = 8.5;
  p.q0_gap_linf = 4.9;
  return p;
}

BoundParams random_params(Rng& rng) {
  BoundParams p;
  p.alpha = std::exp(rng.uniform(std::log(1e-4), std::log(0.5)));
  p.beta = std::exp(rng.uniform(std::log(0.1), std::log(1e4)));
  p.gamma = rng.uniform(0.0, 0.99);
  p.d_min = rng.uniform(0.01, 0.5);
  p.d_max = rng.uniform(p.d_min, 0.99);
  const int n_states = 1 + rng.uniform_int(5);
  p.n_actions = 1 + rng.uniform_int(5);
  p.n_pairs = n_states * p.n_actions;
  p.q0_gap_l2 = rng.uniform(0.0, 10.0);
  p.q0_gap_linf = rng.uniform(0.0, p.q0_gap_l2);
  return p;
}

}  // namespace

TEST_CASE("decay_rate") {
  BoundParams p = benchmark_params();
  SUBCASE("arithmetic anchors") {
    p.alpha = 0.5;
    p.d_min = 0.5;
    p.d_max = 0.5;
    p.gamma = 0.0;
    CHECK(decay_rate(p) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(decay_rate(benchmark_params()) == doctest::Approx(0.999975).epsilon(1e-14));
  }
  SUBCASE("increases toward one with the discount") {
    double prev = 0.0;
    for (double gamma : {0.0, 0.3, 0.6, 0.9, 0.99}) {
      p = benchmark_params();
      p.gamma = gamma;
      const double rho = decay_rate(p);
      CHECK(rho > prev);
      CHECK(rho > 0.0);
      CHECK(rho < 1.0);
      prev = rho;
    }
  }
  SUBCASE("invalid parameters are rejected") {
    p = benchmark_params();
    p.alpha = 1.0;
    CHECK_THROWS_AS(decay_rate(p), ValidationError);
    p = benchmark_params();
    p.d_min = 0.0;
    CHECK_THROWS_AS(decay_rate(p), ValidationError);
    p = benchmark_params();
    p.d_max = 1.0;
    CHECK_THROWS_AS(decay_rate(p), ValidationError);
    p = benchmark_params();
    p.d_min = 0.5;
    p.d_max = 0.25;
    CHECK_THROWS_AS(decay_rate(p), ValidationError);
    p = benchmark_params();
    p.q0_gap_l2 = -1.0;
    CHECK_THROWS_AS(decay_rate(p), ValidationError);
  }
}

TEST_CASE("lower-system bound (LSE branch)") {
  BoundParams p = benchmark_params();
  SUBCASE("tends to the constant term as k grows") {
    const double constant = lse_lower_bound(100000000, p);
    BoundParams zero_gap = p;
    zero_gap.q0_gap_l2 = 0.0;
    CHECK(constant == doctest::Approx(lse_lower_bound(0, zero_gap)).epsilon(1e-9));
  }
  SUBCASE("printed anchor at the benchmark point") {
    BoundParams zero_gap = p;
    zero_gap.q0_gap_l2 = 0.0;
    CHECK(lse_lower_bound(0, zero_gap) == doctest::Approx(19.609).epsilon(1e-4));
  }
  SUBCASE("initial gap enters the transient term linearly") {
    BoundParams doubled = p;
    doubled.q0_gap_l2 *= 2.0;
    BoundParams zero_gap = p;
    zero_gap.q0_gap_l2 = 0.0;
    const long k = 1000;
    const double constant = lse_lower_bound(k, zero_gap);
    CHECK(lse_lower_bound(k, doubled) - constant ==
          doctest::Approx(2.0 * (lse_lower_bound(k, p) - constant)).epsilon(1e-12));
  }
  SUBCASE("monotone nonincreasing in k") {
    double prev = lse_lower_bound(0, p);
    for (long k : {1L, 10L, 100L, 10000L, 1000000L}) {
      const double v = lse_lower_bound(k, p);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("final-iterate bound (LSE branch)") {
  const BoundParams p = benchmark_params();
  SUBCASE("k = 0 has no switching transient") {
    for (BoundMode mode : {BoundMode::MeasuredGap, BoundMode::PaperLoose}) {
      const double v0 = lse_final_bound(0, p, mode);
      CHECK(std::isfinite(v0));
      CHECK(v0 > 0.0);
      // Removing the k rho^{k-1} term by hand: at k=0 the bound is the
      // three remaining terms; adding one step can only shrink rho^k.
      CHECK(v0 == doctest::Approx(oracle::naive_lse_final(0, p, mode == BoundMode::PaperLoose))
                      .epsilon(1e-12));
    }
  }
  SUBCASE("beta to infinity kills the operator-gap term") {
    BoundParams sharp = p;
    sharp.beta = 1e12;
    BoundParams zero_gap = sharp;
    zero_gap.q0_gap_l2 = 0.0;
    const double constant = lse_final_bound(1000000000, zero_gap, BoundMode::MeasuredGap);
    // Only the sqrt(alpha) term survives: (ln|A| + beta)/beta -> 1.
    const double expected = 3.0 * std::sqrt(6.0) * std::sqrt(sharp.alpha) * sharp.d_max * 4.0 /
                            (std::pow(sharp.d_min, 1.5) * std::pow(0.1, 2.5));
    CHECK(constant == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("strictly decreasing in beta on the sweep grid") {
    for (BoundMode mode : {BoundMode::MeasuredGap, BoundMode::PaperLoose}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double beta : {10.0, 100.0, 1000.0, 10000.0}) {
        BoundParams q = p;
        q.beta = beta;
        const double v = lse_final_bound(100000, q, mode);
        CHECK(v < prev);
        prev = v;
      }
    }
  }
  SUBCASE("strictly increasing in alpha on the sweep grid") {
    for (BoundMode mode : {BoundMode::MeasuredGap, BoundMode::PaperLoose}) {
      double prev = 0.0;
      for (double alpha : {1e-4, 1e-3, 1e-2}) {
        BoundParams q = p;
        q.alpha = alpha;
        const double v = lse_final_bound(100000, q, mode);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("lower-system bound (Boltzmann branch)") {
  SUBCASE("single action removes the operator-gap term") {
    BoundParams p = benchmark_params();
    p.n_actions = 1;
    p.n_pairs = 4;
    BoundParams zero_gap = p;
    zero_gap.q0_gap_l2 = 0.0;
    const double expected = std::sqrt(6.0) * std::sqrt(p.alpha) * p.beta * 2.0 /
                            (p.beta * std::sqrt(p.d_min) * std::pow(0.1, 1.5));
    CHECK(boltz_lower_bound(0, zero_gap) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("monotone nonincreasing in k") {
    const BoundParams p = benchmark_params();
    double prev = boltz_lower_bound(0, p);
    for (long k : {1L, 100L, 100000L}) {
      const double v = boltz_lower_bound(k, p);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("final-iterate bound (Boltzmann branch)") {
  const BoundParams p = benchmark_params();
  SUBCASE("k = 0 has no switching transient") {
    CHECK(boltz_final_bound(0, p, BoundMode::PaperLoose) ==
          doctest::Approx(oracle::naive_boltz_final(0, p, true)).epsilon(1e-12));
  }
  SUBCASE("beta to infinity leaves the sqrt(alpha) constant only") {
    BoundParams sharp = p;
    sharp.beta = 1e12;
    sharp.q0_gap_l2 = 0.0;
    const double constant = boltz_final_bound(1000000000, sharp, BoundMode::MeasuredGap);
    const double expected = 3.0 * std::sqrt(6.0) * std::sqrt(sharp.alpha) * sharp.d_max * 2.0 /
                            (std::pow(sharp.d_min, 1.5) * std::pow(0.1, 2.5));
    CHECK(constant == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("grid monotonicities") {
    for (BoundMode mode : {BoundMode::MeasuredGap, BoundMode::PaperLoose}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double beta : {10.0, 100.0, 1000.0, 10000.0}) {
        BoundParams q = p;
        q.beta = beta;
        const double v = boltz_final_bound(100000, q, mode);
        CHECK(v < prev);
        prev = v;
      }
      prev = 0.0;
      for (double alpha : {1e-4, 1e-3, 1e-2}) {
        BoundParams q = p;
        q.alpha = alpha;
        const double v = boltz_final_bound(100000, q, mode);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("autocorrelation trace bound") {
  const BoundParams p = benchmark_params();
  SUBCASE("squared lower bound is dominated via square-root subadditivity") {
    Rng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
      const BoundParams q = random_params(rng);
      for (long k : {0L, 10L, 1000L, 100000L}) {
        const double lower = lse_lower_bound(k, q);
        CHECK(lower * lower <= 2.0 * trace_bound(k, q) * (1.0 + 1e-12));
      }
    }
  }
  SUBCASE("constant in k when the initial gap vanishes") {
    BoundParams q = p;
    q.q0_gap_l2 = 0.0;
    CHECK(trace_bound(0, q) == trace_bound(1000000, q));
  }
  SUBCASE("first term scales linearly in alpha") {
    BoundParams q = p;
    q.q0_gap_l2 = 0.0;
    BoundParams q2 = q;
    q2.alpha = 2.0 * q.alpha;
    CHECK(trace_bound(0, q2) == doctest::Approx(2.0 * trace_bound(0, q)).epsilon(1e-12));
  }
}

TEST_CASE("noise second-moment and iterate bounds") {
  BoundParams p = benchmark_params();
  SUBCASE("printed anchors") {
    CHECK(noise_moment_bound(p) == doctest::Approx(600.832).epsilon(2e-6));
    CHECK(iterate_bound(p) == doctest::Approx(10.00624).epsilon(1e-6));
  }
  SUBCASE("limits") {
    p.beta = 1e14;
    CHECK(noise_moment_bound(p) == doctest::Approx(6.0 / 0.01).epsilon(1e-9));
    p = benchmark_params();
    p.gamma = 0.0;
    p.beta = 1.0;
    p.n_actions = 1;
    CHECK(noise_moment_bound(p) == 6.0);
    CHECK(iterate_bound(p) == 1.0);
    p = benchmark_params();
    p.n_actions = 1;
    CHECK(iterate_bound(p) == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("transient terms vanish on schedule") {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    BoundParams p = random_params(rng);
    const double rho = decay_rate(p);
    const long k20 = static_cast<long>(std::ceil(20.0 / (1.0 - rho)));
    BoundParams zero_gap = p;
    zero_gap.q0_gap_l2 = 0.0;

    // Lower-system curves: the only transient is rho^k.
    CHECK(lse_lower_bound(k20, p) - lse_lower_bound(k20, zero_gap) <= 1e-6);
    CHECK(boltz_lower_bound(k20, p) - boltz_lower_bound(k20, zero_gap) <= 1e-6);

    // Final-iterate curves carry an extra k rho^{k-1} term whose 1e-6
    // crossing sits near t e^{-t} = 1e-6 (1-rho)/coefficient; 40/(1-rho)
    // covers the worst coefficient corner of this grid.
    const long k40 = static_cast<long>(std::ceil(40.0 / (1.0 - rho)));
    const long huge = std::max<long>(8L * k40, 8000000000L);
    for (BoundMode mode : {BoundMode::MeasuredGap, BoundMode::PaperLoose}) {
      CHECK(lse_final_bound(k40, p, mode) - lse_final_bound(huge, p, mode) <= 1e-6);
      CHECK(boltz_final_bound(k40, p, mode) - boltz_final_bound(huge, p, mode) <= 1e-6);
    }
  }
}

TEST_CASE("production bounds agree with the naive transcriptions") {
  Rng rng(53);
  double worst = 0.0;
  const auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
  };
  for (int trial = 0; trial < 50; ++trial) {
    const BoundParams p = random_params(rng);
    worst = std::max(worst, rel(decay_rate(p), oracle::naive_decay_rate(p)));
    worst = std::max(worst, rel(noise_moment_bound(p), oracle::naive_noise_moment(p)));
    worst = std::max(worst, rel(iterate_bound(p), oracle::naive_iterate_bound(p)));
    for (long k : {0L, 1L, 433L, 100000L}) {
      worst = std::max(worst, rel(lse_lower_bound(k, p), oracle::naive_lse_lower(k, p)));
      worst = std::max(worst, rel(boltz_lower_bound(k, p), oracle::naive_boltz_lower(k, p)));
      worst = std::max(worst, rel(trace_bound(k, p), oracle::naive_trace(k, p)));
      for (bool loose : {false, true}) {
        const BoundMode mode = loose ? BoundMode::PaperLoose : BoundMode::MeasuredGap;
        worst = std::max(worst, rel(lse_final_bound(k, p, mode),
                                    oracle::naive_lse_final(k, p, loose)));
        worst = std::max(worst, rel(boltz_final_bound(k, p, mode),
                                    oracle::naive_boltz_final(k, p, loose)));
      }
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("dual comparison detects a corrupted formula") {
  // Mutation-style control: a sign slip in the decay rate (or a dropped
  // exponent in a denominator) must show up as a large relative gap.
  const BoundParams p = benchmark_params();
  const double corrupted_rho = 1.0 + p.alpha * p.d_min * (1.0 - p.gamma);
  CHECK(std::abs(corrupted_rho - oracle::naive_decay_rate(p)) /
            std::abs(oracle::naive_decay_rate(p)) >
        1e-10);
  const double corrupted_final = oracle::naive_lse_final(100000, p, true) * (1.0 + 1e-6);
  CHECK(std::abs(corrupted_final - lse_final_bound(100000, p, BoundMode::PaperLoose)) /
            corrupted_final >
        1e-10);
}

TEST_CASE("bound curves evaluate on a grid and export to CSV") {
  const BoundParams p = benchmark_params();
  const std::vector<long> ks = {0, 10, 100, 1000};
  const BoundCurve curve = bound_curve(BoundKind::LSEFinal, ks, p, BoundMode::MeasuredGap);
  REQUIRE(curve.values.size() == 4);
  for (const auto& [k, v] : curve.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  std::ostringstream out;
  write_bound_csv(out, curve);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,bound");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  CHECK(parse_bound_kind("lse-final") == BoundKind::LSEFinal);
  CHECK_THROWS_AS(parse_bound_kind("nope"), ValidationError);
}

TEST_CASE("propagate_autocorrelation") {
  SUBCASE("identity map with zero forcing is stationary") {
    Eigen::MatrixXd x0(2, 2);
    x0 << 2.0, 0.5, 0.5, 1.0;
    const std::vector<Eigen::MatrixXd> ws(10, Eigen::MatrixXd::Zero(2, 2));
    const Eigen::MatrixXd x =
        propagate_autocorrelation(x0, Eigen::MatrixXd::Identity(2, 2), ws, 0.1, 10);
    CHECK((x - x0).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
  SUBCASE("one step from zero is alpha^2 W") {
    Eigen::MatrixXd w(2, 2);
    w << 1.0, 0.25, 0.25, 2.0;
    const Eigen::MatrixXd x = propagate_autocorrelation(
        Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2), {w}, 0.5, 1);
    CHECK((x - 0.25 * w).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
  SUBCASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(
        propagate_autocorrelation(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3),
                                  {Eigen::MatrixXd::Zero(2, 2)}, 0.1, 1),
        DimensionMismatch);
    CHECK_THROWS_AS(
        propagate_autocorrelation(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2),
                                  {}, 0.1, 1),
        DimensionMismatch);
  }
  SUBCASE("result stays symmetric positive semidefinite") {
    Rng rng(54);
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.uniform(-0.4, 0.4);
    std::vector<Eigen::MatrixXd> ws;
    for (int i = 0; i < 20; ++i) {
      Eigen::MatrixXd m(3, 3);
      for (int j = 0; j < 9; ++j) m(j / 3, j % 3) = rng.uniform(-1.0, 1.0);
      ws.push_back(m * m.transpose());
    }
    const Eigen::MatrixXd x = propagate_autocorrelation(Eigen::MatrixXd::Zero(3, 3), a, ws,
                                                        0.3, 20);
    CHECK((x - x.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x).eigenvalues();
    CHECK(eig.minCoeff() >= -1e-12);
  }
  SUBCASE("empirical trace stays below the closed-form trace bound") {
    const TabularMdp mdp = two_state_mdp();
    const QTable q_star = optimal_q(mdp, 1e-12);
    const Eigen::VectorXd d = Eigen::VectorXd::Constant(4, 0.25);
    const ModelMatrices mm = assemble_matrices(mdp, d);
    const double alpha = 0.01, beta = 100.0;
    const SoftOperator op = SoftOperator::lse(beta);

    // Reachable tables: a few snapshots of an actual run.
    LearnerConfig lc;
    lc.op = op;
    lc.step_size = alpha;
    lc.n_steps = 2000;
    lc.sampling = IidSampling{d};
    lc.seed = 55;
    const Trace tr = run(lc, mdp);
    std::vector<QTable> points = {tr.q0, tr.snapshots[tr.snapshots.size() / 2], tr.q_final};

    // Monte Carlo estimate of E[w w^T] at each point.
    std::vector<Eigen::MatrixXd> w_hats;
    Rng rng(56);
    LearnerConfig sampler_cfg;
    sampler_cfg.sampling = IidSampling{d};
    SamplerState st;
    for (const QTable& q : points) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
      const long n = 20000;
      for (long i = 0; i < n; ++i) {
        const Transition t = sample_transition(rng, sampler_cfg, mdp, q, st);
        const Eigen::VectorXd w = realized_noise(q, t, op, mm);
        acc += w * w.transpose();
      }
      w_hats.push_back(acc / n);
    }

    const Eigen::VectorXd x0_dev = QTable(2, 2).values() - q_star.values();
    BoundParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = mdp.discount();
    p.d_min = 0.25;
    p.d_max = 0.25;
    p.n_pairs = 4;
    p.n_actions = 2;
    p.q0_gap_l2 = x0_dev.norm();
    p.q0_gap_linf = x0_dev.lpNorm<Eigen::Infinity>();

    const Eigen::MatrixXd a_star =
        switching_matrices(q_star, q_star, mm, alpha, mdp.discount()).A;
    std::vector<Eigen::MatrixXd> w_seq;
    for (int i = 0; i < 1000; ++i) w_seq.push_back(w_hats[i % w_hats.size()]);

    Eigen::MatrixXd x = x0_dev * x0_dev.transpose();
    for (long k = 1; k <= 1000; ++k) {
      x = propagate_autocorrelation(x, a_star, {w_seq[k - 1]}, alpha, 1);
      CHECK(x.trace() <= trace_bound(k, p));
    }
  }
}
