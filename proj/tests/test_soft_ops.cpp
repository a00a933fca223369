#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "softq/rng.hpp"
#include "softq/soft_ops.hpp"

using namespace softq;

TEST_CASE("soft_value reproduces directly evaluated reference values") {
  SUBCASE("log-sum-exp") {
    CHECK(soft_value(Eigen::Vector2d{0.0, 0.0}, SoftOperator::lse(1.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
    // Direct evaluation of the unshifted formula.
    CHECK(soft_value(Eigen::Vector2d{1.0, 0.0}, SoftOperator::lse(1.0)) ==
          doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-15));
  }
  SUBCASE("Boltzmann average") {
    CHECK(soft_value(Eigen::Vector3d{2.5, 2.5, 2.5}, SoftOperator::boltzmann(7.0)) ==
          doctest::Approx(2.5).epsilon(1e-15));
    // Direct evaluation: (1*e^1 + 0*e^0) / (e^1 + e^0).
    CHECK(soft_value(Eigen::Vector2d{1.0, 0.0}, SoftOperator::boltzmann(1.0)) ==
          doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-15));
  }
  SUBCASE("hard max") {
    CHECK(soft_value(Eigen::Vector3d{-1.0, 4.0, 2.0}, SoftOperator::hard_max()) == 4.0);
  }
}

TEST_CASE("soft_value rejects bad inputs") {
  CHECK_THROWS_AS(soft_value(Eigen::VectorXd(), SoftOperator::lse(1.0)), EmptyActionSet);
  Eigen::VectorXd nan_vec = Eigen::Vector2d{1.0, std::nan("")};
  CHECK_THROWS_AS(soft_value(nan_vec, SoftOperator::boltzmann(1.0)), NonFiniteInput);
  CHECK_THROWS_AS(SoftOperator::lse(0.0), ValidationError);
  CHECK_THROWS_AS(SoftOperator::boltzmann(-2.0), ValidationError);
}

TEST_CASE("operator_envelope encloses the value on reference points") {
  SUBCASE("lse bounds") {
    const Envelope env = operator_envelope(Eigen::Vector2d{1.0, 0.0}, SoftOperator::lse(1.0));
    CHECK(env.lower == 1.0);
    CHECK(env.upper == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-15));
    const double v = soft_value(Eigen::Vector2d{1.0, 0.0}, SoftOperator::lse(1.0));
    CHECK(v >= env.lower);
    CHECK(v <= env.upper);
  }
  SUBCASE("Boltzmann bounds") {
    const Envelope env =
        operator_envelope(Eigen::Vector2d{1.0, 0.0}, SoftOperator::boltzmann(1.0));
    CHECK(env.lower == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
    CHECK(env.upper == 1.0);
    const double v = soft_value(Eigen::Vector2d{1.0, 0.0}, SoftOperator::boltzmann(1.0));
    CHECK(v >= env.lower);
    CHECK(v <= env.upper);
  }
  SUBCASE("singleton action set collapses the envelope") {
    Eigen::VectorXd v(1);
    v[0] = 3.25;
    const Envelope lse = operator_envelope(v, SoftOperator::lse(2.0));
    CHECK(lse.lower == 3.25);
    CHECK(lse.upper == 3.25);  // ln(1) = 0
    const Envelope boltz = operator_envelope(v, SoftOperator::boltzmann(2.0));
    CHECK(boltz.lower == 3.25);
    CHECK(boltz.upper == 3.25);
    CHECK(soft_value(v, SoftOperator::boltzmann(2.0)) == 3.25);
  }
}

TEST_CASE("envelopes hold across random vectors and sharpness values") {
  Rng rng(21);
  const double betas[] = {0.1, 1.0, 10.0, 1000.0};
  double min_slack = 1.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int dim = 1 + trial % 16;
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-10.0, 10.0);
    for (double beta : betas) {
      for (const SoftOperator& op : {SoftOperator::lse(beta), SoftOperator::boltzmann(beta)}) {
        const double val = soft_value(v, op);
        const Envelope env = operator_envelope(v, op);
        min_slack = std::min({min_slack, val - env.lower, env.upper - val});
      }
    }
  }
  CHECK(min_slack >= -1e-12);
}

TEST_CASE("translation equivariance") {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = 1 + trial % 8;
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-5.0, 5.0);
    const double c = rng.uniform(-20.0, 20.0);
    const Eigen::VectorXd shifted = v.array() + c;
    for (const SoftOperator& op :
         {SoftOperator::lse(3.0), SoftOperator::boltzmann(3.0), SoftOperator::hard_max()}) {
      CHECK(soft_value(shifted, op) ==
            doctest::Approx(soft_value(v, op) + c).epsilon(1e-10));
    }
  }
}

TEST_CASE("sharpness monotonicity on a beta grid") {
  Rng rng(23);
  const double betas[] = {0.1, 0.5, 1.0, 3.0, 10.0, 50.0, 300.0, 2000.0};
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + trial % 7;
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-3.0, 3.0);
    double prev_lse = soft_value(v, SoftOperator::lse(betas[0]));
    double prev_boltz = soft_value(v, SoftOperator::boltzmann(betas[0]));
    for (size_t b = 1; b < std::size(betas); ++b) {
      const double lse = soft_value(v, SoftOperator::lse(betas[b]));
      const double boltz = soft_value(v, SoftOperator::boltzmann(betas[b]));
      CHECK(lse <= prev_lse + 1e-12);      // nonincreasing toward the max
      CHECK(boltz >= prev_boltz - 1e-12);  // nondecreasing toward the max
      prev_lse = lse;
      prev_boltz = boltz;
    }
  }
}

TEST_CASE("sharp limit approaches the hard maximum without overflow") {
  Rng rng(24);
  SUBCASE("sharp limit at moderate magnitudes") {
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = 1 + trial % 12;
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-10.0, 10.0);
      const double m = test_oracle::brute_max(v);
      CHECK(std::abs(soft_value(v, SoftOperator::lse(1e6)) - m) <= 1e-4);
      CHECK(std::abs(soft_value(v, SoftOperator::boltzmann(1e6)) - m) <= 1e-4);
    }
  }
  SUBCASE("no overflow or NaN at large magnitudes") {
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = 1 + trial % 12;
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-100.0, 100.0);
      for (const SoftOperator& op :
           {SoftOperator::lse(1e6), SoftOperator::boltzmann(1e6)}) {
        const double val = soft_value(v, op);
        CHECK(std::isfinite(val));
      }
    }
  }
}

TEST_CASE("soft_backup stacks per-state values") {
  Rng rng(25);
  SUBCASE("hard-max backup equals the greedy selector product") {
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd v(12);
      for (int i = 0; i < 12; ++i) v[i] = rng.uniform(-5.0, 5.0);
      const QTable q(3, 4, v);
      const Eigen::VectorXd backup = soft_backup(q, SoftOperator::hard_max());
      const Eigen::VectorXd greedy = greedy_selector(q) * q.values();
      CHECK((backup - greedy).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
  SUBCASE("zero table") {
    const QTable q(3, 2);
    const Eigen::VectorXd lse = soft_backup(q, SoftOperator::lse(1.0));
    const Eigen::VectorXd boltz = soft_backup(q, SoftOperator::boltzmann(1.0));
    for (int s = 0; s < 3; ++s) {
      CHECK(lse[s] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
      CHECK(boltz[s] == 0.0);
    }
  }
}
