#include <gtest/gtest.h>

#include <random>

#include "dwell/oracle.hpp"
#include "dwell/sampled_data.hpp"
#include "fixtures.hpp"

using namespace dwell;

TEST(Lift, BlockStructure) {
  const ImpulsiveSystem s = lift(fx::damped_cart());
  ASSERT_EQ(s.n(), 3);
  EXPECT_EQ(s.A, (Mat(3, 3) << 0, 1, 0, 0, -0.1, 0.1, 0, 0, 0).finished());
  EXPECT_EQ(s.J, (Mat(3, 3) << 1, 0, 0, 0, 1, 0, -3.75, -11.5, 0).finished());
}

TEST(Lift, RequiresGains) {
  SampledDataSystem sd = fx::damped_cart();
  sd.K1 = Mat();
  EXPECT_THROW(lift(sd), InputError);
  sd.K1 = Mat::Zero(2, 2);
  EXPECT_THROW(lift(sd), DimensionError);
}

TEST(Lift, TrajectoriesMatchTheHeldInputLoop) {
  const SampledDataSystem sd{fx::m2(0, 1, -2, 0.1), fx::col(0, 1), fx::row(-1.0, -0.8), Mat::Constant(1, 1, 0.3)};
  const DwellSequence seq = DwellSequence::uniform(0.05, 0.6, 25, 5);
  const Vec x0 = (Vec(2) << 1.0, -0.4).finished();
  const Vec u0 = Vec::Constant(1, 0.7);
  const Trajectory direct = simulate_sampled(sd, seq, x0, u0, 1e-3);
  const Trajectory lifted = simulate(lift(sd), seq, (Vec(3) << x0, u0).finished(), 1e-3);
  ASSERT_EQ(direct.x.size(), lifted.x.size());
  for (std::size_t k = 0; k < direct.x.size(); ++k) {
    EXPECT_LT((direct.x[k] - lifted.x[k].head(2)).norm(), 1e-10) << "sample " << k;
  }
}

TEST(FixedGainAnalysis, PeriodicRecovery) {
  const auto sd = fx::damped_cart();
  for (double t : {0.5, 1.0, 2.2}) {
    const bool ranged = analyze_fixed(sd, t, t, Encoder::sos(4)).feasible;
    const bool periodic = periodic_certificate(lift(sd), t, Encoder::sos(4)).feasible;
    EXPECT_EQ(ranged, periodic) << "T " << t;
    EXPECT_EQ(ranged, periodic_exact(lift(sd), t)) << "T " << t;
  }
}

TEST(FixedGainAnalysis, UpperBoundInsideExactInterval) {
  const auto sd = fx::damped_cart();
  const RangeResult r = search_fixed(sd, Encoder::sos(4), 0.001, 1.0);
  EXPECT_NEAR(r.t_max, 1.7279, 5e-3);
  EXPECT_TRUE(r.certificate.feasible);
  const auto iv = spectral_sweep(lift(sd), 0.001, 3.0, 400);
  ASSERT_FALSE(iv.empty());
  EXPECT_LE(iv.front().lo, 0.001);
  EXPECT_GE(iv.front().hi, r.t_max);
}

TEST(FixedGainAnalysis, OscillatorRange) {
  const auto sd = fx::oscillator();
  // stable for theta in about [0.2007, 2.0207] and again beyond 2.47
  const auto iv = spectral_sweep(lift(sd), 0.01, 3.0, 400);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_NEAR(iv[0].lo, 0.2007, 1e-3);
  const RangeResult r = search_fixed(sd, Encoder::sos(4), 0.4, 1.0);
  EXPECT_GE(r.t_min, iv[0].lo);
  EXPECT_LE(r.t_max, iv[0].hi);
}

TEST(SampledSynthesis, FreeK2) {
  const auto sd = fx::damped_cart();
  for (double tmax : {10.0, 50.0}) {
    const SampledGain g = synthesize(sd, 0.001, tmax, Encoder::sos(2), false);
    ASSERT_TRUE(g.feasible) << "T_max " << tmax;
    EXPECT_TRUE(g.verified);
    EXPECT_LT(g.worst_rho, 1.0);
    EXPECT_FALSE(g.bibo_warning);
    EXPECT_EQ(g.K1.rows(), 1);
    EXPECT_EQ(g.K2.rows(), 1);

    // independent check at random sampling times
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> theta(0.001, tmax);
    const ImpulsiveSystem loop = lift({sd.A, sd.B, g.K1, g.K2});
    for (int k = 0; k < 100; ++k) EXPECT_LT(spectral_radius(expm(loop.A, theta(rng)) * loop.J), 1.0);
  }
}

TEST(SampledSynthesis, ZeroK2IsExact) {
  const auto sd = fx::damped_cart();
  const SampledGain a = synthesize(sd, 0.001, 10.0, Encoder::sos(3), true);
  const SampledGain b = synthesize(sd, 0.001, 50.0, Encoder::sos(4), true);
  for (const auto* g : {&a, &b}) {
    ASSERT_TRUE(g->feasible);
    EXPECT_TRUE(g->verified);
    ASSERT_EQ(g->K2.rows(), 1);
    EXPECT_EQ(g->K2(0, 0), 0.0);
    EXPECT_FALSE(std::signbit(g->K2(0, 0)));
    const Mat s0 = g->S.eval(0.0);
    EXPECT_LT(s0.topRightCorner(2, 1).norm(), 1e-9);
  }
}

TEST(SampledSynthesis, RobustPolytope) {
  for (double delta : {5.0, 20.0}) {
    for (double tmax : {10.0, 20.0}) {
      const auto p = fx::uncertain_cart(delta);
      const SampledGain g = synthesize(p, 0.001, tmax, Encoder::sos(2), false);
      ASSERT_TRUE(g.feasible) << "delta " << delta << " T_max " << tmax;
      const PolytopicSystem loop = fx::lifted_loop(p, gain_matrix(g.K1, g.K2));
      EXPECT_FALSE(falsify_robust(loop, DwellSpec::ranged(0.001, tmax), 1000, 2024).has_value());
    }
  }
}

TEST(SampledSynthesis, WorstRhoGrid) {
  const auto p = fx::uncertain_cart(5.0);
  // zero gain: marginally stable double integrator, rho = 1 at every theta
  const auto [rho, where] = sampled_worst_rho(p, Mat::Zero(1, 3), 0.1, 1.0);
  EXPECT_NEAR(rho, 1.0, 1e-12);
  EXPECT_GE(where, 0.1);
}

TEST(SampledSynthesis, RejectsBadInput) {
  const auto sd = fx::damped_cart();
  EXPECT_THROW(synthesize(sd, 0.0, 1.0, Encoder::sos(2), false), InputError);
  EXPECT_THROW(synthesize(sd, 2.0, 1.0, Encoder::sos(2), false), InputError);
  PolytopicSampledData p = fx::uncertain_cart(2.0);
  p.A.push_back(Mat::Zero(3, 3));
  EXPECT_THROW(synthesize(p, 0.1, 1.0, Encoder::sos(2), false), DimensionError);
}
