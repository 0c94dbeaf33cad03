#include <gtest/gtest.h>

#include "dwell/analysis.hpp"
#include "dwell/oracle.hpp"
#include "fixtures.hpp"

using namespace dwell;

namespace {

PiecewisePolyMat reflect(const PiecewisePolyMat& w) {
  // single polynomial piece on [0, T]: tau -> T - tau
  EXPECT_EQ(w.num_pieces(), 1u);
  const double t = w.hi();
  return PiecewisePolyMat({0.0, t}, {w.pieces().front().reparametrize(-1.0, t)});
}

bool all_pass(const std::vector<ConditionResidual>& rs) {
  for (const auto& r : rs) {
    if (!r.pass) return false;
  }
  return !rs.empty();
}

// Scalar-like system with a maximum dwell-time of ln 4.
ImpulsiveSystem growing_flow() {
  return {Mat::Identity(2, 2) * 0.5, Mat::Identity(2, 2) * 0.5, {}, {}};
}

}  // namespace

// ---- exact tests ----

TEST(PeriodicExact, InsideAndOutsideInterval) {
  const auto s = fx::unstable_flow();
  EXPECT_TRUE(periodic_exact(s, 0.3));
  EXPECT_FALSE(periodic_exact(s, 0.1));
  EXPECT_FALSE(periodic_exact(s, 0.7));
  EXPECT_THROW(periodic_exact(s, 0.0), InputError);
}

TEST(ExactMinDwell, ExpandingJump) {
  EXPECT_NEAR(exact_min_dwell(fx::expanding_jump()), 1.1406, 1e-3);
}

TEST(VariableCount, Formulas) {
  EXPECT_EQ(variable_count(2, 6, 0).first, 21);
  EXPECT_EQ(variable_count(2, 0, 3).second, 87);
  for (long n = 1; n <= 5; ++n) EXPECT_EQ(variable_count(n, 0, 0).first, n * (n + 1) / 2);
  EXPECT_EQ(variable_count(2, 1, 0, 1).first, 6 + 4);
  EXPECT_THROW(variable_count(-1, 0, 0), InputError);
}

// ---- certificates ----

TEST(PeriodicCertificate, FeasibleInsideInterval) {
  const Certificate c = periodic_certificate(fx::unstable_flow(), 0.3, Encoder::sos(6));
  EXPECT_TRUE(c.feasible);
  EXPECT_GE(c.margin, 1e-6);
  EXPECT_EQ(c.theorem, "periodic-d");
  EXPECT_EQ(c.witness_vars, 21);
}

TEST(PeriodicCertificate, InfeasibleOutsideIntervalAtEveryDegree) {
  for (int d : {2, 4, 6}) {
    EXPECT_FALSE(periodic_certificate(fx::unstable_flow(), 0.6, Encoder::sos(d)).feasible) << "degree " << d;
    EXPECT_FALSE(periodic_certificate(fx::unstable_flow(), 0.6, Encoder::sos(d), Form::e).feasible);
  }
}

TEST(PeriodicCertificate, DiscretizationEncoder) {
  const Certificate c = periodic_certificate(fx::unstable_flow(), 0.3, Encoder::discretization(10));
  EXPECT_TRUE(c.feasible);
  EXPECT_EQ(c.witness.num_pieces(), 10u);
  EXPECT_FALSE(periodic_certificate(fx::unstable_flow(), 0.6, Encoder::discretization(10)).feasible);
}

TEST(RangedCertificate, LowDegreeInterval) {
  EXPECT_TRUE(ranged_certificate(fx::unstable_flow(), 0.1834, 0.4998, Encoder::sos(2)).feasible);
  EXPECT_FALSE(ranged_certificate(fx::unstable_flow(), 0.1834, 0.55, Encoder::sos(2)).feasible);
}

TEST(RangedCertificate, HighDegreeNearExactInterval) {
  EXPECT_TRUE(ranged_certificate(fx::unstable_flow(), 0.1826, 0.5772, Encoder::sos(6)).feasible);
}

TEST(MinDwellCertificate, Threshold) {
  const auto s = fx::expanding_jump();
  EXPECT_TRUE(min_dwell_certificate(s, 1.15, Encoder::sos(6)).feasible);
  EXPECT_TRUE(min_dwell_certificate(s, 1.15, Encoder::sos(6), false, Form::e).feasible);
  EXPECT_FALSE(min_dwell_certificate(s, 1.0, Encoder::sos(6)).feasible);
}

TEST(MaxDwellCertificate, Threshold) {
  const auto s = growing_flow();
  EXPECT_TRUE(min_dwell_certificate(s, 1.0, Encoder::sos(2), true).feasible);
  EXPECT_FALSE(min_dwell_certificate(s, 1.5, Encoder::sos(2), true).feasible);
  const DwellBound b2 = search_dwell_bound(s, Encoder::sos(2), true);
  const DwellBound b6 = search_dwell_bound(s, Encoder::sos(6), true);
  EXPECT_LE(b2.value, b6.value + 2e-4);
  EXPECT_LE(b6.value, std::log(4.0) + 1e-9);
  EXPECT_NEAR(b6.value, std::log(4.0), 5e-3);
}

TEST(RobustCertificate, PerturbedPolytope) {
  const auto s = fx::unstable_flow();
  ImpulsiveSystem s2 = s;
  s2.A *= 1.01;
  const PolytopicSystem p{{s, s2}};
  const Certificate c = robust_certificate(p, DwellSpec::ranged(0.2, 0.5), Encoder::sos(4));
  EXPECT_TRUE(c.feasible);
  EXPECT_TRUE(verify_certificate(c, p.vertices).pass);
  EXPECT_EQ(c.residuals.size(), 1u + 2u * 2u);
}

// ---- properties ----

TEST(CertificateProperties, PositivityIsImplied) {
  const std::vector<Certificate> certs = {
      periodic_certificate(fx::unstable_flow(), 0.3, Encoder::sos(6)),
      ranged_certificate(fx::unstable_flow(), 0.2, 0.5, Encoder::sos(4)),
      min_dwell_certificate(fx::expanding_jump(), 1.2, Encoder::sos(6)),
      min_dwell_certificate(fx::expanding_jump(), 1.3, Encoder::discretization(28)),
  };
  for (const auto& c : certs) {
    ASSERT_TRUE(c.feasible) << c.theorem;
    const double hi = c.witness.hi();
    for (int k = 0; k <= 200; ++k) {
      const double tau = hi * k / 200.0;
      EXPECT_GT(min_eig_sym(c.witness.eval(tau)), 0.0) << c.theorem << " tau " << tau;
    }
  }
}

TEST(CertificateProperties, ReflectionMapsBetweenForms) {
  const auto s = fx::unstable_flow();
  const DwellSpec spec = DwellSpec::periodic(0.3);
  const Certificate d = periodic_certificate(s, 0.3, Encoder::sos(4), Form::d);
  const Certificate e = periodic_certificate(s, 0.3, Encoder::sos(4), Form::e);
  ASSERT_TRUE(d.feasible);
  ASSERT_TRUE(e.feasible);
  EXPECT_TRUE(all_pass(audit_conditions("periodic-e", {s}, spec, reflect(d.witness), 200, 1e-7)));
  EXPECT_TRUE(all_pass(audit_conditions("periodic-d", {s}, spec, reflect(e.witness), 200, 1e-7)));

  const auto m = fx::expanding_jump();
  const DwellSpec mspec = DwellSpec::minimum(1.2);
  const Certificate b = min_dwell_certificate(m, 1.2, Encoder::sos(4), false, Form::d);
  const Certificate c = min_dwell_certificate(m, 1.2, Encoder::sos(4), false, Form::e);
  ASSERT_TRUE(b.feasible);
  ASSERT_TRUE(c.feasible);
  EXPECT_TRUE(all_pass(audit_conditions("min-dwell-c", {m}, mspec, reflect(b.witness), 200, 1e-7)));
  EXPECT_TRUE(all_pass(audit_conditions("min-dwell-b", {m}, mspec, reflect(c.witness), 200, 1e-7)));
}

TEST(CertificateProperties, SubintervalsReuseTheWitness) {
  const auto s = fx::unstable_flow();
  const Certificate c = ranged_certificate(s, 0.2, 0.5, Encoder::sos(4));
  ASSERT_TRUE(c.feasible);
  for (double lo : {0.25, 0.3, 0.45, 0.5}) {
    Certificate sub = c;
    sub.spec = DwellSpec::ranged(lo, 0.5);
    EXPECT_TRUE(verify_certificate(sub, s).pass) << "T_min " << lo;
  }
  // periodic at the right end of the range
  Certificate end = c;
  end.spec = DwellSpec::periodic(0.5);
  EXPECT_TRUE(verify_certificate(end, s).pass);
}

TEST(CertificateProperties, SoundAgainstExactTest) {
  const auto s = fx::unstable_flow();
  const Certificate c = ranged_certificate(s, 0.19, 0.55, Encoder::sos(6));
  ASSERT_TRUE(c.feasible);
  for (int k = 0; k < 50; ++k) EXPECT_TRUE(periodic_exact(s, 0.19 + 0.36 * k / 49.0));
}

TEST(CertificateProperties, VerifyDetectsTampering) {
  const auto s = fx::unstable_flow();
  Certificate c = periodic_certificate(s, 0.3, Encoder::sos(4));
  ASSERT_TRUE(c.feasible);
  ASSERT_TRUE(verify_certificate(c, s).pass);
  c.spec = DwellSpec::periodic(0.3);
  std::vector<PolyMat> pieces{c.witness.pieces().front() * -1.0};
  c.witness = PiecewisePolyMat(c.witness.breaks(), pieces);
  EXPECT_FALSE(verify_certificate(c, s).pass);
  c.spec = DwellSpec::minimum(0.3);
  EXPECT_THROW(verify_certificate(c, s), InputError);
}

TEST(CertificateProperties, Deterministic) {
  const Certificate a = ranged_certificate(fx::unstable_flow(), 0.2, 0.5, Encoder::sos(4));
  const Certificate b = ranged_certificate(fx::unstable_flow(), 0.2, 0.5, Encoder::sos(4));
  EXPECT_EQ(a.margin, b.margin);
  for (int i = 0; i <= a.witness.pieces().front().degree(); ++i) {
    EXPECT_EQ(a.witness.pieces().front().coeff(i), b.witness.pieces().front().coeff(i));
  }
}

// ---- searches ----

TEST(RangeSearch, HigherDegreeContainsLowerDegree) {
  const auto s = fx::unstable_flow();
  const RangeResult r2 = search_range(s, Encoder::sos(2), 0.3);
  const RangeResult r4 = search_range(s, Encoder::sos(4), 0.3);
  const double tol = 2e-4;
  EXPECT_LE(r4.t_min, r2.t_min + tol);
  EXPECT_GE(r4.t_max, r2.t_max - tol);
  EXPECT_NEAR(r2.t_min, 0.1834, 2e-3);
  EXPECT_NEAR(r2.t_max, 0.4998, 2e-3);
  EXPECT_TRUE(r4.certificate.feasible);
  EXPECT_EQ(r4.certificate.spec.t_min, r4.t_min);
  EXPECT_EQ(r4.certificate.spec.t_max, r4.t_max);
}

TEST(RangeSearch, LinearSweepAgreesWithBisection) {
  const auto s = fx::unstable_flow();
  const RangeResult b = search_range(s, Encoder::sos(2), 0.3);
  const RangeResult w = search_range_sweep(s, Encoder::sos(2), 0.3, 0.01);
  EXPECT_NEAR(w.t_min, b.t_min, 0.01 + 1e-3);
  EXPECT_NEAR(w.t_max, b.t_max, 0.01 + 1e-3);
}

TEST(RangeSearch, RejectsUnstableSeed) {
  EXPECT_THROW(search_range(fx::unstable_flow(), Encoder::sos(2), 0.7), InputError);
}

TEST(DwellSearch, MinimumDwellDegreeSix) {
  const DwellBound b = search_dwell_bound(fx::expanding_jump(), Encoder::sos(6));
  EXPECT_NEAR(b.value, 1.1406, 2e-3);
  EXPECT_TRUE(b.certificate.feasible);
  EXPECT_GE(b.value, exact_min_dwell(fx::expanding_jump()) - 1e-3);
}

// ---- oracles ----

TEST(SpectralSweep, ExactStabilityInterval) {
  const auto iv = spectral_sweep(fx::unstable_flow(), 0.01, 2.0, 400);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].lo, 0.1824, 1e-4);
  EXPECT_NEAR(iv[0].hi, 0.5776, 1e-4);
}

TEST(SpectralSweep, ContainsCertifiedInterval) {
  const auto s = fx::unstable_flow();
  const auto iv = spectral_sweep(s, 0.01, 2.0, 400);
  ASSERT_EQ(iv.size(), 1u);
  const RangeResult r = search_range(s, Encoder::sos(4), 0.3);
  EXPECT_GE(r.t_min, iv[0].lo - 1e-5);
  EXPECT_LE(r.t_max, iv[0].hi + 1e-5);
}

TEST(MinDwellSweepCheck, ExpandingJump) {
  const auto s = fx::expanding_jump();
  EXPECT_TRUE(min_dwell_sweep_check(s, 1.15, 10.0).pass);
  const SweepCheck bad = min_dwell_sweep_check(s, 1.0, 10.0);
  EXPECT_FALSE(bad.pass);
  EXPECT_GE(bad.worst_rho, 1.0);
}

TEST(Simulate, ImpulseInstantsFollowMonodromy) {
  const auto s = fx::unstable_flow();
  const Vec x0 = (Vec(2) << 1.0, -0.5).finished();
  const Trajectory tr = simulate(s, DwellSequence::fixed(0.3, 12), x0, 1e-3);
  ASSERT_EQ(tr.pre_jump.size(), 13u);
  const Mat mono = expm(s.A, 0.3) * s.J;
  Vec expect = x0;
  for (std::size_t k = 0; k < tr.pre_jump.size(); ++k) {
    EXPECT_LT((tr.pre_jump[k] - expect).norm(), 1e-9 * std::max(1.0, expect.norm())) << "impulse " << k;
    expect = mono * expect;
  }
  EXPECT_FALSE(tr.diverged);
  EXPECT_LT(tr.x.back().norm(), x0.norm());
}

TEST(Simulate, UnstablePeriodGrows) {
  const auto s = fx::unstable_flow();
  const Vec x0 = Vec::Ones(2);
  const Trajectory tr = simulate(s, DwellSequence::fixed(0.7, 40), x0, 1e-3);
  EXPECT_GT(tr.x.back().norm(), 10.0 * x0.norm());
}

TEST(Simulate, CsvLayout) {
  const Trajectory tr = simulate(fx::unstable_flow(), DwellSequence::fixed(0.3, 2), Vec::Ones(2), 0.1);
  std::ostringstream os;
  tr.write_csv(os);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x1,x2,impulse");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), tr.t.size() + 1);
}

TEST(Simulate, RejectsBadInput) {
  const auto s = fx::unstable_flow();
  EXPECT_THROW(simulate(s, DwellSequence::fixed(0.3, 2), Vec::Ones(3), 0.01), DimensionError);
  EXPECT_THROW(simulate(s, DwellSequence::fixed(0.3, 2), Vec::Ones(2), 0.0), InputError);
  EXPECT_THROW(DwellSequence::uniform(0.5, 0.1, 3, 1), InputError);
}

TEST(DwellSequence, SeededDeterminism) {
  const DwellSequence a = DwellSequence::uniform(0.1, 0.5, 30, 42);
  const DwellSequence b = DwellSequence::uniform(0.1, 0.5, 30, 42);
  const DwellSequence c = DwellSequence::uniform(0.1, 0.5, 30, 43);
  EXPECT_EQ(a.T, b.T);
  EXPECT_NE(a.T, c.T);
  for (double t : a.T) {
    EXPECT_GE(t, 0.1);
    EXPECT_LE(t, 0.5);
  }
}

TEST(Falsify, FindsUnstableVertex) {
  ImpulsiveSystem bad = fx::unstable_flow();
  bad.A *= 3.0;  // rho(e^{0.3 A} J) is about 1.47
  ASSERT_FALSE(periodic_exact(bad, 0.3));
  const PolytopicSystem p{{fx::unstable_flow(), bad}};
  const auto ce = falsify_robust(p, DwellSpec::periodic(0.3), 10, 1);
  ASSERT_TRUE(ce.has_value());
  EXPECT_EQ(ce->trial, 1);
  EXPECT_GE(ce->growth, 1e3);
}

TEST(Falsify, StablePolytopeAndDeterminism) {
  ImpulsiveSystem s2 = fx::unstable_flow();
  s2.A *= 1.01;
  const PolytopicSystem p{{fx::unstable_flow(), s2}};
  EXPECT_FALSE(falsify_robust(p, DwellSpec::ranged(0.25, 0.45), 200, 9).has_value());
  ImpulsiveSystem bad = fx::unstable_flow();
  bad.A *= 1.6;
  const PolytopicSystem q{{fx::unstable_flow(), bad}};
  const auto a = falsify_robust(q, DwellSpec::ranged(0.25, 0.45), 200, 9);
  const auto b = falsify_robust(q, DwellSpec::ranged(0.25, 0.45), 200, 9);
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a) {
    EXPECT_EQ(a->trial, b->trial);
    EXPECT_EQ(a->growth, b->growth);
  }
}
