#pragma once

// Sampled-data state feedback u(t) = K1 x(t_k) + K2 u(t_{k-1}) written as an
// impulsive system on (x, z) with z the held input.

#include <cmath>
#include <string>
#include <vector>

#include "dwell/analysis.hpp"
#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/lmi.hpp"
#include "dwell/sos.hpp"
#include "dwell/synthesis.hpp"
#include "dwell/system.hpp"

namespace dwell {

struct SampledDataSystem {
  Mat A;
  Mat B;
  Mat K1;  // optional, m x n
  Mat K2;  // optional, m x m

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  bool has_gains() const { return K1.size() > 0; }

  void validate() const {
    detail::require_square(A, "SampledDataSystem.A");
    detail::require_finite(A, "SampledDataSystem.A");
    detail::require_finite(B, "SampledDataSystem.B");
    if (A.rows() == 0) throw DimensionError("SampledDataSystem: empty state");
    if (B.rows() != A.rows() || B.cols() == 0) throw DimensionError("SampledDataSystem: B shape");
    if (has_gains()) {
      detail::require_finite(K1, "SampledDataSystem.K1");
      if (K1.rows() != m() || K1.cols() != n()) throw DimensionError("SampledDataSystem: K1 shape");
      if (K2.size() > 0) {
        detail::require_finite(K2, "SampledDataSystem.K2");
        if (K2.rows() != m() || K2.cols() != m()) throw DimensionError("SampledDataSystem: K2 shape");
      }
    }
  }
};

struct PolytopicSampledData {
  std::vector<Mat> A;
  Mat B;

  void validate() const {
    if (A.empty()) throw InputError("PolytopicSampledData: no vertices");
    for (const auto& a : A) SampledDataSystem{a, B, {}, {}}.validate();
    for (const auto& a : A) {
      if (a.rows() != A.front().rows()) throw DimensionError("PolytopicSampledData: vertex sizes differ");
    }
  }
};

/// Abar = [[A, B], [0, 0]], J0 = diag(I, 0), B0 = [0; I], so Jbar = J0 + B0 [K1 K2].
struct LiftedParts {
  Mat Abar;
  Mat J0;
  Mat B0;
};

inline LiftedParts lift_parts(const Mat& a, const Mat& b) {
  const Eigen::Index n = a.rows(), m = b.cols();
  LiftedParts p;
  p.Abar = Mat::Zero(n + m, n + m);
  p.Abar.topLeftCorner(n, n) = a;
  p.Abar.topRightCorner(n, m) = b;
  p.J0 = Mat::Zero(n + m, n + m);
  p.J0.topLeftCorner(n, n).setIdentity();
  p.B0 = Mat::Zero(n + m, m);
  p.B0.bottomRows(m).setIdentity();
  return p;
}

inline Mat gain_matrix(const Mat& k1, const Mat& k2) {
  const Eigen::Index m = k1.rows(), n = k1.cols();
  Mat k(m, n + m);
  k.leftCols(n) = k1;
  k.rightCols(m) = k2.size() > 0 ? k2 : Mat::Zero(m, m);
  return k;
}

/// Lifted impulsive system for fixed gains.
inline ImpulsiveSystem lift(const SampledDataSystem& sd) {
  sd.validate();
  if (!sd.has_gains()) throw InputError("lift: gains are required (use lift_parts otherwise)");
  const LiftedParts p = lift_parts(sd.A, sd.B);
  ImpulsiveSystem sys;
  sys.A = p.Abar;
  sys.J = p.J0 + p.B0 * gain_matrix(sd.K1, sd.K2);
  return sys;
}

/// Ranged certificate for the lifted fixed-gain loop.
inline Certificate analyze_fixed(const SampledDataSystem& sd, double t_min, double t_max, const Encoder& enc,
                                 const Settings& st = {}) {
  return ranged_certificate(lift(sd), t_min, t_max, enc, st);
}

/// Largest certified T_max for a fixed T_min.
inline RangeResult search_fixed(const SampledDataSystem& sd, const Encoder& enc, double t_min, double seed,
                                const Settings& st = {}) {
  return search_upper(PolytopicSystem{{lift(sd)}}, enc, t_min, seed, st);
}

struct SampledGain {
  bool feasible = false;
  double margin = -std::numeric_limits<double>::infinity();
  std::string solver_status;
  Mat K1;
  Mat K2;
  PiecewisePolyMat S;
  double worst_rho = std::numeric_limits<double>::infinity();  // over the verification grid
  double worst_theta = 0.0;
  bool verified = false;
  bool bibo_warning = false;  // rho(K2) >= 1: the control law is not BIBO stable
  int sdp_vars = 0;
  double seconds = 0.0;
};

/// max over vertices and a uniform grid of rho(e^{Abar theta} (J0 + B0 K)).
inline std::pair<double, double> sampled_worst_rho(const PolytopicSampledData& p, const Mat& k,
                                                   double t_min, double t_max, int grid = 100) {
  double worst = 0.0, where = t_min;
  for (const auto& a : p.A) {
    const LiftedParts lp = lift_parts(a, p.B);
    const Mat jcl = lp.J0 + lp.B0 * k;
    for (int i = 0; i < grid; ++i) {
      const double th = grid == 1 ? t_min : t_min + (t_max - t_min) * i / (grid - 1);
      const double r = spectral_radius(expm(lp.Abar, th) * jcl);
      if (r > worst) {
        worst = r;
        where = th;
      }
    }
  }
  return {worst, where};
}

/// Gains K = Y S(0)^{-1} robust to every inter-sampling time in
/// [t_min, t_max] and every vertex. With k2_zero the returned K2 is exactly 0.
inline SampledGain synthesize(const PolytopicSampledData& psd, double t_min, double t_max, const Encoder& enc,
                              bool k2_zero, const Settings& st = {}) {
  psd.validate();
  if (!(t_min > 0.0) || !(t_min <= t_max) || !std::isfinite(t_max)) {
    throw InputError("synthesize: need 0 < T_min <= T_max < inf");
  }
  const Eigen::Index n = psd.A.front().rows(), m = psd.B.cols(), nn = n + m;

  lmi::Program prog(-1.0, st.synthesis_margin_cap);
  const lmi::PolyUnknown s = make_unknown(prog, nn, nn, true, enc, t_max);
  const lmi::AffineMat s0 = s.at(0.0);
  lmi::AffineMat y(m, nn);
  if (k2_zero) {
    y = lmi::AffineMat::blocks({{prog.add_matrix(m, n), lmi::AffineMat(m, m)}});
    prog.require_zero(s0.block(0, n, n, m), false);
  } else {
    y = prog.add_matrix(m, nn);
  }
  prog.require_psd(s0 - lmi::Program::margin(nn), "anchor");
  require_trace_cap(prog, s0, static_cast<double>(nn));

  const LiftedParts base = lift_parts(psd.A.front(), psd.B);
  for (std::size_t i = 0; i < psd.A.size(); ++i) {
    const Mat abar = lift_parts(psd.A[i], psd.B).Abar;
    ParamLmi flow;
    flow.name = "flow[" + std::to_string(i) + "]";
    flow.lo = 0.0;
    flow.hi = t_max;
    flow.strict = true;
    flow.breaks = s.interior_breaks(0.0, t_max);
    flow.build = [&s, abar](double lo, double hi) {
      return -((abar * s.on(lo, hi)).he() + s.derivative_on(lo, hi));
    };
    encode(prog, flow, enc);
  }

  // [[S(theta) - eps I, -(J0 S(0) + B0 Y)], [*, S(0)]] >= 0 for theta in [T_min, T_max]
  const lmi::AffineMat off = base.J0 * s0 + base.B0 * y;
  ParamLmi jump;
  jump.name = "jump";
  jump.lo = t_min;
  jump.hi = t_max;
  jump.strict = false;
  jump.breaks = s.interior_breaks(t_min, t_max);
  jump.build = [&s, off, s0, nn](double lo, double hi) {
    const lmi::AffinePoly top = s.on(lo, hi) - scaled_margin(nn, lo, hi);
    return lmi::AffinePoly::blocks({{top, lmi::AffinePoly(-off)},
                                    {lmi::AffinePoly(-off.transpose()), lmi::AffinePoly(s0)}});
  };
  encode(prog, jump, enc);

  const SolveOutcome sol = solve_program(prog, st);
  SampledGain g;
  g.margin = sol.margin;
  g.solver_status = sol.status;
  g.sdp_vars = sol.nvars;
  g.seconds = sol.seconds;
  if (sol.margin < st.margin_threshold || sol.x.size() == 0) return g;

  g.S = s.value(sol.x);
  const Mat s0v = g.S.eval(0.0);
  const Mat yv = y.value(sol.x);
  if (k2_zero) {
    // S(0) is block diagonal here, so K = [Y1 S11^{-1}, 0].
    g.K1 = solve_spd_right(s0v.topLeftCorner(n, n), yv.leftCols(n), 0.0);
    g.K2 = Mat::Zero(m, m);
  } else {
    const Mat k = solve_spd_right(s0v, yv, 0.0);
    g.K1 = k.leftCols(n);
    g.K2 = k.rightCols(m);
    g.bibo_warning = spectral_radius(g.K2) >= 1.0;
  }
  const auto [worst, where] = sampled_worst_rho(psd, gain_matrix(g.K1, g.K2), t_min, t_max, 100);
  g.worst_rho = worst;
  g.worst_theta = where;
  g.verified = worst < 1.0;
  g.feasible = g.verified;
  return g;
}

inline SampledGain synthesize(const SampledDataSystem& sd, double t_min, double t_max, const Encoder& enc,
                              bool k2_zero, const Settings& st = {}) {
  return synthesize(PolytopicSampledData{{sd.A}, sd.B}, t_min, t_max, enc, k2_zero, st);
}

}  // namespace dwell
