#pragma once

// State-feedback synthesis for impulsive systems with u_c = K_c(tau) x during
// flows and u_d = K_d x^- at impulses. The unknowns are S(tau), U_c(tau) and
// U_d; gains follow from K_c = U_c S^{-1}, K_d = U_d S(T)^{-1}.
//
// The flow condition is He[A S + B_c U_c] - S' <= 0 and the jump condition
// J_cl S(T) J_cl' < S(0). With R = S^{-1} these become the forward-time
// conditions R' + He[R A_cl] <= 0, J_cl' R(0) J_cl < R(T), so the gain is
// applied with tau running forward from the last impulse.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dwell/analysis.hpp"
#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/lmi.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sos.hpp"
#include "dwell/system.hpp"

namespace dwell {

enum class SynthesisKind { periodic, min_dwell };

inline const char* to_string(SynthesisKind k) {
  return k == SynthesisKind::periodic ? "synth-periodic" : "synth-min-dwell";
}

struct Controller {
  SynthesisKind kind = SynthesisKind::periodic;
  bool feasible = false;
  double margin = -std::numeric_limits<double>::infinity();
  std::string solver_status;
  PiecewisePolyMat S;   // n x n, symmetric
  PiecewisePolyMat Uc;  // m_c x n; empty when there is no B_c
  Mat Ud;               // m_d x n; zero rows when there is no B_d
  Mat Kd;
  double t_bar = 0.0;
  bool clamp = true;
  Eigen::Index n = 0;
  Eigen::Index m_c = 0;
  std::vector<ConditionResidual> residuals;  // closed-loop audit
  int sdp_vars = 0;
  double seconds = 0.0;

  bool residuals_pass() const {
    for (const auto& r : residuals) {
      if (!r.pass) return false;
    }
    return !residuals.empty();
  }
};

/// Solves S(sigma) X = rhs with a PD check; throws ExtractionError on failure.
inline Mat solve_spd_right(const Mat& s, const Mat& lhs, double where) {
  Eigen::LLT<Mat> llt(sym_part(s));
  if (llt.info() != Eigen::Success) throw ExtractionError("S is not positive definite", where);
  const Vec d = Mat(llt.matrixL()).diagonal();
  if (d.minCoeff() <= 1e-8 * d.maxCoeff()) throw ExtractionError("S is nearly singular", where);
  // lhs * S^{-1} = (S^{-1} lhs')'
  return llt.solve(lhs.transpose()).transpose();
}

/// K_c(tau) = U_c(sigma) S(sigma)^{-1} with sigma = min(tau, T).
inline Mat extract_gain(const Controller& c, double tau) {
  if (!std::isfinite(tau) || tau < 0.0) throw InputError("extract_gain: tau must be >= 0");
  if (c.m_c == 0) return Mat::Zero(0, c.n);
  const double sigma = std::min(tau, c.t_bar);
  return solve_spd_right(c.S.eval(sigma), c.Uc.eval(sigma), sigma);
}

namespace detail {

/// Closed-loop check with R = S^{-1}: flow, jump and (minimum dwell) the
/// clamped-gain condition at T, all evaluated on the extracted gains.
inline std::vector<ConditionResidual> audit_closed_loop(const Controller& c,
                                                        const std::vector<ImpulsiveSystem>& vertices,
                                                        int grid, double tol) {
  std::vector<ConditionResidual> out;
  const double len = c.t_bar;
  auto inv = [&](double tau) { return Mat(sym_part(c.S.eval(tau)).inverse()); };
  double scale = 1.0;
  for (int k = 0; k < grid; ++k) {
    const double tau = len * k / (grid - 1);
    scale = std::max(scale, inv(tau).norm());
  }
  const double rel_tol = tol * scale * scale;
  auto add = [&](const std::string& name, const PointwiseReport& r) {
    out.push_back({name, r.min_residual, r.argmin, r.pass});
  };
  auto suffix = [&](std::size_t i) {
    return vertices.size() > 1 ? "[" + std::to_string(i) + "]" : std::string();
  };
  add("positivity", verify_pointwise([&](double tau) { return c.S.eval(tau); }, 0.0, len, grid, tol));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& v = vertices[i];
    const Mat jcl = v.has_bd() ? Mat(v.J + v.Bd * c.Kd) : v.J;
    auto acl = [&](double tau) -> Mat {
      return v.has_bc() ? Mat(v.A + v.Bc * extract_gain(c, tau)) : v.A;
    };
    add("cl-flow" + suffix(i), verify_pointwise(
                                   [&](double tau) -> Mat {
                                     const Mat st = inv(tau);
                                     const Mat dst = -st * c.S.eval_derivative(tau) * st;
                                     const Mat he = st * acl(tau);
                                     return -(he + he.transpose() + dst);
                                   },
                                   0.0, len, grid, rel_tol));
    const Mat s0 = inv(0.0), st = inv(len);
    const Mat jump = st - jcl.transpose() * s0 * jcl;
    add("cl-jump" + suffix(i), verify_pointwise([&](double) { return jump; }, len, len, 2, rel_tol));
    if (c.kind == SynthesisKind::min_dwell) {
      const Mat he = st * acl(len);
      const Mat m = -(he + he.transpose());
      add("cl-extra" + suffix(i), verify_pointwise([&](double) { return m; }, len, len, 2, rel_tol));
    }
  }
  return out;
}

inline Controller synthesize(SynthesisKind kind, const std::vector<ImpulsiveSystem>& vertices, double t_bar,
                             const Encoder& enc, const Settings& st) {
  if (vertices.empty()) throw InputError("synthesis: no system");
  if (!(t_bar > 0.0) || !std::isfinite(t_bar)) throw InputError("synthesis: need T > 0");
  for (const auto& v : vertices) v.validate();
  const ImpulsiveSystem& v0 = vertices.front();
  const Eigen::Index n = v0.n();
  const Eigen::Index mc = v0.has_bc() ? v0.Bc.cols() : 0;
  const Eigen::Index md = v0.has_bd() ? v0.Bd.cols() : 0;
  for (const auto& v : vertices) {
    if (v.n() != n || (v.has_bc() ? v.Bc.cols() : 0) != mc || (v.has_bd() ? v.Bd.cols() : 0) != md) {
      throw DimensionError("synthesis: vertices differ in shape");
    }
  }

  const bool periodic = kind == SynthesisKind::periodic;

  lmi::Program prog(-1.0, st.synthesis_margin_cap);
  const lmi::PolyUnknown s = make_unknown(prog, n, n, true, enc, t_bar);
  std::optional<lmi::PolyUnknown> uc;
  if (mc > 0) uc = make_unknown(prog, mc, n, false, enc, t_bar);
  lmi::AffineMat ud(md, n);
  if (md > 0) ud = prog.add_matrix(md, n);

  const lmi::AffineMat s_anchor = s.at(t_bar);
  const lmi::AffineMat s_start = s.at(0.0);
  prog.require_psd(s_anchor - lmi::Program::margin(n), "anchor");
  require_trace_cap(prog, s_anchor, static_cast<double>(n));

  // Conditioning for gain extraction: S(tau) >= 1e-4 (trace S_anchor / n) I.
  {
    ParamLmi cond;
    cond.name = "conditioning";
    cond.lo = 0.0;
    cond.hi = t_bar;
    cond.strict = false;
    cond.breaks = s.interior_breaks(0.0, t_bar);
    lmi::AffineMat tr(1, 1);
    for (Eigen::Index i = 0; i < n; ++i) tr += s_anchor.block(i, i, 1, 1);
    // tr * I as an n x n expression
    lmi::AffineMat tr_eye(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Mat e = Mat::Zero(n, 1);
      e(i) = 1.0;
      tr_eye += e * tr * Mat(e.transpose());
    }
    const lmi::AffineMat lower = tr_eye * (1e-4 / static_cast<double>(n));
    cond.build = [&s, lower](double lo, double hi) { return s.on(lo, hi) - lower; };
    encode(prog, cond, enc);
  }

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& v = vertices[i];
    const std::string sfx = "[" + std::to_string(i) + "]";
    auto closed = [&, a = v.A, bc = v.Bc](double lo, double hi) {
      lmi::AffinePoly m = a * s.on(lo, hi);
      if (uc) m += bc * uc->on(lo, hi);
      return m;
    };
    ParamLmi flow;
    flow.name = "flow" + sfx;
    flow.lo = 0.0;
    flow.hi = t_bar;
    flow.strict = true;
    flow.breaks = s.interior_breaks(0.0, t_bar);
    flow.build = [&s, closed](double lo, double hi) {
      return s.derivative_on(lo, hi) - closed(lo, hi).he();
    };
    encode(prog, flow, enc);

    // [[S(0) - eps I, -(J S(T) + Bd Ud)], [*, S(T)]] >= 0
    lmi::AffineMat off = v.J * s_anchor;
    if (md > 0) off += v.Bd * ud;
    const lmi::AffineMat jump = lmi::AffineMat::blocks(
        {{s_start - lmi::Program::margin(n) * t_bar, -off}, {-off.transpose(), s_anchor}});
    prog.require_psd(jump, "jump" + sfx);

    if (!periodic) {
      lmi::AffineMat m = v.A * s_anchor;
      if (uc) m += v.Bc * uc->at(t_bar);
      prog.require_psd(-m.he() - lmi::Program::margin(n), "extra" + sfx);
    }
  }

  const SolveOutcome sol = solve_program(prog, st);
  Controller c;
  c.kind = kind;
  c.t_bar = t_bar;
  c.clamp = !periodic;
  c.n = n;
  c.m_c = mc;
  c.margin = sol.margin;
  c.solver_status = sol.status;
  c.sdp_vars = sol.nvars;
  c.seconds = sol.seconds;
  if (sol.margin < st.margin_threshold || sol.x.size() == 0) return c;

  c.S = s.value(sol.x);
  if (uc) c.Uc = uc->value(sol.x);
  c.Ud = md > 0 ? ud.value(sol.x) : Mat::Zero(0, n);
  c.Kd = md > 0 ? solve_spd_right(c.S.eval(t_bar), c.Ud, t_bar) : Mat::Zero(0, n);
  c.residuals = audit_closed_loop(c, vertices, st.verify_grid, st.verify_tol);
  c.feasible = c.residuals_pass();
  return c;
}

}  // namespace detail

inline Controller stabilize_periodic(const ImpulsiveSystem& sys, double t_bar, const Encoder& enc,
                                     const Settings& st = {}) {
  return detail::synthesize(SynthesisKind::periodic, {sys}, t_bar, enc, st);
}

inline Controller stabilize_min_dwell(const ImpulsiveSystem& sys, double t_bar, const Encoder& enc,
                                      const Settings& st = {}) {
  return detail::synthesize(SynthesisKind::min_dwell, {sys}, t_bar, enc, st);
}

/// Common (S, U_c, U_d) across polytope vertices.
inline Controller stabilize_robust(const PolytopicSystem& psys, SynthesisKind kind, double t_bar,
                                   const Encoder& enc, const Settings& st = {}) {
  psys.validate();
  return detail::synthesize(kind, psys.vertices, t_bar, enc, st);
}

/// Closed-loop transition matrix over [0, t] using the (clamped) gain.
inline Mat closed_loop_transition(const ImpulsiveSystem& sys, const Controller& c, double t, int steps) {
  if (!sys.has_bc() || c.m_c == 0) return expm(sys.A, t);
  return transition_matrix(sys.A, sys.Bc, [&](double tau) { return extract_gain(c, tau); }, t, steps);
}

inline Mat closed_loop_jump(const ImpulsiveSystem& sys, const Controller& c) {
  return sys.has_bd() && c.Kd.rows() > 0 ? Mat(sys.J + sys.Bd * c.Kd) : sys.J;
}

}  // namespace dwell
