#pragma once

// Stability certificates for impulsive systems under periodic, ranged,
// minimum and maximum dwell-time, the exact periodic test, and bound searches.
//
// Margin formulation shared by every certificate: maximize t in [-1, 1]
// subject to
//   anchor(W) >= t I, trace(anchor(W)) <= n,
//   flow conditions with margin t on their Gram matrices,
//   jump conditions with epsilon = t * theta,
//   extra strict LMIs >= t I,
// and declare feasibility when t* >= margin_threshold.

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dwell/conditions.hpp"
#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/lmi.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sdp.hpp"
#include "dwell/sos.hpp"
#include "dwell/system.hpp"

namespace dwell {

/// True iff e^{A T} J is Schur.
inline bool periodic_exact(const ImpulsiveSystem& sys, double t_bar) {
  if (!(t_bar > 0.0) || !std::isfinite(t_bar)) throw InputError("periodic_exact: need T > 0");
  sys.validate();
  return spectral_radius(expm(sys.A, t_bar) * sys.J) < 1.0;
}

inline bool is_hurwitz(const Mat& a) {
  detail::require_square(a, "is_hurwitz");
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("is_hurwitz: eigenvalues did not converge");
  return es.eigenvalues().real().maxCoeff() < 0.0;
}

/// Counts of witness variables: (d_R + 1) n(n+1)/2 for a polynomial of
/// degree d_R, and n(n+1)/2 + (d_Z + 1) 3n(3n+1)/2 for the looped-functional
/// alternative. With m_c > 0 the (d_R + 1) m_c n coefficients of U_c are added.
inline std::pair<long, long> variable_count(long n, long d_r, long d_z, long m_c = 0) {
  if (n < 0 || d_r < 0 || d_z < 0 || m_c < 0) throw InputError("variable_count: negative count");
  const long current = (d_r + 1) * n * (n + 1) / 2 + (d_r + 1) * m_c * n;
  const long looped = n * (n + 1) / 2 + (d_z + 1) * 3 * n * (3 * n + 1) / 2;
  return {current, looped};
}

inline lmi::PolyUnknown make_unknown(lmi::Program& prog, Eigen::Index rows, Eigen::Index cols,
                                     bool symmetric, const Encoder& enc, double length) {
  return enc.kind == EncoderKind::sos
             ? lmi::PolyUnknown::polynomial(prog, rows, cols, symmetric, enc.degree, length)
             : lmi::PolyUnknown::piecewise_linear(prog, rows, cols, symmetric, enc.segments, length);
}

inline void encode(lmi::Program& prog, const ParamLmi& c, const Encoder& enc) {
  if (enc.kind == EncoderKind::sos) sos_encode(prog, c, enc.mult_degree);
  else discretize_encode(prog, c);
}

/// trace(m) <= cap as a 1x1 block.
inline void require_trace_cap(lmi::Program& prog, const lmi::AffineMat& m, double cap) {
  lmi::AffineMat tr(Mat::Constant(1, 1, cap));
  for (Eigen::Index i = 0; i < m.rows(); ++i) tr -= m.block(i, i, 1, 1);
  prog.require_psd(tr, "trace-cap");
}

/// t * theta * I on [a, b] written in s in [0, 1].
inline lmi::AffinePoly scaled_margin(Eigen::Index n, double a, double b) {
  return lmi::AffinePoly(std::vector<lmi::AffineMat>{lmi::Program::margin(n) * a,
                                                     lmi::Program::margin(n) * (b - a)});
}

struct SolveOutcome {
  double margin = -std::numeric_limits<double>::infinity();
  Vec x;
  std::string status;
  int nvars = 0;
  double seconds = 0.0;
};

inline SolveOutcome solve_program(const lmi::Program& prog, const Settings& st) {
  SolveOutcome out;
  out.nvars = prog.nvars();
  const auto t0 = std::chrono::steady_clock::now();
  if (prog.trivially_infeasible()) {
    out.status = "infeasible";
  } else {
    const sdp::MarginResult r = sdp::max_margin(prog.problem(), lmi::Program::margin_var(), st.sdp);
    out.margin = r.t_star;
    out.x = r.x;
    out.status = sdp::to_string(r.solution.status);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace detail {

/// Builds and solves the program for any analysis tag over a list of vertices
/// sharing one witness.
inline Certificate certify(const std::string& theorem, const std::vector<ImpulsiveSystem>& vertices,
                           const DwellSpec& spec, const Encoder& enc, const Settings& st) {
  if (vertices.empty()) throw InputError("certificate: no system");
  for (const auto& v : vertices) v.validate();
  const Eigen::Index n = vertices.front().n();
  for (const auto& v : vertices) {
    if (v.n() != n) throw DimensionError("certificate: vertex sizes differ");
  }
  const ConditionShape shape = shape_of(theorem);
  const double len = shape.ranged ? spec.t_max : spec.bar();
  const double anchor_at = shape.reversed ? len : 0.0;
  const double other_end = shape.reversed ? 0.0 : len;

  lmi::Program prog;
  const lmi::PolyUnknown w = make_unknown(prog, n, n, true, enc, len);
  const lmi::AffineMat w_anchor = w.at(anchor_at);
  prog.require_psd(w_anchor - lmi::Program::margin(n), "anchor");
  require_trace_cap(prog, w_anchor, static_cast<double>(n));

  const double dsign = shape.reversed ? -1.0 : 1.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Mat a = vertices[i].A;
    const Mat j = vertices[i].J;
    ParamLmi flow;
    flow.name = "flow[" + std::to_string(i) + "]";
    flow.lo = 0.0;
    flow.hi = len;
    flow.strict = true;
    flow.breaks = w.interior_breaks(0.0, len);
    flow.build = [&w, a, dsign](double lo, double hi) {
      const lmi::AffinePoly r = w.on(lo, hi);
      return -(a.transpose() * r + r * a + w.derivative_on(lo, hi) * dsign);
    };
    encode(prog, flow, enc);

    const lmi::AffineMat jump_rhs = j.transpose() * w_anchor * j;
    if (shape.ranged) {
      ParamLmi jump;
      jump.name = "jump[" + std::to_string(i) + "]";
      jump.lo = spec.t_min;
      jump.hi = spec.t_max;
      jump.strict = false;  // epsilon = t * theta already carries the margin
      jump.breaks = w.interior_breaks(spec.t_min, spec.t_max);
      jump.build = [&w, jump_rhs, n](double lo, double hi) {
        return w.on(lo, hi) - jump_rhs - scaled_margin(n, lo, hi);
      };
      encode(prog, jump, enc);
    } else {
      prog.require_psd(w.at(other_end) - jump_rhs - lmi::Program::margin(n) * len,
                       "jump[" + std::to_string(i) + "]");
    }
    if (shape.extra != 0) {
      const lmi::AffineMat lyap = a.transpose() * w_anchor + w_anchor * a;
      prog.require_psd(lyap * static_cast<double>(shape.extra) - lmi::Program::margin(n),
                       "extra[" + std::to_string(i) + "]");
    }
  }

  const SolveOutcome sol = solve_program(prog, st);
  Certificate cert;
  cert.theorem = theorem;
  cert.spec = spec;
  cert.encoder = enc;
  cert.margin = sol.margin;
  cert.solver_status = sol.status;
  cert.sdp_vars = sol.nvars;
  cert.seconds = sol.seconds;
  cert.witness_vars = enc.kind == EncoderKind::sos
                          ? variable_count(n, enc.degree, 0).first
                          : static_cast<int>((enc.segments + 1) * n * (n + 1) / 2);
  if (sol.x.size() > 0) {
    cert.witness = w.value(sol.x);
    cert.residuals = audit_conditions(theorem, vertices, spec, cert.witness, st.verify_grid,
                                      st.verify_tol);
  }
  cert.feasible = sol.margin >= st.margin_threshold && cert.residuals_pass();
  return cert;
}

/// A feasible certificate must agree with the exact test; anything else is a bug.
inline void soundness_check(const Certificate& cert, const std::vector<ImpulsiveSystem>& vertices,
                            int grid) {
  if (!cert.feasible) return;
  const ConditionShape shape = shape_of(cert.theorem);
  std::vector<double> probes;
  if (shape.ranged) {
    for (int k = 0; k < grid; ++k) {
      probes.push_back(grid == 1 ? cert.spec.t_min
                                 : cert.spec.t_min + (cert.spec.t_max - cert.spec.t_min) * k / (grid - 1));
    }
  } else if (shape.extra < 0) {
    for (int k = 0; k < grid; ++k) probes.push_back(cert.spec.bar() * (1.0 + 3.0 * k / std::max(1, grid - 1)));
  } else if (shape.extra > 0) {
    for (int k = 1; k <= grid; ++k) probes.push_back(cert.spec.bar() * k / grid);
  } else {
    probes.push_back(cert.spec.bar());
  }
  for (const auto& v : vertices) {
    for (double theta : probes) {
      const double rho = spectral_radius(expm(v.A, theta) * v.J);
      if (!(rho < 1.0 + 1e-9)) {
        throw ConsistencyError("certificate '" + cert.theorem + "' accepted but rho(e^{A theta} J) = " +
                               std::to_string(rho) + " at theta = " + std::to_string(theta));
      }
    }
  }
}

inline Certificate certify_checked(const std::string& theorem,
                                   const std::vector<ImpulsiveSystem>& vertices, const DwellSpec& spec,
                                   const Encoder& enc, const Settings& st) {
  Certificate c = certify(theorem, vertices, spec, enc, st);
  soundness_check(c, vertices, st.exact_grid);
  return c;
}

}  // namespace detail

enum class Form { d, e };

/// Periodic impulses: statement d (R anchored at 0) or e (S anchored at T).
inline Certificate periodic_certificate(const ImpulsiveSystem& sys, double t_bar, const Encoder& enc,
                                        Form form = Form::d, const Settings& st = {}) {
  return detail::certify_checked(form == Form::d ? tag::periodic_d : tag::periodic_e, {sys},
                                 DwellSpec::periodic(t_bar), enc, st);
}

inline Certificate ranged_certificate(const ImpulsiveSystem& sys, double t_min, double t_max,
                                      const Encoder& enc, const Settings& st = {}) {
  return detail::certify_checked(tag::ranged, {sys}, DwellSpec::ranged(t_min, t_max), enc, st);
}

/// Minimum dwell-time (or maximum with maximum = true, which flips the sign of
/// the extra flow LMI). Form d/e selects statement b/c.
inline Certificate min_dwell_certificate(const ImpulsiveSystem& sys, double t_bar, const Encoder& enc,
                                         bool maximum = false, Form form = Form::d,
                                         const Settings& st = {}) {
  const char* t = maximum ? (form == Form::d ? tag::max_dwell_b : tag::max_dwell_c)
                          : (form == Form::d ? tag::min_dwell_b : tag::min_dwell_c);
  return detail::certify_checked(t, {sys},
                                 maximum ? DwellSpec::maximum(t_bar) : DwellSpec::minimum(t_bar), enc, st);
}

/// Common witness across polytope vertices.
inline Certificate robust_certificate(const PolytopicSystem& psys, const DwellSpec& spec,
                                      const Encoder& enc, Form form = Form::d, const Settings& st = {}) {
  psys.validate();
  const bool d = form == Form::d;
  const char* t = nullptr;
  switch (spec.mode) {
    case DwellMode::periodic: t = d ? tag::periodic_d : tag::periodic_e; break;
    case DwellMode::ranged: t = tag::ranged; break;
    case DwellMode::minimum: t = d ? tag::min_dwell_b : tag::min_dwell_c; break;
    case DwellMode::maximum: t = d ? tag::max_dwell_b : tag::max_dwell_c; break;
  }
  return detail::certify_checked(t, psys.vertices, spec, enc, st);
}

/// Feasibility of P > 0, A'P + PA < 0, Psi' P Psi - P < 0 with Psi = e^{A T} J.
inline bool min_dwell_lmi_feasible(const ImpulsiveSystem& sys, double t_bar, const Settings& st = {}) {
  const Eigen::Index n = sys.n();
  const Mat psi = expm(sys.A, t_bar) * sys.J;
  lmi::Program prog;
  const lmi::AffineMat p = prog.add_symmetric(n);
  prog.require_psd(p - lmi::Program::margin(n), "P");
  require_trace_cap(prog, p, static_cast<double>(n));
  prog.require_psd(-(sys.A.transpose() * p + p * sys.A) - lmi::Program::margin(n), "flow");
  prog.require_psd(p - psi.transpose() * p * psi - lmi::Program::margin(n), "jump");
  return solve_program(prog, st).margin >= st.margin_threshold;
}

/// Smallest T for which the parameter-free minimum dwell-time LMIs hold,
/// located by doubling then bisection.
inline double exact_min_dwell(const ImpulsiveSystem& sys, double tol = 1e-4, const Settings& st = {}) {
  sys.validate();
  if (!(tol > 0.0)) throw InputError("exact_min_dwell: tol must be positive");
  if (!is_hurwitz(sys.A)) throw InputError("exact_min_dwell: A must be Hurwitz");
  constexpr double cap = 1e3;
  auto feasible = [&](double t) {
    try {
      return min_dwell_lmi_feasible(sys, t, st);
    } catch (const NumericalFailure&) {
      return false;
    }
  };
  if (feasible(tol)) return tol;
  double lo = tol, hi = std::max(2.0 * tol, 1.0);
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) throw NotFoundError("exact_min_dwell: no feasible dwell time below 1e3");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct RangeResult {
  double t_min = 0.0;
  double t_max = 0.0;
  bool lower_capped = false;  // feasibility persisted down to the search floor
  bool upper_capped = false;  // ... up to the search ceiling
  int probes = 0;
  Certificate certificate;    // certificate for the returned interval
};

namespace detail {

/// Probe wrapper: numerical failures count as infeasible.
template <class F>
bool probe(F&& f, int& count, Certificate* keep = nullptr) {
  ++count;
  try {
    Certificate c = f();
    if (c.feasible && keep) *keep = std::move(c);
    return c.feasible;
  } catch (const NumericalFailure&) {
    return false;
  }
}

/// Given feasible `good` and a direction, returns the last feasible point.
/// grow(x) moves one bracketing step away from `good`.
template <class Feasible, class Grow>
double bisect_edge(Feasible&& ok, double good, Grow&& grow, double limit, double tol, bool& capped) {
  capped = false;
  double bad = grow(good);
  while (ok(bad)) {
    good = bad;
    if (good == limit) {
      capped = true;
      return good;
    }
    bad = grow(good);
  }
  while (std::abs(bad - good) > tol) {
    const double mid = 0.5 * (good + bad);
    (ok(mid) ? good : bad) = mid;
  }
  return good;
}

}  // namespace detail

/// Widest [T_min, T_max] around the seed certified by ranged certificates:
/// T_min is lowered with T_max = seed, then T_max is raised with the found T_min.
inline RangeResult search_range(const PolytopicSystem& psys, const Encoder& enc, double seed,
                                const Settings& st = {}) {
  psys.validate();
  for (const auto& v : psys.vertices) {
    if (!periodic_exact(v, seed)) throw InputError("search_range: system is not stable at the seed");
  }
  RangeResult out;
  Certificate last;
  auto ranged_ok = [&](double lo, double hi) {
    return detail::probe(
        [&] { return robust_certificate(psys, DwellSpec::ranged(lo, hi), enc, Form::d, st); },
        out.probes, &last);
  };
  if (!ranged_ok(seed, seed)) throw NotFoundError("search_range: no certificate at the seed");
  const double floor = seed * 1e-3;
  const double ceiling = seed * 1e3;
  out.t_min = detail::bisect_edge([&](double x) { return ranged_ok(x, seed); }, seed,
                                  [&](double g) { return std::max(floor, 0.5 * g); }, floor,
                                  st.bisect_tol, out.lower_capped);
  out.t_max = detail::bisect_edge([&](double x) { return ranged_ok(out.t_min, x); }, seed,
                                  [&](double g) { return std::min(ceiling, g + std::max(g, 0.0) * 0.5); },
                                  ceiling, st.bisect_tol, out.upper_capped);
  // Re-certify the final interval so the returned certificate matches it.
  if (!ranged_ok(out.t_min, out.t_max)) throw ConsistencyError("search_range: final interval not certified");
  out.certificate = last;
  return out;
}

inline RangeResult search_range(const ImpulsiveSystem& sys, const Encoder& enc, double seed,
                                const Settings& st = {}) {
  return search_range(PolytopicSystem{{sys}}, enc, seed, st);
}

/// Largest T_max with [t_min, T_max] certified, starting from a feasible seed.
inline RangeResult search_upper(const PolytopicSystem& psys, const Encoder& enc, double t_min,
                                double seed, const Settings& st = {}) {
  psys.validate();
  RangeResult out;
  out.t_min = t_min;
  Certificate last;
  auto ok = [&](double hi) {
    return detail::probe(
        [&] { return robust_certificate(psys, DwellSpec::ranged(t_min, hi), enc, Form::d, st); },
        out.probes, &last);
  };
  if (!ok(seed)) throw NotFoundError("search_upper: seed interval is not certified");
  out.t_max = detail::bisect_edge(ok, seed, [&](double g) { return std::min(seed * 1e3, 1.5 * g); },
                                  seed * 1e3, st.bisect_tol, out.upper_capped);
  if (!ok(out.t_max)) throw ConsistencyError("search_upper: final interval not certified");
  out.certificate = last;
  return out;
}

/// Linear scan outward from the seed with a fixed step, stopping at the
/// first infeasible probe. A cross-check for the bisection search.
inline RangeResult search_range_sweep(const ImpulsiveSystem& sys, const Encoder& enc, double seed,
                                      double step = 0.01, const Settings& st = {}) {
  RangeResult out;
  Certificate last;
  auto ok = [&](double lo, double hi) {
    return detail::probe([&] { return ranged_certificate(sys, lo, hi, enc, st); }, out.probes, &last);
  };
  if (!ok(seed, seed)) throw NotFoundError("search_range_sweep: no certificate at the seed");
  out.t_min = seed;
  while (out.t_min - step > 0.0 && ok(out.t_min - step, seed)) out.t_min -= step;
  out.t_max = seed;
  while (ok(out.t_min, out.t_max + step)) out.t_max += step;
  out.certificate = last;
  return out;
}

struct DwellBound {
  double value = 0.0;
  int probes = 0;
  Certificate certificate;
};

/// Smallest certified minimum dwell-time (or largest maximum dwell-time).
inline DwellBound search_dwell_bound(const ImpulsiveSystem& sys, const Encoder& enc, bool maximum = false,
                                     Form form = Form::d, const Settings& st = {}) {
  sys.validate();
  DwellBound out;
  Certificate last;
  auto ok = [&](double t) {
    return detail::probe([&] { return min_dwell_certificate(sys, t, enc, maximum, form, st); }, out.probes,
                         &last);
  };
  constexpr double cap = 1e3;
  const double floor = st.bisect_tol;
  // good: certified side, bad: refuted side.
  double good = 1.0, bad = 1.0;
  if (!maximum) {
    if (ok(good)) {
      bad = good;
      while (bad > floor && ok(bad * 0.5)) bad *= 0.5;
      good = bad;
      bad = bad * 0.5;
      if (good <= floor) {
        out.value = good;
        out.certificate = last;
        return out;
      }
    } else {
      bad = good;
      do {
        bad = good;
        good *= 2.0;
        if (good > cap) throw NotFoundError("search_dwell_bound: nothing certified below 1e3");
      } while (!ok(good));
    }
  } else {
    if (!ok(good)) {
      do {
        bad = good;
        good *= 0.5;
        if (good < floor) throw NotFoundError("search_dwell_bound: no maximum dwell-time certified");
      } while (!ok(good));
    } else {
      do {
        bad = good * 2.0;
        if (bad > cap) {
          out.value = good;
          out.certificate = last;
          return out;
        }
        if (!ok(bad)) break;
        good = bad;
      } while (true);
    }
  }
  while (std::abs(good - bad) > st.bisect_tol) {
    const double mid = 0.5 * (good + bad);
    (ok(mid) ? good : bad) = mid;
  }
  ok(good);
  out.value = good;
  out.certificate = last;
  return out;
}

}  // namespace dwell
