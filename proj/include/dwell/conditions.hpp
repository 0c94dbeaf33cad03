#pragma once

// Direct evaluation of the dwell-time stability conditions for a numerical
// witness. Independent of how the witness was computed.

#include <functional>
#include <string>
#include <vector>

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sos.hpp"
#include "dwell/system.hpp"

namespace dwell {

/// Theorem tags understood by audit_conditions.
namespace tag {
inline constexpr const char* periodic_d = "periodic-d";
inline constexpr const char* periodic_e = "periodic-e";
inline constexpr const char* ranged = "ranged";
inline constexpr const char* min_dwell_b = "min-dwell-b";
inline constexpr const char* min_dwell_c = "min-dwell-c";
inline constexpr const char* max_dwell_b = "max-dwell-b";
inline constexpr const char* max_dwell_c = "max-dwell-c";
}  // namespace tag

struct ConditionShape {
  bool reversed = false;   // witness anchored at the end of the interval (S form)
  bool ranged = false;     // jump condition over theta in [T_min, T_max]
  int extra = 0;           // 0 none, -1 flow LMI < 0 at the anchor, +1 reversed sign
};

inline ConditionShape shape_of(const std::string& theorem) {
  if (theorem == tag::periodic_d) return {false, false, 0};
  if (theorem == tag::periodic_e) return {true, false, 0};
  if (theorem == tag::ranged) return {false, true, 0};
  if (theorem == tag::min_dwell_b) return {false, false, -1};
  if (theorem == tag::min_dwell_c) return {true, false, -1};
  if (theorem == tag::max_dwell_b) return {false, false, +1};
  if (theorem == tag::max_dwell_c) return {true, false, +1};
  throw InputError("unknown theorem tag '" + theorem + "'");
}

inline bool tag_matches_mode(const std::string& theorem, DwellMode mode) {
  const ConditionShape s = shape_of(theorem);
  if (s.ranged) return mode == DwellMode::ranged || mode == DwellMode::periodic;
  if (s.extra < 0) return mode == DwellMode::minimum;
  if (s.extra > 0) return mode == DwellMode::maximum;
  return mode == DwellMode::periodic;
}

/// Worst eigenvalue of every condition on a uniform grid; each condition is
/// written as "matrix >= 0" and passes when its residual is >= -tol.
inline std::vector<ConditionResidual> audit_conditions(const std::string& theorem,
                                                       const std::vector<ImpulsiveSystem>& vertices,
                                                       const DwellSpec& spec,
                                                       const PiecewisePolyMat& w, int grid,
                                                       double tol) {
  const ConditionShape s = shape_of(theorem);
  if (vertices.empty()) throw InputError("audit_conditions: no system");
  const Eigen::Index n = vertices.front().n();
  if (w.empty() || w.rows() != n || w.cols() != n) {
    throw InputError("audit_conditions: witness size does not match the system");
  }
  const double len = s.ranged ? spec.t_max : spec.bar();
  if (std::abs(w.hi() - len) > 1e-9 * std::max(1.0, len) || std::abs(w.lo()) > 0.0) {
    throw InputError("audit_conditions: witness domain does not match the dwell time");
  }
  const double anchor_at = s.reversed ? len : 0.0;
  const double other_end = s.reversed ? 0.0 : len;
  const Mat w_anchor = w.eval(anchor_at);

  std::vector<ConditionResidual> out;
  auto add = [&](const std::string& name, const PointwiseReport& r) {
    out.push_back({name, r.min_residual, r.argmin, r.pass});
  };
  auto suffix = [&](std::size_t i) {
    return vertices.size() > 1 ? "[" + std::to_string(i) + "]" : std::string();
  };
  const double dsign = s.reversed ? -1.0 : 1.0;

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Mat& a = vertices[i].A;
    const Mat& j = vertices[i].J;
    add("flow" + suffix(i), verify_pointwise(
                                [&](double tau) -> Mat {
                                  const Mat r = w.eval(tau);
                                  return -(a.transpose() * r + r * a + dsign * w.eval_derivative(tau));
                                },
                                0.0, len, grid, tol));
    if (s.ranged) {
      add("jump" + suffix(i), verify_pointwise(
                                  [&](double theta) -> Mat {
                                    return w.eval(theta) - j.transpose() * w_anchor * j;
                                  },
                                  spec.t_min, spec.t_max, grid, tol));
    } else {
      const Mat m = w.eval(other_end) - j.transpose() * w_anchor * j;
      add("jump" + suffix(i), verify_pointwise([&](double) { return m; }, len, len, 2, tol));
    }
    if (s.extra != 0) {
      const Mat m = static_cast<double>(s.extra) * (a.transpose() * w_anchor + w_anchor * a);
      add("extra" + suffix(i), verify_pointwise([&](double) { return m; }, anchor_at, anchor_at, 2, tol));
    }
  }
  add("anchor", verify_pointwise([&](double) { return w_anchor; }, anchor_at, anchor_at, 2, tol));
  return out;
}

}  // namespace dwell
