#pragma once

// Turns "M(tau) >= 0 for all tau in [lo, hi]" into SDP constraints.
//
// sos_encode writes M(s) = S0(s) + s(1-s) S1(s) on the normalized variable
// s in [0, 1] with Gram-matrix representations of S0 and S1.
// discretize_encode handles expressions that are affine on every segment by
// imposing the condition at both segment endpoints.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/lmi.hpp"

namespace dwell {

struct ParamLmi {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  /// Expression on the sub-interval [a, b], written in s in [0, 1]
  /// (tau = a + (b - a) s). Must be symmetric and is required to be PSD.
  std::function<lmi::AffinePoly(double a, double b)> build;
  /// Gram matrices (or endpoint values) carry the margin t I.
  bool strict = true;
  /// Split points inside (lo, hi); each sub-interval is encoded on its own.
  std::vector<double> breaks;
};

namespace detail {

inline void check_lmi(const ParamLmi& c) {
  if (!(c.hi >= c.lo) || !std::isfinite(c.lo) || !std::isfinite(c.hi)) {
    throw InputError("ParamLmi '" + c.name + "': need finite lo <= hi");
  }
  if (!c.build) throw InputError("ParamLmi '" + c.name + "': missing expression");
}

inline std::vector<double> segments_of(const ParamLmi& c) {
  std::vector<double> pts{c.lo};
  std::vector<double> inner = c.breaks;
  std::sort(inner.begin(), inner.end());
  for (double b : inner) {
    if (b > pts.back() && b < c.hi) pts.push_back(b);
  }
  pts.push_back(c.hi);
  return pts;
}

inline bool degenerate(const ParamLmi& c) {
  return c.hi - c.lo <= 1e-14 * std::max(1.0, std::abs(c.hi));
}

inline void require_point(lmi::Program& prog, const lmi::AffineMat& m, bool strict,
                          const std::string& name) {
  if (strict) prog.require_psd(m - lmi::Program::margin(m.rows()), name);
  else prog.require_psd(m, name);
}

/// Sum over i + j = k of the (i, j) blocks of a Gram matrix.
inline std::vector<lmi::AffineMat> gram_coeffs(const lmi::AffineMat& g, int k, Eigen::Index n) {
  std::vector<lmi::AffineMat> out(static_cast<std::size_t>(2 * k + 1), lmi::AffineMat(n, n));
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= k; ++j) out[static_cast<std::size_t>(i + j)] += g.block(i * n, j * n, n, n);
  }
  return out;
}

}  // namespace detail

/// Adds Gram blocks and coefficient-matching equalities. mult_degree is the
/// degree of S1 (even); -1 selects deg S0 - 2 with deg S0 = deg M rounded up
/// to even. Returns the number of Gram blocks created.
inline int sos_encode(lmi::Program& prog, const ParamLmi& c, int mult_degree = -1) {
  detail::check_lmi(c);
  if (mult_degree < -1 || (mult_degree >= 0 && mult_degree % 2 != 0)) {
    throw EncodingError("sos_encode: multiplier degree must be even and non-negative");
  }
  if (detail::degenerate(c)) {
    detail::require_point(prog, c.build(c.lo, c.lo).at(0.0), c.strict, c.name);
    return 0;
  }
  const auto pts = detail::segments_of(c);
  int made = 0;
  for (std::size_t seg = 0; seg + 1 < pts.size(); ++seg) {
    const lmi::AffinePoly m = c.build(pts[seg], pts[seg + 1]);
    if (m.rows() != m.cols()) throw DimensionError("sos_encode: expression is not square");
    const Eigen::Index n = m.rows();
    const int deg = m.effective_degree();
    const int k1 = mult_degree >= 0 ? mult_degree / 2 : (deg + 1) / 2 - 1;
    const int k0 = std::max((deg + 1) / 2, k1 + 1);

    const std::string tag = c.name + "#" + std::to_string(seg);
    const lmi::AffineMat g0 = prog.add_symmetric((k0 + 1) * n);
    detail::require_point(prog, g0, c.strict, tag + ".S0");
    std::vector<lmi::AffineMat> rep = detail::gram_coeffs(g0, k0, n);
    ++made;

    if (k1 >= 0) {
      const lmi::AffineMat g1 = prog.add_symmetric((k1 + 1) * n);
      detail::require_point(prog, g1, c.strict, tag + ".S1");
      ++made;
      const auto c1 = detail::gram_coeffs(g1, k1, n);
      // s(1 - s) = s - s^2
      for (std::size_t k = 0; k < c1.size(); ++k) {
        rep[k + 1] += c1[k];
        rep[k + 2] -= c1[k];
      }
    }
    if (deg > 2 * k0) throw EncodingError("sos_encode: expression degree exceeds Gram degree");
    for (int k = 0; k <= 2 * k0; ++k) {
      lmi::AffineMat diff = rep[static_cast<std::size_t>(k)];
      if (k <= m.degree()) diff -= m.coeff(k);
      prog.require_zero(diff, true);
    }
  }
  return made;
}

/// Endpoint encoding for expressions affine in the parameter on each
/// sub-interval (piecewise-linear unknowns).
inline void discretize_encode(lmi::Program& prog, const ParamLmi& c) {
  detail::check_lmi(c);
  if (detail::degenerate(c)) {
    detail::require_point(prog, c.build(c.lo, c.lo).at(0.0), c.strict, c.name);
    return;
  }
  const auto pts = detail::segments_of(c);
  for (std::size_t seg = 0; seg + 1 < pts.size(); ++seg) {
    const lmi::AffinePoly m = c.build(pts[seg], pts[seg + 1]);
    if (m.effective_degree() >= 2) {
      throw EncodingError("discretize_encode: '" + c.name +
                          "' is not affine on a segment (degree " +
                          std::to_string(m.effective_degree()) + ")");
    }
    const std::string tag = c.name + "#" + std::to_string(seg);
    // Both ends: derivative terms differ on either side of a breakpoint.
    detail::require_point(prog, m.at(0.0), c.strict, tag + ".lo");
    detail::require_point(prog, m.at(1.0), c.strict, tag + ".hi");
  }
}

struct PointwiseReport {
  double min_residual = std::numeric_limits<double>::infinity();
  double argmin = 0.0;
  bool pass = false;
};

/// Minimum over a uniform grid of min_eig_sym(m(tau)).
inline PointwiseReport verify_pointwise(const std::function<Mat(double)>& m, double lo, double hi,
                                        int grid = 200, double tol = 1e-6) {
  if (grid < 2) throw InputError("verify_pointwise: grid must be >= 2");
  if (!(hi >= lo)) throw InputError("verify_pointwise: need lo <= hi");
  PointwiseReport r;
  for (int i = 0; i < grid; ++i) {
    const double tau = lo + (hi - lo) * i / (grid - 1);
    const double e = min_eig_sym(sym_part(m(tau)));
    if (e < r.min_residual) {
      r.min_residual = e;
      r.argmin = tau;
    }
  }
  r.pass = r.min_residual >= -tol;
  return r;
}

}  // namespace dwell
