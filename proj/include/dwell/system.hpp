#pragma once

// Problem data shared by the analysis, synthesis and verification layers.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sdp.hpp"

namespace dwell {

/// Flow x' = A x (+ Bc u_c), jump x = J x^- (+ Bd u_d). Empty Bc / Bd mean
/// the channel is absent.
struct ImpulsiveSystem {
  Mat A;
  Mat J;
  Mat Bc;
  Mat Bd;

  Eigen::Index n() const { return A.rows(); }
  bool has_bc() const { return Bc.size() > 0; }
  bool has_bd() const { return Bd.size() > 0; }

  void validate() const {
    detail::require_square(A, "ImpulsiveSystem.A");
    detail::require_square(J, "ImpulsiveSystem.J");
    detail::require_finite(A, "ImpulsiveSystem.A");
    detail::require_finite(J, "ImpulsiveSystem.J");
    if (A.rows() == 0) throw DimensionError("ImpulsiveSystem: empty state");
    if (J.rows() != A.rows()) throw DimensionError("ImpulsiveSystem: A and J differ in size");
    if (has_bc()) {
      detail::require_finite(Bc, "ImpulsiveSystem.Bc");
      if (Bc.rows() != A.rows()) throw DimensionError("ImpulsiveSystem: Bc row count");
    }
    if (has_bd()) {
      detail::require_finite(Bd, "ImpulsiveSystem.Bd");
      if (Bd.rows() != A.rows()) throw DimensionError("ImpulsiveSystem: Bd row count");
    }
  }
};

/// Convex hull of vertex systems; control matrices, when used, come from the
/// vertices as well.
struct PolytopicSystem {
  std::vector<ImpulsiveSystem> vertices;

  void validate() const {
    if (vertices.empty()) throw InputError("PolytopicSystem: no vertices");
    for (const auto& v : vertices) {
      v.validate();
      if (v.n() != vertices.front().n()) throw DimensionError("PolytopicSystem: vertex sizes differ");
    }
  }
};

enum class DwellMode { periodic, ranged, minimum, maximum };

inline const char* to_string(DwellMode m) {
  switch (m) {
    case DwellMode::periodic: return "periodic";
    case DwellMode::ranged: return "ranged";
    case DwellMode::minimum: return "minimum";
    case DwellMode::maximum: return "maximum";
  }
  return "?";
}

struct DwellSpec {
  DwellMode mode = DwellMode::periodic;
  double t_min = 1.0;  // T-bar for the single-valued modes
  double t_max = 1.0;

  static DwellSpec periodic(double t) { return checked({DwellMode::periodic, t, t}); }
  static DwellSpec ranged(double lo, double hi) { return checked({DwellMode::ranged, lo, hi}); }
  static DwellSpec minimum(double t) { return checked({DwellMode::minimum, t, t}); }
  static DwellSpec maximum(double t) { return checked({DwellMode::maximum, t, t}); }

  double bar() const { return t_min; }

 private:
  static DwellSpec checked(DwellSpec s) {
    if (!(s.t_min > 0.0) || !std::isfinite(s.t_max) || !(s.t_min <= s.t_max)) {
      throw InputError("DwellSpec: need 0 < T_min <= T_max < inf");
    }
    return s;
  }
};

enum class EncoderKind { sos, discretization };

struct Encoder {
  EncoderKind kind = EncoderKind::sos;
  int degree = 4;         // polynomial degree of the unknown (sos)
  int segments = 28;      // number of linear pieces (discretization)
  int mult_degree = -1;   // sos multiplier degree; -1 = automatic

  static Encoder sos(int degree, int mult_degree = -1) {
    if (degree < 0) throw InputError("Encoder: negative degree");
    return {EncoderKind::sos, degree, 0, mult_degree};
  }
  static Encoder discretization(int segments) {
    if (segments < 1) throw InputError("Encoder: need at least one segment");
    return {EncoderKind::discretization, 1, segments, -1};
  }
  std::string describe() const {
    return kind == EncoderKind::sos ? "sos(d=" + std::to_string(degree) + ")"
                                    : "discretization(N=" + std::to_string(segments) + ")";
  }
};

/// Tolerances and limits used by every certificate-producing operation.
struct Settings {
  double margin_threshold = 1e-8;
  sdp::Options sdp;
  int verify_grid = 200;
  double verify_tol = 1e-6;
  double bisect_tol = 1e-4;
  int exact_grid = 50;  // soundness probes against the exact test
  /// Upper bound on the synthesis margin. Once it binds, the solver returns a
  /// central point of the feasible set instead of one with very large gains.
  double synthesis_margin_cap = 1e-3;
};

struct ConditionResidual {
  std::string name;
  double min_residual = std::numeric_limits<double>::infinity();
  double where = 0.0;
  bool pass = false;
};

struct Certificate {
  std::string theorem;
  DwellSpec spec;
  Encoder encoder;
  bool feasible = false;
  double margin = -std::numeric_limits<double>::infinity();
  std::string solver_status;
  PiecewisePolyMat witness;  // R (statements d/b) or S (statements e/c)
  std::vector<ConditionResidual> residuals;
  int sdp_vars = 0;
  int witness_vars = 0;
  double seconds = 0.0;

  bool residuals_pass() const {
    for (const auto& r : residuals) {
      if (!r.pass) return false;
    }
    return !residuals.empty();
  }
};

}  // namespace dwell
