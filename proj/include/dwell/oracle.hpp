#pragma once

// Brute-force checks that do not go through the SDP layer: exact stability
// regions, certificate audits, simulation and randomized falsification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dwell/conditions.hpp"
#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/sampled_data.hpp"
#include "dwell/synthesis.hpp"
#include "dwell/system.hpp"

namespace dwell {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Maximal sub-intervals of [lo, hi] on which rho(e^{A theta} J) < 1, with
/// every crossing refined by bisection to refine_tol.
inline std::vector<Interval> spectral_sweep(const ImpulsiveSystem& sys, double lo, double hi, int grid = 400,
                                            double refine_tol = 1e-5) {
  sys.validate();
  if (!(lo > 0.0) || !(hi > lo)) throw InputError("spectral_sweep: need 0 < lo < hi");
  if (grid < 2) throw InputError("spectral_sweep: grid must be >= 2");
  if (!(refine_tol > 0.0)) throw InputError("spectral_sweep: refine_tol must be positive");
  auto stable = [&](double th) { return spectral_radius(expm(sys.A, th) * sys.J) < 1.0; };
  auto crossing = [&](double a, double b, bool a_stable) {
    while (b - a > refine_tol) {
      const double mid = 0.5 * (a + b);
      (stable(mid) == a_stable ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  std::vector<Interval> out;
  double prev_th = lo;
  bool prev = stable(lo);
  std::optional<double> start;
  if (prev) start = lo;
  for (int i = 1; i < grid; ++i) {
    const double th = lo + (hi - lo) * i / (grid - 1);
    const bool cur = stable(th);
    if (cur != prev) {
      const double x = crossing(prev_th, th, prev);
      if (cur) {
        start = x;
      } else {
        out.push_back({*start, x});
        start.reset();
      }
    }
    prev = cur;
    prev_th = th;
  }
  if (start) out.push_back({*start, hi});
  return out;
}

struct AuditReport {
  bool pass = false;
  std::vector<ConditionResidual> residuals;

  const ConditionResidual* worst() const {
    const ConditionResidual* w = nullptr;
    for (const auto& r : residuals) {
      if (!w || r.min_residual < w->min_residual) w = &r;
    }
    return w;
  }
};

/// Re-evaluates the conditions named by the certificate's theorem tag.
inline AuditReport verify_certificate(const Certificate& cert, const std::vector<ImpulsiveSystem>& vertices,
                                      int grid = 200, double tol = 1e-6) {
  if (!tag_matches_mode(cert.theorem, cert.spec.mode)) {
    throw InputError("verify_certificate: theorem '" + cert.theorem + "' does not apply to a " +
                     to_string(cert.spec.mode) + " dwell-time");
  }
  for (const auto& v : vertices) v.validate();
  AuditReport r;
  r.residuals = audit_conditions(cert.theorem, vertices, cert.spec, cert.witness, grid, tol);
  r.pass = std::all_of(r.residuals.begin(), r.residuals.end(), [](const auto& c) { return c.pass; });
  return r;
}

inline AuditReport verify_certificate(const Certificate& cert, const ImpulsiveSystem& sys, int grid = 200,
                                      double tol = 1e-6) {
  return verify_certificate(cert, std::vector<ImpulsiveSystem>{sys}, grid, tol);
}

struct DwellSequence {
  std::vector<double> T;
  std::string kind = "fixed";  // fixed | uniform
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;

  static DwellSequence fixed(double t, int count) {
    if (!(t > 0.0) || count < 0) throw InputError("DwellSequence: need T > 0");
    return {std::vector<double>(static_cast<std::size_t>(count), t), "fixed", t, t, 0};
  }
  static DwellSequence uniform(double lo, double hi, int count, std::uint64_t seed) {
    if (!(lo > 0.0) || !(hi >= lo) || count < 0) throw InputError("DwellSequence: need 0 < a <= b");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    DwellSequence s{{}, "uniform", lo, hi, seed};
    for (int k = 0; k < count; ++k) s.T.push_back(dist(rng));
    return s;
  }
  void validate() const {
    for (double t : T) {
      if (!(t > 0.0) || !std::isfinite(t)) throw InputError("DwellSequence: dwell times must be positive");
    }
  }
};

/// Samples on a fixed step; impulses happen at t = 0 and after every dwell
/// time. `pre_jump[k]` is the left limit at the k-th impulse.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<bool> impulse;
  std::vector<Vec> pre_jump;
  bool diverged = false;
  double diverged_at = 0.0;

  void write_csv(std::ostream& os) const {
    os << "t";
    const Eigen::Index n = x.empty() ? 0 : x.front().size();
    for (Eigen::Index i = 0; i < n; ++i) os << ",x" << (i + 1);
    os << ",impulse\n";
    os.precision(12);
    for (std::size_t k = 0; k < t.size(); ++k) {
      os << t[k];
      for (Eigen::Index i = 0; i < n; ++i) os << "," << x[k](i);
      os << "," << (impulse[k] ? 1 : 0) << "\n";
    }
  }
};

/// RK4 between impulses; with a controller the flow uses K_c(tau) (tau is the
/// time since the last impulse, clamped per the controller) and jumps use K_d.
inline Trajectory simulate(const ImpulsiveSystem& sys, const DwellSequence& seq, const Vec& x0, double step,
                           const Controller* ctrl = nullptr) {
  sys.validate();
  seq.validate();
  if (!(step > 0.0)) throw InputError("simulate: step must be positive");
  if (x0.size() != sys.n()) throw DimensionError("simulate: x0 has the wrong size");
  const bool controlled = ctrl != nullptr && sys.has_bc() && ctrl->m_c > 0;
  const Mat jcl = ctrl ? closed_loop_jump(sys, *ctrl) : sys.J;
  auto rhs = [&](double tau, const Vec& x) -> Vec {
    if (!controlled) return sys.A * x;
    return (sys.A + sys.Bc * extract_gain(*ctrl, tau)) * x;
  };

  Trajectory tr;
  double t = 0.0;
  Vec x = x0;
  auto jump = [&] {
    tr.pre_jump.push_back(x);
    x = jcl * x;
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.impulse.push_back(true);
  };
  jump();
  for (double dwell : seq.T) {
    const int n_steps = std::max(1, static_cast<int>(std::ceil(dwell / step - 1e-12)));
    const double h = dwell / n_steps;
    for (int s = 0; s < n_steps; ++s) {
      const double tau = s * h;
      const Vec k1 = rhs(tau, x);
      const Vec k2 = rhs(tau + 0.5 * h, x + 0.5 * h * k1);
      const Vec k3 = rhs(tau + 0.5 * h, x + 0.5 * h * k2);
      const Vec k4 = rhs(tau + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!x.allFinite()) {
        tr.diverged = true;
        tr.diverged_at = t + (s + 1) * h;
        return tr;
      }
      if (s + 1 < n_steps) {
        tr.t.push_back(t + (s + 1) * h);
        tr.x.push_back(x);
        tr.impulse.push_back(false);
      }
    }
    t += dwell;
    jump();
  }
  return tr;
}

/// The sampled-data loop itself: u held between samples,
/// u_k = K1 x(t_k) + K2 u_{k-1}. Returns x only.
inline Trajectory simulate_sampled(const SampledDataSystem& sd, const DwellSequence& seq, const Vec& x0,
                                   const Vec& u_prev, double step) {
  sd.validate();
  seq.validate();
  if (!sd.has_gains()) throw InputError("simulate_sampled: gains are required");
  if (!(step > 0.0)) throw InputError("simulate_sampled: step must be positive");
  const Mat k2 = sd.K2.size() > 0 ? sd.K2 : Mat::Zero(sd.m(), sd.m());
  Trajectory tr;
  double t = 0.0;
  Vec x = x0, u = u_prev;
  auto sample = [&] {
    tr.pre_jump.push_back(x);
    u = sd.K1 * x + k2 * u;
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.impulse.push_back(true);
  };
  sample();
  for (double dwell : seq.T) {
    const int n_steps = std::max(1, static_cast<int>(std::ceil(dwell / step - 1e-12)));
    const double h = dwell / n_steps;
    for (int s = 0; s < n_steps; ++s) {
      auto f = [&](const Vec& y) -> Vec { return sd.A * y + sd.B * u; };
      const Vec k1 = f(x), k2v = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2v), k4 = f(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2v + 2.0 * k3 + k4);
      if (!x.allFinite()) {
        tr.diverged = true;
        tr.diverged_at = t + (s + 1) * h;
        return tr;
      }
      if (s + 1 < n_steps) {
        tr.t.push_back(t + (s + 1) * h);
        tr.x.push_back(x);
        tr.impulse.push_back(false);
      }
    }
    t += dwell;
    sample();
  }
  return tr;
}

struct Counterexample {
  int trial = 0;
  double growth = 0.0;
  std::string description;
};

/// Random parameter trajectories lambda(s) in the unit simplex, piecewise
/// constant with exponential switching times, combined with admissible
/// random dwell sequences. The first trials hold lambda at each vertex.
inline std::optional<Counterexample> falsify_robust(const PolytopicSystem& psys, const DwellSpec& spec,
                                                    int trials, std::uint64_t seed, int events = 50,
                                                    double threshold = 1e3) {
  psys.validate();
  if (trials < 1) throw InputError("falsify_robust: trials must be >= 1");
  const auto& vs = psys.vertices;
  const std::size_t nv = vs.size();
  const Eigen::Index n = vs.front().n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ref = spec.mode == DwellMode::ranged ? spec.t_max : spec.bar();
  std::exponential_distribution<double> switch_gap(5.0 / ref);

  auto dwell = [&]() {
    switch (spec.mode) {
      case DwellMode::periodic: return spec.bar();
      case DwellMode::ranged: return spec.t_min + (spec.t_max - spec.t_min) * unit(rng);
      case DwellMode::minimum: return spec.bar() * (1.0 + 3.0 * unit(rng));
      case DwellMode::maximum: return spec.bar() * std::max(1e-2, unit(rng));
    }
    return spec.bar();
  };
  auto random_weights = [&]() {
    std::vector<double> w(nv);
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log(std::max(unit(rng), 1e-300)));
    for (auto& x : w) x /= sum;
    return w;
  };
  auto mix = [&](const std::vector<double>& w, bool flow) {
    Mat m = Mat::Zero(n, n);
    for (std::size_t i = 0; i < nv; ++i) m += w[i] * (flow ? vs[i].A : vs[i].J);
    return m;
  };

  for (int trial = 0; trial < trials; ++trial) {
    const bool vertex_trial = static_cast<std::size_t>(trial) < nv;
    std::vector<double> w(nv, 0.0);
    if (vertex_trial) w[static_cast<std::size_t>(trial)] = 1.0;
    else w = random_weights();
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = gauss(rng);
    x.normalize();
    double next_switch = vertex_trial ? std::numeric_limits<double>::infinity() : switch_gap(rng);
    double growth = 1.0;
    for (int e = 0; e < events; ++e) {
      x = mix(w, false) * x;
      double left = dwell();
      while (left > 0.0) {
        const double dt = std::min(left, next_switch);
        x = expm(mix(w, true), dt) * x;
        left -= dt;
        next_switch -= dt;
        if (next_switch <= 0.0) {
          w = random_weights();
          next_switch = switch_gap(rng);
        }
      }
      growth = std::max(growth, x.norm());
      if (!std::isfinite(growth) || growth >= threshold) {
        return Counterexample{trial, growth,
                              vertex_trial ? "lambda fixed at vertex " + std::to_string(trial)
                                           : "random piecewise-constant lambda"};
      }
    }
  }
  return std::nullopt;
}

struct SweepCheck {
  bool pass = false;
  double worst_rho = 0.0;
  double where = 0.0;
};

/// rho(Phi(theta) J_cl) < 1 on a grid of [T, horizon]; Phi beyond T uses
/// Phi(T + d) = e^{(A + B_c K_c(T)) d} Phi(T).
inline SweepCheck min_dwell_sweep_check(const ImpulsiveSystem& sys, double t_bar, double horizon, int grid = 50,
                                        const Controller* ctrl = nullptr, int steps = 2000) {
  sys.validate();
  if (!(t_bar > 0.0) || !(horizon > t_bar)) throw InputError("min_dwell_sweep_check: need 0 < T < horizon");
  if (grid < 2) throw InputError("min_dwell_sweep_check: grid must be >= 2");
  const bool controlled = ctrl != nullptr && sys.has_bc() && ctrl->m_c > 0;
  const Mat phi_t = controlled ? closed_loop_transition(sys, *ctrl, t_bar, steps) : expm(sys.A, t_bar);
  const Mat a_tail = controlled ? Mat(sys.A + sys.Bc * extract_gain(*ctrl, t_bar)) : sys.A;
  const Mat jcl = ctrl ? closed_loop_jump(sys, *ctrl) : sys.J;
  SweepCheck r;
  for (int k = 0; k < grid; ++k) {
    const double th = t_bar + (horizon - t_bar) * k / (grid - 1);
    const double rho = spectral_radius(expm(a_tail, th - t_bar) * phi_t * jcl);
    if (rho >= r.worst_rho) {
      r.worst_rho = rho;
      r.where = th;
    }
  }
  r.pass = r.worst_rho < 1.0;
  return r;
}

}  // namespace dwell
