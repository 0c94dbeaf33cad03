#pragma once

#include "dwell/linalg.hpp"
#include "dwell/sampled_data.hpp"
#include "dwell/system.hpp"

namespace fx {

using dwell::Mat;
using dwell::Vec;

inline Mat m2(double a, double b, double c, double d) { return (Mat(2, 2) << a, b, c, d).finished(); }
inline Mat col(double a, double b) { return (Mat(2, 1) << a, b).finished(); }
inline Mat row(double a, double b) { return (Mat(1, 2) << a, b).finished(); }

// Unstable flow, contracting jump. Periodically stable for T in [0.1824, 0.5776].
inline dwell::ImpulsiveSystem unstable_flow() { return {m2(-1, 0.1, 0, 1.2), m2(1.2, 0, 0, 0.5), {}, {}}; }

// Hurwitz flow, expanding jump. Minimum dwell-time about 1.1406.
inline dwell::ImpulsiveSystem expanding_jump() { return {m2(-1, 0, 1, -2), m2(2, 1, 1, 3), {}, {}}; }

// Unstable flow and jump with a flow input; K_d = 0.
inline dwell::ImpulsiveSystem controlled_plant() { return {m2(1, 0, 1, 2), m2(1, 1, 1, 3), col(1, 0), {}}; }

// Damped double integrator under a fixed sampled-data gain.
inline dwell::SampledDataSystem damped_cart() {
  return {m2(0, 1, 0, -0.1), col(0, 0.1), row(-3.75, -11.5), Mat::Zero(1, 1)};
}

inline dwell::SampledDataSystem oscillator() { return {m2(0, 1, -2, 0.1), col(0, 1), row(1, 0), Mat::Zero(1, 1)}; }

inline dwell::PolytopicSampledData uncertain_cart(double delta) {
  const Mat a = m2(0, 1, 0, -0.1);
  return {{a, delta * a}, col(0, 1)};
}

/// Lifted closed-loop vertices of a sampled-data polytope under gain k.
inline dwell::PolytopicSystem lifted_loop(const dwell::PolytopicSampledData& p, const Mat& k) {
  dwell::PolytopicSystem out;
  for (const auto& a : p.A) {
    const auto parts = dwell::lift_parts(a, p.B);
    out.vertices.push_back({parts.Abar, parts.J0 + parts.B0 * k, {}, {}});
  }
  return out;
}

}  // namespace fx
