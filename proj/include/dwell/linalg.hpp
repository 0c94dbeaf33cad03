#pragma once

// Dense real linear algebra used throughout: matrix exponential, eigenvalue
// bounds and transition matrices of time-varying linear flows.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "dwell/errors.hpp"

namespace dwell {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace detail {

inline void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// Returns exp(m * t) by scaling and squaring with a degree-13 Pade approximant.
inline Mat expm(const Mat& m, double t = 1.0) {
  detail::require_square(m, "expm");
  detail::require_finite(m, "expm");
  if (!std::isfinite(t)) throw InputError("expm: non-finite time");

  const Eigen::Index n = m.rows();
  if (n == 0) return Mat(0, 0);

  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  Mat a = m * t;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    a /= std::ldexp(1.0, squarings);
  }

  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                      b[5] * a4 + b[3] * a2 + b[1] * ident;
  const Mat u = a * u_inner;
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                b[4] * a4 + b[2] * a2 + b[0] * ident;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

/// Largest eigenvalue modulus.
inline double spectral_radius(const Mat& m) {
  detail::require_square(m, "spectral_radius");
  detail::require_finite(m, "spectral_radius");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es;
  es.setMaxIterations(100 * static_cast<Eigen::Index>(std::max<Eigen::Index>(m.rows(), 1)));
  es.compute(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("spectral_radius: QR iteration did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_schur(const Mat& m) { return spectral_radius(m) < 1.0; }

/// Smallest eigenvalue of a symmetric matrix. Rejects matrices whose
/// asymmetry exceeds 1e-10 relative to their magnitude.
inline double min_eig_sym(const Mat& m) {
  detail::require_square(m, "min_eig_sym");
  detail::require_finite(m, "min_eig_sym");
  if (m.rows() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError("min_eig_sym: matrix is not symmetric");
  }
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_eig_sym(const Mat& m) { return -min_eig_sym(-m); }

inline Mat sym_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Gain schedule tau -> K(tau) for a closed-loop flow A + Bc K(tau).
using GainFn = std::function<Mat(double)>;

/// State-transition matrix of d/dtau Phi = (A + Bc K(tau)) Phi, Phi(0) = I,
/// evaluated at t_end with classical fixed-step RK4.
inline Mat transition_matrix(const Mat& a, const Mat& bc, const GainFn& gain,
                             double t_end, int steps) {
  detail::require_square(a, "transition_matrix");
  if (!(t_end > 0.0) || steps < 1) {
    throw InputError("transition_matrix: need t_end > 0 and steps >= 1");
  }
  const Eigen::Index n = a.rows();
  const bool controlled = bc.size() > 0 && static_cast<bool>(gain);
  if (controlled && bc.rows() != n) throw DimensionError("transition_matrix: Bc rows");

  auto closed_loop = [&](double tau) -> Mat {
    if (!controlled) return a;
    const Mat k = gain(tau);
    if (!k.allFinite()) throw InputError("transition_matrix: non-finite gain");
    if (k.rows() != bc.cols() || k.cols() != n) {
      throw DimensionError("transition_matrix: gain has wrong shape");
    }
    return a + bc * k;
  };

  const double h = t_end / steps;
  Mat phi = Mat::Identity(n, n);
  for (int s = 0; s < steps; ++s) {
    const double tau = s * h;
    const Mat a0 = closed_loop(tau);
    const Mat am = closed_loop(tau + 0.5 * h);
    const Mat a1 = closed_loop(tau + h);
    const Mat k1 = a0 * phi;
    const Mat k2 = am * (phi + 0.5 * h * k1);
    const Mat k3 = am * (phi + 0.5 * h * k2);
    const Mat k4 = a1 * (phi + h * k3);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return phi;
}

/// Flow-only variant.
inline Mat transition_matrix(const Mat& a, double t_end, int steps) {
  return transition_matrix(a, Mat(), GainFn{}, t_end, steps);
}

}  // namespace dwell
