#pragma once

// Univariate polynomials with matrix coefficients, P(tau) = sum_i P_i tau^i,
// and their piecewise counterparts.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dwell/linalg.hpp"

namespace dwell {

class PolyMat {
 public:
  PolyMat() = default;

  /// Coefficient of tau^i at index i. All coefficients share one shape.
  explicit PolyMat(std::vector<Mat> coeffs, bool symmetric = true)
      : coeffs_(std::move(coeffs)), symmetric_(symmetric) {
    if (coeffs_.empty()) throw InputError("PolyMat: at least one coefficient required");
    for (const auto& c : coeffs_) {
      if (c.rows() != coeffs_[0].rows() || c.cols() != coeffs_[0].cols()) {
        throw DimensionError("PolyMat: inconsistent coefficient shapes");
      }
      if (!c.allFinite()) throw InputError("PolyMat: non-finite coefficient");
    }
    if (symmetric_) {
      for (const auto& c : coeffs_) {
        detail::require_square(c, "PolyMat");
        const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
        if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
          throw InputError("PolyMat: symmetric polynomial with asymmetric coefficient");
        }
      }
    }
  }

  static PolyMat constant(const Mat& c, bool symmetric = true) {
    return PolyMat({c}, symmetric);
  }

  static PolyMat zero(Eigen::Index rows, Eigen::Index cols, bool symmetric = true) {
    return PolyMat({Mat::Zero(rows, cols)}, symmetric);
  }

  Eigen::Index rows() const { return coeffs_.empty() ? 0 : coeffs_[0].rows(); }
  Eigen::Index cols() const { return coeffs_.empty() ? 0 : coeffs_[0].cols(); }
  Eigen::Index dim() const { return rows(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool symmetric() const { return symmetric_; }
  const std::vector<Mat>& coeffs() const { return coeffs_; }
  const Mat& coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  Mat& coeff(int i) { return coeffs_.at(static_cast<std::size_t>(i)); }

  /// Horner evaluation.
  Mat eval(double tau) const {
    if (!std::isfinite(tau)) throw InputError("PolyMat::eval: non-finite argument");
    Mat acc = coeffs_.back();
    for (int i = degree() - 1; i >= 0; --i) acc = acc * tau + coeffs_[static_cast<std::size_t>(i)];
    return acc;
  }

  PolyMat derivative() const {
    if (degree() == 0) return zero(rows(), cols(), symmetric_);
    std::vector<Mat> d;
    d.reserve(coeffs_.size() - 1);
    for (int i = 1; i <= degree(); ++i) d.push_back(i * coeffs_[static_cast<std::size_t>(i)]);
    return PolyMat(std::move(d), symmetric_);
  }

  /// Q(sigma) = P(a*sigma + b), expanded exactly in the monomial basis.
  PolyMat reparametrize(double a, double b) const {
    const int d = degree();
    std::vector<Mat> q(coeffs_.size(), Mat::Zero(rows(), cols()));
    // (a s + b)^i = sum_k C(i,k) a^k b^(i-k) s^k
    for (int i = 0; i <= d; ++i) {
      double binom = 1.0;
      for (int k = 0; k <= i; ++k) {
        const double w = binom * std::pow(a, k) * std::pow(b, i - k);
        if (w != 0.0) q[static_cast<std::size_t>(k)] += w * coeffs_[static_cast<std::size_t>(i)];
        binom = binom * (i - k) / (k + 1);
      }
    }
    return PolyMat(std::move(q), symmetric_);
  }

  PolyMat operator+(const PolyMat& o) const {
    const std::size_t len = std::max(coeffs_.size(), o.coeffs_.size());
    std::vector<Mat> out(len, Mat::Zero(rows(), cols()));
    for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) out[i] += o.coeffs_[i];
    return PolyMat(std::move(out), symmetric_ && o.symmetric_);
  }

  PolyMat operator*(double s) const {
    std::vector<Mat> out = coeffs_;
    for (auto& c : out) c *= s;
    return PolyMat(std::move(out), symmetric_);
  }

 private:
  std::vector<Mat> coeffs_;
  bool symmetric_ = true;
};

/// Piecewise polynomial matrix function on [breaks.front(), breaks.back()].
/// Piece k is stored in the shifted variable tau - breaks[k].
class PiecewisePolyMat {
 public:
  PiecewisePolyMat() = default;

  PiecewisePolyMat(std::vector<double> breaks, std::vector<PolyMat> pieces)
      : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (pieces_.empty() || breaks_.size() != pieces_.size() + 1) {
      throw InputError("PiecewisePolyMat: need N pieces and N+1 breakpoints");
    }
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      if (!(breaks_[k] < breaks_[k + 1])) {
        throw InputError("PiecewisePolyMat: breakpoints must increase");
      }
    }
  }

  /// Single polynomial piece on [lo, hi], given in the original variable tau.
  static PiecewisePolyMat single(const PolyMat& p, double lo, double hi) {
    return PiecewisePolyMat({lo, hi}, {lo == 0.0 ? p : p.reparametrize(1.0, lo)});
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<PolyMat>& pieces() const { return pieces_; }
  std::size_t num_pieces() const { return pieces_.size(); }
  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  Eigen::Index rows() const { return pieces_.front().rows(); }
  Eigen::Index cols() const { return pieces_.front().cols(); }
  bool empty() const { return pieces_.empty(); }

  /// Index of the piece used at tau (right-continuous; the last piece owns hi).
  std::size_t piece_index(double tau) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), tau);
    std::ptrdiff_t k = std::distance(breaks_.begin(), it) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(pieces_.size()) - 1);
    return static_cast<std::size_t>(k);
  }

  Mat eval(double tau) const {
    const std::size_t k = piece_index(tau);
    return pieces_[k].eval(tau - breaks_[k]);
  }

  Mat eval_derivative(double tau) const {
    const std::size_t k = piece_index(tau);
    return pieces_[k].derivative().eval(tau - breaks_[k]);
  }

  /// Single-piece witnesses as a plain polynomial in tau.
  PolyMat as_polymat() const {
    if (pieces_.size() != 1) throw InputError("as_polymat: witness is piecewise");
    return breaks_[0] == 0.0 ? pieces_[0] : pieces_[0].reparametrize(1.0, -breaks_[0]);
  }

 private:
  std::vector<double> breaks_;
  std::vector<PolyMat> pieces_;
};

}  // namespace dwell
