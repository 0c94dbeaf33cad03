#pragma once

// Affine matrix expressions in scalar decision variables, polynomials in one
// parameter with such expressions as coefficients, and a Program collecting
// PSD and equality constraints into an sdp::Problem.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sdp.hpp"

namespace dwell::lmi {

/// constant + sum_v x_v * terms[v]
class AffineMat {
 public:
  AffineMat() = default;
  AffineMat(Eigen::Index rows, Eigen::Index cols) : constant_(Mat::Zero(rows, cols)) {}
  explicit AffineMat(Mat constant) : constant_(std::move(constant)) {}

  static AffineMat variable(int var, Mat coeff) {
    AffineMat a(coeff.rows(), coeff.cols());
    a.terms_.emplace(var, std::move(coeff));
    return a;
  }

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const Mat& constant() const { return constant_; }
  const std::map<int, Mat>& terms() const { return terms_; }

  bool is_zero() const {
    if (!constant_.isZero(0.0)) return false;
    for (const auto& [v, m] : terms_) {
      (void)v;
      if (!m.isZero(0.0)) return false;
    }
    return true;
  }

  Mat value(const Vec& x) const {
    Mat out = constant_;
    for (const auto& [v, m] : terms_) out += x(v) * m;
    return out;
  }

  AffineMat& operator+=(const AffineMat& o) {
    check_same(o);
    constant_ += o.constant_;
    for (const auto& [v, m] : o.terms_) {
      auto it = terms_.find(v);
      if (it == terms_.end()) terms_.emplace(v, m);
      else it->second += m;
    }
    return *this;
  }
  AffineMat& operator-=(const AffineMat& o) { return *this += o * -1.0; }
  AffineMat& operator+=(const Mat& c) {
    if (c.rows() != rows() || c.cols() != cols()) throw DimensionError("AffineMat: shape mismatch");
    constant_ += c;
    return *this;
  }
  AffineMat& operator*=(double s) {
    constant_ *= s;
    for (auto& [v, m] : terms_) {
      (void)v;
      m *= s;
    }
    return *this;
  }

  friend AffineMat operator+(AffineMat a, const AffineMat& b) { return a += b; }
  friend AffineMat operator-(AffineMat a, const AffineMat& b) { return a -= b; }
  friend AffineMat operator+(AffineMat a, const Mat& b) { return a += b; }
  friend AffineMat operator-(AffineMat a, const Mat& b) { return a += Mat(-b); }
  friend AffineMat operator*(AffineMat a, double s) { return a *= s; }
  friend AffineMat operator*(double s, AffineMat a) { return a *= s; }
  AffineMat operator-() const { return *this * -1.0; }

  friend AffineMat operator*(const Mat& l, const AffineMat& a) {
    if (l.cols() != a.rows()) throw DimensionError("AffineMat: left product shape");
    AffineMat out(l * a.constant_);
    for (const auto& [v, m] : a.terms_) out.terms_.emplace(v, l * m);
    return out;
  }
  friend AffineMat operator*(const AffineMat& a, const Mat& r) {
    if (a.cols() != r.rows()) throw DimensionError("AffineMat: right product shape");
    AffineMat out(a.constant_ * r);
    for (const auto& [v, m] : a.terms_) out.terms_.emplace(v, m * r);
    return out;
  }

  AffineMat transpose() const {
    AffineMat out(Mat(constant_.transpose()));
    for (const auto& [v, m] : terms_) out.terms_.emplace(v, m.transpose());
    return out;
  }

  /// a + a'
  AffineMat he() const { return *this + transpose(); }

  AffineMat block(Eigen::Index r0, Eigen::Index c0, Eigen::Index h, Eigen::Index w) const {
    AffineMat out(Mat(constant_.block(r0, c0, h, w)));
    for (const auto& [v, m] : terms_) {
      Mat sub = m.block(r0, c0, h, w);
      if (!sub.isZero(0.0)) out.terms_.emplace(v, std::move(sub));
    }
    return out;
  }

  /// Block matrix from a grid of expressions; rows of the grid must agree in height.
  static AffineMat blocks(const std::vector<std::vector<AffineMat>>& grid) {
    if (grid.empty() || grid[0].empty()) throw DimensionError("AffineMat::blocks: empty grid");
    std::vector<Eigen::Index> heights, widths;
    for (const auto& row : grid) {
      if (row.size() != grid[0].size()) throw DimensionError("AffineMat::blocks: ragged grid");
      heights.push_back(row[0].rows());
    }
    for (const auto& cell : grid[0]) widths.push_back(cell.cols());
    Eigen::Index total_r = 0, total_c = 0;
    for (auto h : heights) total_r += h;
    for (auto w : widths) total_c += w;
    AffineMat out(total_r, total_c);
    Eigen::Index r0 = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Eigen::Index c0 = 0;
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        const AffineMat& cell = grid[i][j];
        if (cell.rows() != heights[i] || cell.cols() != widths[j]) {
          throw DimensionError("AffineMat::blocks: cell shape mismatch");
        }
        out.constant_.block(r0, c0, heights[i], widths[j]) = cell.constant_;
        for (const auto& [v, m] : cell.terms_) {
          auto it = out.terms_.find(v);
          if (it == out.terms_.end()) it = out.terms_.emplace(v, Mat::Zero(total_r, total_c)).first;
          it->second.block(r0, c0, heights[i], widths[j]) += m;
        }
        c0 += widths[j];
      }
      r0 += heights[i];
    }
    return out;
  }

 private:
  void check_same(const AffineMat& o) const {
    if (o.rows() != rows() || o.cols() != cols()) throw DimensionError("AffineMat: shape mismatch");
  }

  Mat constant_;
  std::map<int, Mat> terms_;
};

/// Polynomial in a scalar parameter s with AffineMat coefficients (index = power).
class AffinePoly {
 public:
  AffinePoly() = default;
  explicit AffinePoly(std::vector<AffineMat> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw InputError("AffinePoly: at least one coefficient required");
  }
  explicit AffinePoly(const AffineMat& constant) : c_{constant} {}
  static AffinePoly constant(const Mat& m) { return AffinePoly(AffineMat(m)); }

  Eigen::Index rows() const { return c_.front().rows(); }
  Eigen::Index cols() const { return c_.front().cols(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<AffineMat>& coeffs() const { return c_; }
  const AffineMat& coeff(int i) const { return c_.at(static_cast<std::size_t>(i)); }

  /// Degree after dropping identically zero leading coefficients.
  int effective_degree() const {
    int d = degree();
    while (d > 0 && c_[static_cast<std::size_t>(d)].is_zero()) --d;
    return d;
  }

  AffineMat at(double s) const {
    AffineMat acc = c_.back();
    for (int i = degree() - 1; i >= 0; --i) acc = acc * s + c_[static_cast<std::size_t>(i)];
    return acc;
  }

  AffinePoly derivative() const {
    if (degree() == 0) return AffinePoly(AffineMat(rows(), cols()));
    std::vector<AffineMat> d;
    for (int i = 1; i <= degree(); ++i) d.push_back(c_[static_cast<std::size_t>(i)] * static_cast<double>(i));
    return AffinePoly(std::move(d));
  }

  /// q(u) = p(a u + b)
  AffinePoly reparametrize(double a, double b) const {
    std::vector<AffineMat> q(c_.size(), AffineMat(rows(), cols()));
    for (int i = 0; i <= degree(); ++i) {
      double binom = 1.0;
      for (int k = 0; k <= i; ++k) {
        const double w = binom * std::pow(a, k) * std::pow(b, i - k);
        if (w != 0.0) q[static_cast<std::size_t>(k)] += c_[static_cast<std::size_t>(i)] * w;
        binom = binom * (i - k) / (k + 1);
      }
    }
    return AffinePoly(std::move(q));
  }

  /// Product with a scalar polynomial given by its coefficients.
  AffinePoly times(const std::vector<double>& p) const {
    std::vector<AffineMat> out(c_.size() + p.size() - 1, AffineMat(rows(), cols()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) continue;
      for (std::size_t j = 0; j < c_.size(); ++j) out[i + j] += c_[j] * p[i];
    }
    return AffinePoly(std::move(out));
  }

  AffinePoly& operator+=(const AffinePoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), AffineMat(rows(), cols()));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  AffinePoly& operator+=(const AffineMat& o) {
    c_[0] += o;
    return *this;
  }
  AffinePoly& operator+=(const Mat& o) {
    c_[0] += o;
    return *this;
  }
  AffinePoly& operator*=(double s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

  friend AffinePoly operator+(AffinePoly a, const AffinePoly& b) { return a += b; }
  friend AffinePoly operator-(AffinePoly a, const AffinePoly& b) { return a += b * -1.0; }
  friend AffinePoly operator+(AffinePoly a, const AffineMat& b) { return a += b; }
  friend AffinePoly operator-(AffinePoly a, const AffineMat& b) { return a += b * -1.0; }
  friend AffinePoly operator+(AffinePoly a, const Mat& b) { return a += b; }
  friend AffinePoly operator-(AffinePoly a, const Mat& b) { return a += Mat(-b); }
  friend AffinePoly operator*(AffinePoly a, double s) { return a *= s; }
  friend AffinePoly operator*(double s, AffinePoly a) { return a *= s; }
  AffinePoly operator-() const { return *this * -1.0; }

  friend AffinePoly operator*(const Mat& l, const AffinePoly& p) {
    std::vector<AffineMat> out;
    for (const auto& c : p.c_) out.push_back(l * c);
    return AffinePoly(std::move(out));
  }
  friend AffinePoly operator*(const AffinePoly& p, const Mat& r) {
    std::vector<AffineMat> out;
    for (const auto& c : p.c_) out.push_back(c * r);
    return AffinePoly(std::move(out));
  }

  AffinePoly transpose() const {
    std::vector<AffineMat> out;
    for (const auto& c : c_) out.push_back(c.transpose());
    return AffinePoly(std::move(out));
  }
  AffinePoly he() const { return *this + transpose(); }

  static AffinePoly blocks(const std::vector<std::vector<AffinePoly>>& grid) {
    std::size_t len = 1;
    for (const auto& row : grid) {
      for (const auto& cell : row) len = std::max(len, cell.c_.size());
    }
    std::vector<AffineMat> out;
    for (std::size_t k = 0; k < len; ++k) {
      std::vector<std::vector<AffineMat>> g;
      for (const auto& row : grid) {
        std::vector<AffineMat> r;
        for (const auto& cell : row) {
          r.push_back(k < cell.c_.size() ? cell.c_[k] : AffineMat(cell.rows(), cell.cols()));
        }
        g.push_back(std::move(r));
      }
      out.push_back(AffineMat::blocks(g));
    }
    return AffinePoly(std::move(out));
  }

  PolyMat value(const Vec& x, bool symmetric) const {
    std::vector<Mat> m;
    for (const auto& c : c_) {
      Mat v = c.value(x);
      if (symmetric) v = sym_part(v);
      m.push_back(std::move(v));
    }
    return PolyMat(std::move(m), symmetric);
  }

 private:
  std::vector<AffineMat> c_;
};

/// Collects decision variables and constraints. Variable 0 is the margin t,
/// confined to [t_lo, t_hi].
class Program {
 public:
  explicit Program(double t_lo = -1.0, double t_hi = 1.0) {
    nvars_ = 1;
    sdp::Block cap;
    cap.size = 1;
    cap.name = "margin-cap";
    cap.constant = Mat::Constant(1, 1, t_hi);
    cap.terms.emplace_back(0, -Mat::Ones(1, 1));
    blocks_.push_back(cap);
    sdp::Block floor;
    floor.size = 1;
    floor.name = "margin-floor";
    floor.constant = Mat::Constant(1, 1, -t_lo);
    floor.terms.emplace_back(0, Mat::Ones(1, 1));
    blocks_.push_back(floor);
  }

  int nvars() const { return nvars_; }
  static constexpr int margin_var() { return 0; }

  /// t * I_n
  static AffineMat margin(Eigen::Index n) {
    return AffineMat::variable(0, Mat::Identity(n, n));
  }

  int add_scalar() { return nvars_++; }

  AffineMat add_symmetric(Eigen::Index n) {
    AffineMat out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        Mat e = Mat::Zero(n, n);
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        out += AffineMat::variable(add_scalar(), e);
      }
    }
    return out;
  }

  AffineMat add_matrix(Eigen::Index r, Eigen::Index c) {
    AffineMat out(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) {
        Mat e = Mat::Zero(r, c);
        e(i, j) = 1.0;
        out += AffineMat::variable(add_scalar(), e);
      }
    }
    return out;
  }

  /// m >= 0 (m must be symmetric in every coefficient).
  void require_psd(const AffineMat& m, const std::string& name) {
    if (m.rows() != m.cols()) throw DimensionError("require_psd: non-square expression");
    sdp::Block b;
    b.size = static_cast<int>(m.rows());
    b.name = name;
    b.constant = sym_part(m.constant());
    for (const auto& [v, f] : m.terms()) {
      if (!f.isZero(0.0)) b.terms.emplace_back(v, sym_part(f));
    }
    blocks_.push_back(std::move(b));
  }

  /// Every entry of m vanishes (upper triangle only when symmetric).
  void require_zero(const AffineMat& m, bool symmetric) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (symmetric && i > j) continue;
        sdp::Equality eq;
        eq.rhs = -m.constant()(i, j);
        for (const auto& [v, f] : m.terms()) {
          if (f(i, j) != 0.0) eq.coeffs.emplace_back(v, f(i, j));
        }
        if (eq.coeffs.empty()) {
          if (std::abs(eq.rhs) > 0.0) inconsistent_ = true;
          continue;
        }
        equalities_.push_back(std::move(eq));
      }
    }
  }

  /// A constant equality that cannot hold makes the whole program infeasible.
  bool trivially_infeasible() const { return inconsistent_; }

  sdp::Problem problem() const {
    sdp::Problem p;
    p.nvars = nvars_;
    p.blocks = blocks_;
    p.equalities = equalities_;
    p.objective = Vec::Zero(nvars_);
    p.objective(0) = 1.0;
    return p;
  }

  const std::vector<sdp::Block>& blocks() const { return blocks_; }

 private:
  int nvars_ = 0;
  bool inconsistent_ = false;
  std::vector<sdp::Block> blocks_;
  std::vector<sdp::Equality> equalities_;
};

/// Matrix function of tau on [0, length] made of polynomial pieces over
/// uniform breakpoints. Piece k is stored in the local variable
/// u = (tau - b_k) / h in [0, 1], which keeps coefficients well scaled.
class PolyUnknown {
 public:
  /// One polynomial piece of the given degree.
  static PolyUnknown polynomial(Program& prog, Eigen::Index rows, Eigen::Index cols,
                                bool symmetric, int degree, double length) {
    if (degree < 0) throw InputError("PolyUnknown: negative degree");
    PolyUnknown u(rows, cols, symmetric, length, 1);
    std::vector<AffineMat> c;
    for (int i = 0; i <= degree; ++i) c.push_back(u.fresh(prog));
    u.pieces_.emplace_back(std::move(c));
    return u;
  }

  /// Continuous piecewise-linear function with segments+1 vertex values.
  static PolyUnknown piecewise_linear(Program& prog, Eigen::Index rows, Eigen::Index cols,
                                      bool symmetric, int segments, double length) {
    if (segments < 1) throw InputError("PolyUnknown: need at least one segment");
    PolyUnknown u(rows, cols, symmetric, length, segments);
    std::vector<AffineMat> vertex;
    for (int k = 0; k <= segments; ++k) vertex.push_back(u.fresh(prog));
    for (int k = 0; k < segments; ++k) {
      u.pieces_.emplace_back(std::vector<AffineMat>{
          vertex[static_cast<std::size_t>(k)],
          vertex[static_cast<std::size_t>(k + 1)] - vertex[static_cast<std::size_t>(k)]});
    }
    return u;
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  double length() const { return length_; }
  std::size_t num_pieces() const { return pieces_.size(); }
  int degree() const { return pieces_.front().degree(); }
  std::vector<double> breaks() const {
    std::vector<double> b;
    for (std::size_t k = 0; k <= pieces_.size(); ++k) b.push_back(break_at(k));
    return b;
  }

  /// Breakpoints strictly inside (a, b).
  std::vector<double> interior_breaks(double a, double b) const {
    std::vector<double> out;
    for (std::size_t k = 1; k < pieces_.size(); ++k) {
      const double bk = break_at(k);
      if (bk > a + tol() && bk < b - tol()) out.push_back(bk);
    }
    return out;
  }

  /// Restriction to tau in [a, b] written in sigma in [0, 1]; [a, b] must lie
  /// in a single piece.
  AffinePoly on(double a, double b) const {
    const std::size_t k = piece_for(a, b);
    const double h = piece_width();
    return pieces_[k].reparametrize((b - a) / h, (a - break_at(k)) / h);
  }

  /// d/dtau of the function on [a, b], written in sigma in [0, 1].
  AffinePoly derivative_on(double a, double b) const {
    const std::size_t k = piece_for(a, b);
    const double h = piece_width();
    return (pieces_[k].derivative() * (1.0 / h)).reparametrize((b - a) / h, (a - break_at(k)) / h);
  }

  AffineMat at(double tau) const {
    std::size_t k = 0;
    while (k + 1 < pieces_.size() && tau >= break_at(k + 1) - tol()) ++k;
    return pieces_[k].at((tau - break_at(k)) / piece_width());
  }

  /// Numerical value as a piecewise polynomial in tau.
  PiecewisePolyMat value(const Vec& x) const {
    std::vector<PolyMat> pieces;
    const double h = piece_width();
    for (const auto& p : pieces_) {
      const PolyMat local = p.value(x, symmetric_);
      std::vector<Mat> c;
      for (int i = 0; i <= local.degree(); ++i) c.push_back(local.coeff(i) / std::pow(h, i));
      pieces.emplace_back(std::move(c), symmetric_);
    }
    return PiecewisePolyMat(breaks(), std::move(pieces));
  }

 private:
  PolyUnknown(Eigen::Index rows, Eigen::Index cols, bool symmetric, double length, int npieces)
      : rows_(rows), cols_(cols), symmetric_(symmetric), length_(length), npieces_(npieces) {
    if (!(length > 0.0) || !std::isfinite(length)) throw InputError("PolyUnknown: bad length");
    if (symmetric && rows != cols) throw DimensionError("PolyUnknown: symmetric must be square");
  }

  AffineMat fresh(Program& prog) const {
    return symmetric_ ? prog.add_symmetric(rows_) : prog.add_matrix(rows_, cols_);
  }

  double piece_width() const { return length_ / npieces_; }
  double break_at(std::size_t k) const {
    return k == static_cast<std::size_t>(npieces_) ? length_ : static_cast<double>(k) * piece_width();
  }
  double tol() const { return 1e-12 * std::max(1.0, length_); }

  std::size_t piece_for(double a, double b) const {
    if (a < -tol() || b > length_ + tol() || a > b) {
      throw InputError("PolyUnknown: interval outside the domain");
    }
    std::size_t k = 0;
    while (k + 1 < pieces_.size() && a >= break_at(k + 1) - tol()) ++k;
    if (b > break_at(k + 1) + tol()) throw EncodingError("PolyUnknown: interval spans several pieces");
    return k;
  }

  Eigen::Index rows_, cols_;
  bool symmetric_;
  double length_;
  int npieces_;
  std::vector<AffinePoly> pieces_;
};

}  // namespace dwell::lmi
