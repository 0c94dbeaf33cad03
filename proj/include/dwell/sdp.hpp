#pragma once

// Small dense semidefinite programming solver.
//
// Problem form (all blocks symmetric):
//
//   maximize   c' x
//   subject to F0_b + sum_i x_i F_ib  >= 0   for every block b
//              a_k' x = r_k                  for every equality k
//
// Equalities are eliminated up front (x = x0 + N y with N an orthonormal
// null-space basis), which leaves an LMI in y. That LMI is the dual of a
// standard-form SDP and is solved by an infeasible-start primal-dual
// path-following method with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"

namespace dwell::sdp {

struct Block {
  int size = 0;
  Mat constant;                            // F0
  std::vector<std::pair<int, Mat>> terms;  // (variable index, F_i)
  std::string name;
};

struct Equality {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
};

struct Problem {
  int nvars = 0;
  std::vector<Block> blocks;
  std::vector<Equality> equalities;
  Vec objective;  // maximized; empty means zero objective
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct Solution {
  Status status = Status::numerical_failure;
  Vec x;
  double objective = 0.0;       // c' x
  double dual_objective = 0.0;  // objective of the standard-form dual
  double gap = 0.0;             // |complementarity| at termination
  double primal_residual = 0.0; // max(0, -min eig of any block), max equality violation
  double dual_residual = 0.0;
  double min_block_eig = 0.0;   // smallest eigenvalue over all blocks at x
  int iterations = 0;
};

struct Options {
  double feas_tol = 1e-8;
  int max_iter = 200;
  double gap_tol = 1e-10;
  // Residual of the standard-form multiplier side. It only bounds the
  // optimal value from above, so it is checked more loosely.
  double bound_tol = 1e-6;
  bool verbose = false;  // per-iteration trace on stderr
};

namespace detail {

struct Reduced {
  Eigen::Index m = 0;
  std::vector<Mat> c;  // constant blocks
  std::vector<Mat> k;  // per block: (nb*nb x m), column j = vec(A_j), Z = C - sum y_j A_j
  Vec b;               // objective in y
  Vec x0;
  Mat null_basis;
  double offset = 0.0;
};

inline double frob_dot(const Mat& a, const Mat& b) {
  return (a.array() * b.array()).sum();
}

inline Eigen::Map<const Vec> vec_view(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvec(const Vec& v, Eigen::Index n) {
  return Eigen::Map<const Mat>(v.data(), n, n);
}

inline void validate(const Problem& p) {
  if (p.nvars < 0) throw InputError("sdp: negative variable count");
  if (p.objective.size() != 0 && p.objective.size() != p.nvars) {
    throw DimensionError("sdp: objective length differs from nvars");
  }
  for (const auto& blk : p.blocks) {
    if (blk.constant.rows() != blk.size || blk.constant.cols() != blk.size) {
      throw DimensionError("sdp: block '" + blk.name + "' constant has wrong size");
    }
    for (const auto& [var, f] : blk.terms) {
      if (var < 0 || var >= p.nvars) throw InputError("sdp: variable index out of range");
      if (f.rows() != blk.size || f.cols() != blk.size) {
        throw DimensionError("sdp: block '" + blk.name + "' term has wrong size");
      }
      const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
      if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InputError("sdp: block '" + blk.name + "' term is not symmetric");
      }
    }
  }
  for (const auto& eq : p.equalities) {
    for (const auto& [var, a] : eq.coeffs) {
      (void)a;
      if (var < 0 || var >= p.nvars) throw InputError("sdp: equality index out of range");
    }
  }
}

/// Eliminates equalities. Returns false when they are inconsistent.
inline bool reduce(const Problem& p, double feas_tol, Reduced& out) {
  const Eigen::Index nv = p.nvars;
  const Vec c = p.objective.size() ? p.objective : Vec::Zero(nv);

  if (p.equalities.empty()) {
    out.x0 = Vec::Zero(nv);
    out.null_basis = Mat::Identity(nv, nv);
  } else {
    const Eigen::Index ne = static_cast<Eigen::Index>(p.equalities.size());
    Mat aeq = Mat::Zero(ne, nv);
    Vec beq(ne);
    for (Eigen::Index k = 0; k < ne; ++k) {
      const auto& eq = p.equalities[static_cast<std::size_t>(k)];
      for (const auto& [var, a] : eq.coeffs) aeq(k, var) += a;
      beq(k) = eq.rhs;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(aeq.transpose());
    qr.setThreshold(1e-11);
    const Eigen::Index rank = qr.rank();
    // Particular solution from the same factorization: aeq = P R' Q'.
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(aeq);
    cod.setThreshold(1e-11);
    out.x0 = cod.solve(beq);
    const double resid = (aeq * out.x0 - beq).cwiseAbs().maxCoeff();
    if (resid > feas_tol * (1.0 + beq.cwiseAbs().maxCoeff())) return false;
    const Mat q = qr.householderQ() * Mat::Identity(nv, nv);
    out.null_basis = q.rightCols(nv - rank);
  }

  out.m = out.null_basis.cols();
  out.b = out.null_basis.transpose() * c;
  out.offset = c.dot(out.x0);
  out.c.clear();
  out.k.clear();
  for (const auto& blk : p.blocks) {
    Mat cb = blk.constant;
    Mat kb = Mat::Zero(static_cast<Eigen::Index>(blk.size) * blk.size, out.m);
    for (const auto& [var, f] : blk.terms) {
      cb += out.x0(var) * f;
      if (out.m > 0) kb.noalias() -= vec_view(f) * out.null_basis.row(var);
    }
    out.c.push_back(0.5 * (cb + cb.transpose()));
    out.k.push_back(std::move(kb));
  }
  return true;
}

inline Mat apply_adjoint(const Mat& kb, const Vec& y, Eigen::Index n) {
  if (y.size() == 0) return Mat::Zero(n, n);
  return unvec(kb * y, n);
}

/// Largest step alpha with V + alpha D >= 0 for diagonal V = diag(v).
inline double max_step(const Vec& v, const Mat& d) {
  const Vec s = v.cwiseSqrt().cwiseInverse();
  const Mat scaled = s.asDiagonal() * d * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (scaled + scaled.transpose()),
                                        Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct IpmResult {
  enum class Outcome { converged, diverged, stalled } outcome = Outcome::stalled;
  Vec y;
  std::vector<Mat> x;
  double pobj = 0.0;
  double dobj = 0.0;
  double gap = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  int iterations = 0;
};

inline double min_eig_blocks(const Reduced& r, const Vec& y) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < r.c.size(); ++b) {
    const Eigen::Index n = r.c[b].rows();
    Mat z = r.c[b] - apply_adjoint(r.k[b], y, n);
    z = 0.5 * (z + z.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(z, Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues()(0));
  }
  return worst;
}

inline IpmResult interior_point(const Reduced& r, const Options& opt) {
  const std::size_t nblocks = r.c.size();
  const Eigen::Index m = r.m;
  Eigen::Index ntot = 0;
  for (const auto& cb : r.c) ntot += cb.rows();

  IpmResult res;
  std::vector<Mat> x(nblocks), z(nblocks);
  Vec y = Vec::Zero(m);

  const double norm_b = r.b.norm();
  double norm_c = 0.0;
  for (const auto& cb : r.c) norm_c += cb.squaredNorm();
  norm_c = std::sqrt(norm_c);

  for (std::size_t b = 0; b < nblocks; ++b) {
    const Eigen::Index n = r.c[b].rows();
    double max_a = 0.0, ratio = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double na = r.k[b].col(j).norm();
      max_a = std::max(max_a, na);
      ratio = std::max(ratio, (1.0 + std::abs(r.b(j))) / (1.0 + na));
    }
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(n)), n * ratio});
    const double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), r.c[b].norm(), max_a});
    x[b] = xi * Mat::Identity(n, n);
    z[b] = eta * Mat::Identity(n, n);
  }

  std::vector<Mat> g(nblocks), ginv(nblocks), kt(nblocks), rdt(nblocks);
  std::vector<Vec> v(nblocks);

  double best_merit = std::numeric_limits<double>::infinity();
  double best_seen = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    res.iterations = iter;
    // Residuals.
    Vec ax = Vec::Zero(m);
    std::vector<Mat> rd(nblocks);
    double pobj = 0.0, xz = 0.0, rd_norm2 = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
      const Eigen::Index n = r.c[b].rows();
      if (m > 0) ax.noalias() += r.k[b].transpose() * vec_view(x[b]);
      rd[b] = r.c[b] - z[b] - apply_adjoint(r.k[b], y, n);
      rd_norm2 += rd[b].squaredNorm();
      pobj += frob_dot(r.c[b], x[b]);
      xz += frob_dot(x[b], z[b]);
    }
    const Vec rp = r.b - ax;
    const double dobj = r.b.dot(y);
    const double mu = xz / static_cast<double>(ntot);
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = std::sqrt(rd_norm2) / (1.0 + norm_c);
    const double relgap = std::abs(xz) / (1.0 + std::abs(pobj) + std::abs(dobj));

    // Scaled distance to the stopping test; the best iterate is what a
    // stalled run returns.
    const double merit = std::max({relgap / opt.gap_tol, pinf / opt.bound_tol, dinf / opt.feas_tol});
    if (merit < best_seen) {
      best_seen = merit;
      res.y = y;
      res.x = x;
      res.pobj = pobj;
      res.dobj = dobj;
      res.gap = xz;
      res.pinf = pinf;
      res.dinf = dinf;
    }

    if (opt.verbose) {
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e gap %.2e pinf %.2e dinf %.2e\n", iter,
                   pobj, dobj, relgap, pinf, dinf);
    }
    if (relgap <= opt.gap_tol && pinf <= opt.bound_tol && dinf <= opt.feas_tol) {
      res.outcome = IpmResult::Outcome::converged;
      return res;
    }
    if (iter == opt.max_iter) break;

    double xmax = 0.0;
    for (const auto& xb : x) xmax = std::max(xmax, xb.cwiseAbs().maxCoeff());
    if (xmax > 1e13 || (m > 0 && y.cwiseAbs().maxCoeff() > 1e13)) {
      res.outcome = IpmResult::Outcome::diverged;
      res.y = y;
      res.dobj = dobj;
      return res;
    }

    if (merit < 0.5 * best_merit) {
      best_merit = merit;
      since_best = 0;
    } else if (++since_best > 30) {
      break;
    }

    // Nesterov-Todd scaling per block: G' Z G = V = G^{-1} X G^{-T}.
    bool ok = true;
    Mat schur = Mat::Zero(m, m);
    for (std::size_t b = 0; b < nblocks && ok; ++b) {
      const Eigen::Index n = r.c[b].rows();
      Eigen::LLT<Mat> lx(x[b]), lz(z[b]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        ok = false;
        break;
      }
      const Mat lxm = lx.matrixL();
      const Mat lzm = lz.matrixL();
      Eigen::JacobiSVD<Mat> svd(lzm.transpose() * lxm, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec s = svd.singularValues();
      if (s.minCoeff() <= 0.0) {
        ok = false;
        break;
      }
      v[b] = s;
      g[b] = lxm * svd.matrixV() * s.cwiseSqrt().cwiseInverse().asDiagonal();
      const Mat lx_inv = lxm.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
      ginv[b] = s.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * lx_inv;

      kt[b].resize(n * n, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const Mat aj = unvec(r.k[b].col(j), n);
        const Mat at = g[b].transpose() * aj * g[b];
        kt[b].col(j) = vec_view(at);
      }
      if (m > 0) schur.noalias() += kt[b].transpose() * kt[b];
      rdt[b] = g[b].transpose() * rd[b] * g[b];
    }
    if (!ok) break;

    Eigen::LLT<Mat> chol;
    Eigen::LDLT<Mat> ldlt;
    bool use_ldlt = false;
    if (m > 0) {
      chol.compute(schur);
      if (chol.info() != Eigen::Success) {
        const double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        ldlt.compute(schur + reg * Mat::Identity(m, m));
        if (ldlt.info() != Eigen::Success) break;
        use_ldlt = true;
      }
    }
    auto solve_schur = [&](const Vec& rhs) -> Vec {
      if (m == 0) return Vec();
      return use_ldlt ? Vec(ldlt.solve(rhs)) : Vec(chol.solve(rhs));
    };

    // Solves for a direction given the scaled complementarity target rc.
    std::vector<Mat> dxt(nblocks), dzt(nblocks);
    Vec dy;
    auto direction = [&](const std::vector<Mat>& rc) {
      std::vector<Mat> h(nblocks);
      Vec rhs = rp;
      for (std::size_t b = 0; b < nblocks; ++b) {
        const Eigen::Index n = r.c[b].rows();
        h[b].resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            h[b](i, j) = 2.0 * rc[b](i, j) / (v[b](i) + v[b](j));
          }
        }
        const Mat t = h[b] - rdt[b];
        if (m > 0) rhs.noalias() -= kt[b].transpose() * vec_view(t);
      }
      dy = solve_schur(rhs);
      for (std::size_t b = 0; b < nblocks; ++b) {
        const Eigen::Index n = r.c[b].rows();
        dzt[b] = rdt[b] - apply_adjoint(kt[b], dy, n);
        dzt[b] = 0.5 * (dzt[b] + dzt[b].transpose());
        dxt[b] = h[b] - dzt[b];
        dxt[b] = 0.5 * (dxt[b] + dxt[b].transpose());
      }
    };
    auto step_lengths = [&](double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t b = 0; b < nblocks; ++b) {
        ap = std::min(ap, max_step(v[b], dxt[b]));
        ad = std::min(ad, max_step(v[b], dzt[b]));
      }
    };

    // Predictor.
    std::vector<Mat> rc(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
      rc[b] = Mat(Vec(-v[b].cwiseAbs2()).asDiagonal());
    }
    direction(rc);
    double ap = 0.0, ad = 0.0;
    step_lengths(ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
      const Mat xa = Mat(v[b].asDiagonal()) + ap * dxt[b];
      const Mat za = Mat(v[b].asDiagonal()) + ad * dzt[b];
      xz_aff += frob_dot(xa, za);
    }
    const double mu_aff = xz_aff / static_cast<double>(ntot);
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);
    const double gamma = 0.9 + 0.09 * std::min(ap, ad);

    // Corrector.
    for (std::size_t b = 0; b < nblocks; ++b) {
      const Eigen::Index n = r.c[b].rows();
      const Mat cross = dxt[b] * dzt[b];
      rc[b] = sigma * mu * Mat::Identity(n, n) - Mat(v[b].cwiseAbs2().asDiagonal()) -
              0.5 * (cross + cross.transpose());
    }
    direction(rc);
    step_lengths(ap, ad);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    for (std::size_t b = 0; b < nblocks; ++b) {
      Mat dx = g[b] * dxt[b] * g[b].transpose();
      Mat dz = ginv[b].transpose() * dzt[b] * ginv[b];
      x[b] += ap * dx;
      z[b] += ad * dz;
      x[b] = 0.5 * (x[b] + x[b].transpose());
      z[b] = 0.5 * (z[b] + z[b].transpose());
    }
    if (m > 0) y += ad * dy;
  }
  res.outcome = IpmResult::Outcome::stalled;
  return res;
}

/// max s  s.t.  C - sum y_j A_j - s I >= 0,  s <= 1.
inline double phase_one(const Reduced& r, const Options& opt) {
  Reduced p1;
  p1.m = r.m + 1;
  p1.b = Vec::Zero(p1.m);
  p1.b(r.m) = 1.0;
  for (std::size_t b = 0; b < r.c.size(); ++b) {
    const Eigen::Index n = r.c[b].rows();
    p1.c.push_back(r.c[b]);
    Mat kb(n * n, p1.m);
    kb.leftCols(r.m) = r.k[b];
    const Mat ident = Mat::Identity(n, n);
    kb.col(r.m) = vec_view(ident);
    p1.k.push_back(std::move(kb));
  }
  p1.c.push_back(Mat::Ones(1, 1));
  Mat cap = Mat::Zero(1, p1.m);
  cap(0, r.m) = 1.0;
  p1.k.push_back(cap);
  const IpmResult res = interior_point(p1, opt);
  return res.y(r.m);
}

}  // namespace detail

/// Solves the problem. Never reports `optimal` unless every block of the
/// returned x has minimum eigenvalue >= -feas_tol and every equality holds to
/// feas_tol.
inline Solution solve(const Problem& p, const Options& opt = {}) {
  if (!(opt.feas_tol > 0.0)) throw InputError("sdp::solve: feas_tol must be positive");
  detail::validate(p);

  Solution sol;
  detail::Reduced r;
  if (!detail::reduce(p, opt.feas_tol, r)) {
    sol.status = Status::infeasible;
    sol.x = r.x0;
    return sol;
  }

  auto finish = [&](const Vec& y) {
    sol.x = r.x0 + (r.m > 0 ? Vec(r.null_basis * y) : Vec::Zero(p.nvars));
    const Vec c = p.objective.size() ? p.objective : Vec::Zero(p.nvars);
    sol.objective = c.dot(sol.x);
    double worst_eig = std::numeric_limits<double>::infinity();
    for (const auto& blk : p.blocks) {
      Mat f = blk.constant;
      for (const auto& [var, fi] : blk.terms) f += sol.x(var) * fi;
      worst_eig = std::min(worst_eig, min_eig_sym(sym_part(f)));
    }
    double worst_eq = 0.0;
    for (const auto& eq : p.equalities) {
      double lhs = 0.0;
      for (const auto& [var, a] : eq.coeffs) lhs += a * sol.x(var);
      worst_eq = std::max(worst_eq, std::abs(lhs - eq.rhs));
    }
    if (p.blocks.empty()) worst_eig = 0.0;
    sol.min_block_eig = worst_eig;
    sol.primal_residual = std::max(std::max(0.0, -worst_eig), worst_eq);
  };

  if (r.m == 0) {
    finish(Vec());
    sol.status = sol.primal_residual <= opt.feas_tol ? Status::optimal : Status::infeasible;
    return sol;
  }

  const detail::IpmResult res = detail::interior_point(r, opt);
  sol.iterations = res.iterations;
  sol.gap = std::abs(res.gap);
  sol.dual_objective = res.pobj + r.offset;
  sol.dual_residual = res.pinf;
  finish(res.y);

  if (res.outcome == detail::IpmResult::Outcome::converged &&
      sol.primal_residual <= opt.feas_tol) {
    sol.status = Status::optimal;
    return sol;
  }
  // A stalled run that still meets the tolerances at reduced gap accuracy.
  if (res.outcome == detail::IpmResult::Outcome::stalled &&
      sol.primal_residual <= opt.feas_tol && res.pinf <= opt.bound_tol &&
      std::abs(res.gap) / (1.0 + std::abs(res.pobj) + std::abs(res.dobj)) <= 1e-6) {
    sol.status = Status::optimal;
    return sol;
  }

  // Classify the failure: a negative phase-one optimum certifies emptiness.
  const double s_star = detail::phase_one(r, opt);
  if (s_star < -opt.feas_tol) {
    sol.status = Status::infeasible;
  } else if (res.outcome == detail::IpmResult::Outcome::diverged && res.dobj > 1e8) {
    sol.status = Status::unbounded;
  } else {
    sol.status = Status::numerical_failure;
  }
  return sol;
}

struct MarginResult {
  double t_star = -std::numeric_limits<double>::infinity();
  Vec x;
  Solution solution;
};

/// Maximizes the designated margin variable. The problem must bound it from
/// above (the callers add t <= 1). An infeasible program yields t* = -inf.
inline MarginResult max_margin(Problem p, int margin_var = 0, const Options& opt = {}) {
  if (margin_var < 0 || margin_var >= p.nvars) throw InputError("max_margin: bad margin index");
  p.objective = Vec::Zero(p.nvars);
  p.objective(margin_var) = 1.0;
  MarginResult out;
  out.solution = solve(p, opt);
  out.x = out.solution.x;
  switch (out.solution.status) {
    case Status::optimal:
      // Any residual block violation is charged against the margin.
      out.t_star = out.solution.x(margin_var) + std::min(0.0, out.solution.min_block_eig);
      break;
    case Status::infeasible:
      break;
    case Status::unbounded:
      throw NumericalFailure("max_margin: margin variable is unbounded");
    case Status::numerical_failure:
      throw NumericalFailure("max_margin: solver did not converge");
  }
  return out;
}

/// Sparse text dump: "block row col var value" (var 0 is the constant term,
/// var i+1 is x_i, upper triangle only), then "eq k var value rhs" rows and
/// "obj var value" rows.
inline void write_sparse(const Problem& p, std::ostream& os) {
  os << "# nvars " << p.nvars << " blocks " << p.blocks.size() << " equalities "
     << p.equalities.size() << "\n";
  os.precision(17);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    auto emit = [&](int var, const Mat& f) {
      for (int i = 0; i < blk.size; ++i) {
        for (int j = i; j < blk.size; ++j) {
          if (f(i, j) != 0.0) os << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << var << ' ' << f(i, j) << "\n";
        }
      }
    };
    emit(0, blk.constant);
    for (const auto& [var, f] : blk.terms) emit(var + 1, f);
  }
  for (std::size_t k = 0; k < p.equalities.size(); ++k) {
    for (const auto& [var, a] : p.equalities[k].coeffs) {
      os << "eq " << k + 1 << ' ' << var + 1 << ' ' << a << ' ' << p.equalities[k].rhs << "\n";
    }
  }
  for (Eigen::Index i = 0; i < p.objective.size(); ++i) {
    if (p.objective(i) != 0.0) os << "obj " << i + 1 << ' ' << p.objective(i) << "\n";
  }
}

}  // namespace dwell::sdp
