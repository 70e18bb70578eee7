#include "emdflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace emdflow::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ColState { basic, at_lower, at_upper, free_nb };

/// Bounded-variable two-phase revised primal simplex with a dense basis
/// inverse. Dantzig pricing with a Bland fallback after degenerate stalls;
/// deterministic tie-breaking throughout.
class Simplex {
 public:
  Simplex(SpMat A, Vec rhs, Vec lo, Vec up)
      : A_(std::move(A)), rhs_(std::move(rhs)), lo_(std::move(lo)), up_(std::move(up)) {
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
  }

  // Appends a column with entries rows/vals, bounds [l, u]. Returns its index.
  static SpMat with_columns(const SpMat& A, const std::vector<Eigen::Triplet<double>>& extra,
                            int extra_cols) {
    SpMat out(A.rows(), A.cols() + extra_cols);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(A.nonZeros() + extra.size());
    for (int k = 0; k < A.outerSize(); ++k) {
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (const auto& t : extra) trips.push_back(t);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  }

  SolveStatus run(const Vec& cost, Vec* solution, Vec* duals, int* pivots_out) {
    cost_ = cost;
    const double rhs_scale = 1.0 + (rhs_.size() ? rhs_.cwiseAbs().maxCoeff() : 0.0);

    setup_phase1();
    SolveStatus st = iterate(phase1_cost_);
    if (st != SolveStatus::optimal) return st == SolveStatus::unbounded ? SolveStatus::infeasible : st;
    if (phase1_objective() > 1e-8 * rhs_scale) return SolveStatus::infeasible;

    // Lock artificials to zero for phase 2.
    for (int j = art_begin_; j < n_; ++j) {
      lo_[j] = 0.0;
      up_[j] = 0.0;
      if (state_[j] == ColState::at_upper || state_[j] == ColState::free_nb) {
        state_[j] = ColState::at_lower;
      }
    }
    Vec c2 = Vec::Zero(n_);
    c2.head(cost_.size()) = cost_;
    st = iterate(c2);
    if (st != SolveStatus::optimal) return st;

    *solution = primal_values();
    *duals = duals_;
    *pivots_out = pivots_;
    return SolveStatus::optimal;
  }

  // Adds slack columns for the trailing `n_slack` rows and artificial columns
  // for all rows as needed; must be called through solve_lp_exact's builder.
  int art_begin_ = 0;

 private:
  void setup_phase1() {
    state_.assign(n_, ColState::at_lower);
    for (int j = 0; j < n_; ++j) {
      if (lo_[j] > -kInf) {
        state_[j] = ColState::at_lower;
      } else if (up_[j] < kInf) {
        state_[j] = ColState::at_upper;
      } else {
        state_[j] = ColState::free_nb;
      }
    }
    Vec resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      const double x = nonbasic_value(j);
      if (x != 0.0) {
        for (SpMat::InnerIterator it(A_, j); it; ++it) resid[it.row()] -= it.value() * x;
      }
    }
    // One artificial per row, signed so its value is nonnegative.
    std::vector<Eigen::Triplet<double>> extra;
    extra.reserve(m_);
    art_begin_ = n_;
    for (int r = 0; r < m_; ++r) {
      extra.emplace_back(r, n_ + r, resid[r] >= 0.0 ? 1.0 : -1.0);
    }
    A_ = with_columns(A_, extra, m_);
    lo_.conservativeResize(n_ + m_);
    up_.conservativeResize(n_ + m_);
    for (int r = 0; r < m_; ++r) {
      lo_[n_ + r] = 0.0;
      up_[n_ + r] = kInf;
    }
    n_ += m_;
    state_.resize(n_, ColState::basic);
    basic_.resize(m_);
    for (int r = 0; r < m_; ++r) basic_[r] = art_begin_ + r;

    phase1_cost_ = Vec::Zero(n_);
    for (int r = 0; r < m_; ++r) phase1_cost_[art_begin_ + r] = 1.0;

    binv_ = Mat::Identity(m_, m_);
    for (int r = 0; r < m_; ++r) {
      if (resid[r] < 0.0) binv_(r, r) = -1.0;  // inverse of signed artificial basis
    }
    xb_ = Vec(m_);
    for (int r = 0; r < m_; ++r) xb_[r] = std::abs(resid[r]);
    pivots_ = 0;
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case ColState::at_lower: return lo_[j] > -kInf ? lo_[j] : 0.0;
      case ColState::at_upper: return up_[j] < kInf ? up_[j] : 0.0;
      default: return 0.0;
    }
  }

  double phase1_objective() const {
    double s = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] >= art_begin_) s += xb_[r];
    }
    return s;
  }

  Vec primal_values() const {
    Vec x = Vec::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] != ColState::basic) x[j] = nonbasic_value(j);
    }
    for (int r = 0; r < m_; ++r) x[basic_[r]] = xb_[r];
    return x;
  }

  void refactorize() {
    Mat B(m_, m_);
    B.setZero();
    for (int r = 0; r < m_; ++r) {
      for (SpMat::InnerIterator it(A_, basic_[r]); it; ++it) B(it.row(), r) = it.value();
    }
    Eigen::PartialPivLU<Mat> lu(B);
    binv_ = lu.inverse();
    recompute_basics();
  }

  void recompute_basics() {
    Vec resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == ColState::basic) continue;
      const double x = nonbasic_value(j);
      if (x != 0.0) {
        for (SpMat::InnerIterator it(A_, j); it; ++it) resid[it.row()] -= it.value() * x;
      }
    }
    xb_ = binv_ * resid;
  }

  SolveStatus iterate(const Vec& c) {
    const double cost_scale = 1.0 + (c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
    const double tol_d = 1e-9 * cost_scale;
    const double tol_piv = 1e-10;
    int degen_run = 0;
    bool bland = false;
    const int max_pivots = 200000;

    for (int it_count = 0; it_count < max_pivots; ++it_count) {
      // Duals and pricing.
      Vec cb(m_);
      for (int r = 0; r < m_; ++r) cb[r] = c[basic_[r]];
      duals_ = binv_.transpose() * cb;

      int enter = -1, dir = 0;
      double best = tol_d;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == ColState::basic) continue;
        if (lo_[j] == up_[j] && lo_[j] == nonbasic_value(j) && state_[j] != ColState::free_nb) {
          continue;  // fixed variable
        }
        double dj = c[j];
        for (SpMat::InnerIterator a(A_, j); a; ++a) dj -= duals_[a.row()] * a.value();
        int cand_dir = 0;
        if (state_[j] == ColState::at_lower && dj < -tol_d) cand_dir = 1;
        else if (state_[j] == ColState::at_upper && dj > tol_d) cand_dir = -1;
        else if (state_[j] == ColState::free_nb && std::abs(dj) > tol_d) cand_dir = dj > 0 ? -1 : 1;
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return SolveStatus::optimal;

      // Direction through the basis.
      Vec w = Vec::Zero(m_);
      for (SpMat::InnerIterator a(A_, enter); a; ++a) w += binv_.col(a.row()) * a.value();

      // Ratio test.
      double t_star = kInf;
      int leave = -1;    // row index; -1 means bound flip of the entering column
      int leave_to = 0;  // -1 lower, +1 upper
      const double own_gap =
          (lo_[enter] > -kInf && up_[enter] < kInf) ? up_[enter] - lo_[enter]
          : (state_[enter] == ColState::free_nb
                 ? (dir > 0 ? up_[enter] : -lo_[enter])
                 : (dir > 0 ? up_[enter] - nonbasic_value(enter)
                            : nonbasic_value(enter) - lo_[enter]));
      if (own_gap < t_star) t_star = std::max(own_gap, 0.0);

      for (int r = 0; r < m_; ++r) {
        const double wr = dir * w[r];
        const int jb = basic_[r];
        double t = kInf;
        int to = 0;
        if (wr > tol_piv && lo_[jb] > -kInf) {
          t = (xb_[r] - lo_[jb]) / wr;
          to = -1;
        } else if (wr < -tol_piv && up_[jb] < kInf) {
          t = (xb_[r] - up_[jb]) / wr;
          to = 1;
        }
        if (t < -1e-9) t = 0.0;  // tolerate slight bound violations
        const double margin = t_star == kInf ? 0.0 : 1e-12 * (1.0 + t_star);
        if (t < t_star - margin) {
          t_star = std::max(t, 0.0);
          leave = r;
          leave_to = to;
        } else if (leave >= 0 && std::abs(t - t_star) <= 1e-12 * (1.0 + t_star)) {
          // Tie-break: larger pivot magnitude, then smaller variable index.
          if (std::abs(w[r]) > std::abs(w[leave]) + 1e-12 ||
              (std::abs(std::abs(w[r]) - std::abs(w[leave])) <= 1e-12 && jb < basic_[leave])) {
            leave = r;
            leave_to = to;
          }
        }
      }

      if (t_star == kInf) return SolveStatus::unbounded;

      degen_run = t_star <= 1e-11 ? degen_run + 1 : 0;
      if (degen_run > 100 + 2 * m_) bland = true;
      if (degen_run == 0) bland = false;

      if (leave < 0) {
        // Bound flip: entering moves across its box, basis unchanged.
        xb_ -= dir * t_star * w;
        state_[enter] = dir > 0 ? ColState::at_upper : ColState::at_lower;
        continue;
      }

      const double enter_value = nonbasic_value(enter) + dir * t_star;
      const int leaving_var = basic_[leave];
      xb_ -= dir * t_star * w;
      xb_[leave] = enter_value;
      state_[leaving_var] = leave_to > 0 ? ColState::at_upper : ColState::at_lower;
      state_[enter] = ColState::basic;
      basic_[leave] = enter;

      const double piv = w[leave];
      if (std::abs(piv) < 1e-12) {
        refactorize();
      } else {
        binv_.row(leave) /= piv;
        for (int r = 0; r < m_; ++r) {
          if (r != leave && w[r] != 0.0) binv_.row(r) -= w[r] * binv_.row(leave);
        }
      }
      ++pivots_;
      if (pivots_ % 128 == 0) refactorize();
    }
    return SolveStatus::max_iter;
  }

  SpMat A_;
  Vec rhs_, lo_, up_, cost_, phase1_cost_;
  std::vector<ColState> state_;
  std::vector<int> basic_;
  Mat binv_;
  Vec xb_;
  Vec duals_;
  int m_ = 0, n_ = 0, pivots_ = 0;
};

}  // namespace

SolveReport solve_lp_exact(const CompositeProgram& p, double tol) {
  p.validate();
  if (p.H.rows() > 0 || !p.groups.empty()) {
    throw std::invalid_argument("solve_lp_exact: program has quadratic or norm-group terms");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const int n = p.n;
  const int me = static_cast<int>(p.E.rows());
  const int mg = static_cast<int>(p.G.rows());

  SolveReport rep;
  for (int i = 0; i < n; ++i) {
    if (p.lower[i] > p.upper[i]) {
      rep.status = SolveStatus::infeasible;
      rep.v = Vec::Zero(n);
      rep.y = Vec::Zero(me + mg);
      return rep;
    }
  }

  // Linearize l1 terms: fold into the cost where the sign is fixed by the
  // bounds, otherwise split v_i = a - b with costs c_i + w and -c_i + w.
  std::vector<int> split_of(n, -1);
  int n_ext = n;
  Vec c_ext = p.c;
  Vec lo_ext = p.lower, up_ext = p.upper;
  std::vector<double> extra_c, extra_lo, extra_up;
  for (int i = 0; i < n; ++i) {
    const double w = p.l1_weights[i];
    if (w == 0.0) continue;
    if (p.lower[i] >= 0.0) {
      c_ext[i] += w;
    } else if (p.upper[i] <= 0.0) {
      c_ext[i] -= w;
    } else {
      split_of[i] = n_ext++;
      extra_c.push_back(-p.c[i] + w);
      extra_lo.push_back(0.0);
      extra_up.push_back(p.lower[i] > -kInf ? -p.lower[i] : kInf);
      c_ext[i] += w;
      lo_ext[i] = 0.0;  // the positive part
    }
  }

  // Rows: [E; G] with slacks on G rows.
  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&](const SpMat& M, int row0) {
    for (int k = 0; k < M.outerSize(); ++k) {
      for (SpMat::InnerIterator it(M, k); it; ++it) {
        trips.emplace_back(row0 + it.row(), it.col(), it.value());
        if (split_of[it.col()] >= 0) {
          trips.emplace_back(row0 + it.row(), split_of[it.col()], -it.value());
        }
      }
    }
  };
  add_block(p.E, 0);
  add_block(p.G, me);
  const int n_slack = mg;
  for (int r = 0; r < mg; ++r) trips.emplace_back(me + r, n_ext + r, 1.0);

  const int n_total = n_ext + n_slack;
  SpMat A(me + mg, n_total);
  A.setFromTriplets(trips.begin(), trips.end());
  Vec rhs(me + mg);
  rhs.head(me) = p.e;
  rhs.tail(mg) = p.h;

  Vec lo(n_total), up(n_total), cost(n_total);
  lo.head(n) = lo_ext;
  up.head(n) = up_ext;
  cost.head(n) = c_ext;
  for (int i = 0; i < n_ext - n; ++i) {
    lo[n + i] = extra_lo[i];
    up[n + i] = extra_up[i];
    cost[n + i] = extra_c[i];
  }
  for (int r = 0; r < n_slack; ++r) {
    lo[n_ext + r] = 0.0;
    up[n_ext + r] = kInf;
    cost[n_ext + r] = 0.0;
  }

  Simplex splx(A, rhs, lo, up);
  Vec x, y_simplex;
  int pivots = 0;
  const SolveStatus st = splx.run(cost, &x, &y_simplex, &pivots);
  rep.status = st;
  rep.iterations = pivots;
  if (st == SolveStatus::optimal) {
    rep.v = x.head(n);
    for (int i = 0; i < n; ++i) {
      if (split_of[i] >= 0) rep.v[i] -= x[split_of[i]];
    }
    rep.y = Vec(me + mg);
    rep.y.head(me) = -y_simplex.head(me);
    rep.y.tail(mg) = (-y_simplex.tail(mg)).cwiseMax(0.0);
    rep.objective = p.objective(rep.v);
    double primal = 0.0;
    if (me > 0) primal = (p.E * rep.v - p.e).cwiseAbs().maxCoeff();
    if (mg > 0) primal = std::max(primal, (p.G * rep.v - p.h).maxCoeff());
    const double rhs_scale = rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0;
    rep.primal_residual = std::max(primal, 0.0) / (1.0 + rhs_scale);
    rep.dual_residual = tol;
  } else {
    rep.v = Vec::Zero(n);
    rep.y = Vec::Zero(me + mg);
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace emdflow::solver
