#include "emdflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emdflow::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Largest singular value via power iteration on A'A. The start vector is a
/// fixed pseudo-random fill; structured starts (e.g. all-ones) can lie in the
/// null space of realified operators.
double operator_norm(const SpMat& A, int iters = 60) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  Vec v(A.cols());
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  v /= v.norm();
  double lam = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = A.transpose() * (A * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    lam = nw;
    v = w / nw;
  }
  return std::sqrt(lam) * 1.02;  // safety margin against under-estimation
}

SpMat vstack(const SpMat& top, const SpMat& bottom, int cols) {
  SpMat out(top.rows() + bottom.rows(), cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(top.nonZeros() + bottom.nonZeros());
  for (int k = 0; k < top.outerSize(); ++k) {
    for (SpMat::InnerIterator it(top, k); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int k = 0; k < bottom.outerSize(); ++k) {
    for (SpMat::InnerIterator it(bottom, k); it; ++it) {
      trips.emplace_back(top.rows() + it.row(), it.col(), it.value());
    }
  }
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

CompositeProgram CompositeProgram::sized(int n_vars) {
  CompositeProgram p;
  p.n = n_vars;
  p.c = Vec::Zero(n_vars);
  p.l1_weights = Vec::Zero(n_vars);
  p.lower = Vec::Constant(n_vars, -kInf);
  p.upper = Vec::Constant(n_vars, kInf);
  p.H.resize(0, n_vars);
  p.E.resize(0, n_vars);
  p.G.resize(0, n_vars);
  p.b.resize(0);
  p.e.resize(0);
  p.h.resize(0);
  return p;
}

void CompositeProgram::validate() const {
  if (n <= 0) throw std::invalid_argument("CompositeProgram: empty variable space");
  auto check_cols = [&](const SpMat& m, const char* name) {
    if (m.rows() > 0 && m.cols() != n) {
      throw std::invalid_argument(std::string("CompositeProgram: ") + name + " column mismatch");
    }
  };
  check_cols(H, "H");
  check_cols(E, "E");
  check_cols(G, "G");
  if (H.rows() != b.size()) throw std::invalid_argument("CompositeProgram: H/b mismatch");
  if (E.rows() != e.size()) throw std::invalid_argument("CompositeProgram: E/e mismatch");
  if (G.rows() != h.size()) throw std::invalid_argument("CompositeProgram: G/h mismatch");
  if (c.size() != n || l1_weights.size() != n || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("CompositeProgram: vector field size mismatch");
  }
  if (l1_weights.size() && l1_weights.minCoeff() < 0.0) {
    throw std::invalid_argument("CompositeProgram: negative l1 weight");
  }
  std::vector<char> in_group(n, 0);
  for (const auto& g : groups) {
    if (g.weight < 0.0) throw std::invalid_argument("CompositeProgram: negative group weight");
    for (int i : g.index) {
      if (i < 0 || i >= n) throw std::invalid_argument("CompositeProgram: group index out of range");
      if (in_group[i]) throw std::invalid_argument("CompositeProgram: overlapping norm groups");
      in_group[i] = 1;
      if (l1_weights[i] != 0.0) {
        throw std::invalid_argument("CompositeProgram: group member carries l1 weight");
      }
      if (!(lower[i] == -kInf && upper[i] == kInf)) {
        throw std::invalid_argument("CompositeProgram: group member must be unbounded");
      }
    }
  }
}

double CompositeProgram::objective(const Vec& v) const {
  double obj = c.dot(v);
  if (H.rows() > 0) obj += 0.5 * (b - H * v).squaredNorm();
  for (int i = 0; i < n; ++i) obj += l1_weights[i] * std::abs(v[i]);
  for (const auto& g : groups) {
    double s = 0.0;
    for (int i : g.index) s += v[i] * v[i];
    obj += g.weight * std::sqrt(s);
  }
  return obj;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

ReportRecord compile_report(const SolveReport& r) {
  return ReportRecord{to_string(r.status), r.objective,      r.primal_residual,
                      r.dual_residual,     r.iterations,     r.wall_time_s};
}

SolveReport solve(const CompositeProgram& p, const SolverOptions& opt) {
  p.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = p.n;

  SolveReport rep;
  // Statically infeasible box.
  for (int i = 0; i < n; ++i) {
    if (p.lower[i] > p.upper[i]) {
      rep.status = SolveStatus::infeasible;
      rep.v = Vec::Zero(n);
      rep.y = Vec::Zero(p.E.rows() + p.G.rows());
      return rep;
    }
  }

  const int me = static_cast<int>(p.E.rows());
  const int mg = static_cast<int>(p.G.rows());
  const int m = me + mg;

  SpMat K = vstack(p.E, p.G, n);
  Vec rhs(m);
  rhs.head(me) = p.e;
  rhs.tail(mg) = p.h;

  // Row equilibration of the constraint block.
  Vec d = Vec::Ones(m);
  {
    Vec row_norm = Vec::Zero(m);
    for (int k = 0; k < K.outerSize(); ++k) {
      for (SpMat::InnerIterator it(K, k); it; ++it) row_norm[it.row()] += it.value() * it.value();
    }
    for (int r = 0; r < m; ++r) {
      const double nr = std::sqrt(row_norm[r]);
      d[r] = nr > 1e-12 ? 1.0 / nr : 1.0;
    }
    for (int k = 0; k < K.outerSize(); ++k) {
      for (SpMat::InnerIterator it(K, k); it; ++it) it.valueRef() *= d[it.row()];
    }
    rhs.array() *= d.array();
  }

  const double kn = operator_norm(K);
  const double hn = operator_norm(p.H);
  const double lips = hn * hn;
  const double r_scale = opt.dual_scale;
  double sigma = kn > 0.0 ? r_scale / kn : 1.0;
  double tau = 0.99 / (lips / 2.0 + sigma * kn * kn + 1e-12);
  tau = std::min(tau, 1e8);

  // Per-variable prox classification.
  std::vector<int> group_of(n, -1);
  for (size_t g = 0; g < p.groups.size(); ++g) {
    for (int i : p.groups[g].index) group_of[i] = static_cast<int>(g);
  }

  Vec v = opt.warm_v && opt.warm_v->size() == n ? *opt.warm_v : Vec::Zero(n);
  for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i], p.lower[i], p.upper[i]);
  Vec yt = Vec::Zero(m);
  if (opt.warm_y && opt.warm_y->size() == m) {
    yt = *opt.warm_y;
    yt.array() /= d.array().max(1e-300);  // original -> scaled duals
    for (int r = me; r < m; ++r) yt[r] = std::max(yt[r], 0.0);
  }

  const bool has_h = p.H.rows() > 0;
  Vec hv = has_h ? Vec(p.H * v) : Vec();
  Vec qg = has_h ? Vec(p.H.transpose() * (hv - p.b) + p.c) : p.c;
  Vec kty = m > 0 ? Vec(K.transpose() * yt) : Vec::Zero(n);
  Vec kv = m > 0 ? Vec(K * v) : Vec();

  const double rhs_inf = inf_norm(rhs.size() ? Vec(rhs.array() / d.array()) : rhs);

  auto prox = [&](const Vec& z) {
    Vec out(n);
    for (int i = 0; i < n; ++i) {
      if (group_of[i] >= 0) {
        out[i] = z[i];  // handled per group below
        continue;
      }
      const double w = tau * p.l1_weights[i];
      double s = z[i];
      if (w > 0.0) s = s > w ? s - w : (s < -w ? s + w : 0.0);
      out[i] = std::clamp(s, p.lower[i], p.upper[i]);
    }
    for (const auto& g : p.groups) {
      double nrm = 0.0;
      for (int i : g.index) nrm += z[i] * z[i];
      nrm = std::sqrt(nrm);
      const double t = tau * g.weight;
      const double scale = nrm > t ? 1.0 - t / nrm : 0.0;
      for (int i : g.index) out[i] = scale * z[i];
    }
    return out;
  };

  rep.status = SolveStatus::max_iter;
  double best_primal = kInf;
  double primal_milestone = kInf;
  int iter = 0;
  if (opt.record_merit) rep.merit.reserve(1024);

  for (iter = 1; iter <= opt.max_iters; ++iter) {
    const Vec grad = qg + kty;
    const Vec vplus = prox(v - tau * grad);
    Vec kvplus = m > 0 ? Vec(K * vplus) : Vec();
    Vec ytplus = yt;
    if (m > 0) {
      const Vec yhat = yt + sigma * (2.0 * kvplus - kv);
      for (int r = 0; r < me; ++r) ytplus[r] = yhat[r] - sigma * rhs[r];
      for (int r = me; r < m; ++r) ytplus[r] = std::max(yhat[r] - sigma * rhs[r], 0.0);
    }
    const Vec hvplus = has_h ? Vec(p.H * vplus) : Vec();
    const Vec qgplus = has_h ? Vec(p.H.transpose() * (hvplus - p.b) + p.c) : p.c;
    const Vec ktyplus = m > 0 ? Vec(K.transpose() * ytplus) : Vec::Zero(n);

    if (opt.record_merit) {
      const Vec dv = vplus - v;
      double msq = dv.squaredNorm() / tau;
      if (m > 0) {
        const Vec dy = ytplus - yt;
        const Vec kdv = kvplus - kv;
        msq += dy.squaredNorm() / sigma - 2.0 * dy.dot(kdv);
      }
      rep.merit.push_back(std::sqrt(std::max(msq, 0.0)));
    }

    // Optimality residuals at (vplus, ytplus); all ingredients are cached.
    double primal_abs = 0.0, kv_inf = 0.0;
    if (m > 0) {
      for (int r = 0; r < m; ++r) {
        const double row = kvplus[r] / d[r];
        kv_inf = std::max(kv_inf, std::abs(row));
        const double viol = (kvplus[r] - rhs[r]) / d[r];
        primal_abs = std::max(primal_abs, r < me ? std::abs(viol) : std::max(viol, 0.0));
      }
    }
    const double st_abs = inf_norm(Vec((v - vplus) / tau + qgplus - qg + ktyplus - kty));
    double dualside = 0.0;
    if (m > 0) {
      dualside = inf_norm(Vec((ytplus - yt) / sigma - (kvplus - kv)));
    }
    const double primal_rel = primal_abs / (1.0 + std::max(rhs_inf, kv_inf));
    const double grad_scale = 1.0 + inf_norm(qgplus) + inf_norm(ktyplus);
    const double dual_rel = std::max(st_abs, dualside) / grad_scale;

    v = vplus;
    kv = std::move(kvplus);
    yt = std::move(ytplus);
    hv = hvplus;
    qg = qgplus;
    kty = ktyplus;

    rep.primal_residual = primal_rel;
    rep.dual_residual = dual_rel;

    if (primal_rel <= opt.primal_tol && dual_rel <= opt.dual_tol) {
      rep.status = SolveStatus::optimal;
      break;
    }
    if (inf_norm(v) > 1e10) {
      rep.status = SolveStatus::unbounded;
      break;
    }
    best_primal = std::min(best_primal, primal_abs);
    if (iter % 5000 == 0) {
      const double y_inf = inf_norm(yt);
      if (primal_abs > 1e3 * opt.primal_tol && primal_abs > 0.9 * primal_milestone &&
          y_inf > 1e9) {
        rep.status = SolveStatus::infeasible;
        break;
      }
      primal_milestone = primal_abs;
    }
  }

  rep.iterations = std::min(iter, opt.max_iters);
  rep.v = v;
  rep.y = Vec(yt.array() * d.array());  // scaled -> original duals
  rep.objective = p.objective(v);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

KktResiduals kkt_residuals(const CompositeProgram& p, const Vec& v, const Vec& y) {
  p.validate();
  const int n = p.n;
  const int me = static_cast<int>(p.E.rows());
  const int mg = static_cast<int>(p.G.rows());
  KktResiduals res;

  Vec grad = p.c;
  if (p.H.rows() > 0) grad += p.H.transpose() * (p.H * v - p.b);
  if (me > 0) grad += p.E.transpose() * y.head(me);
  if (mg > 0) grad += p.G.transpose() * y.tail(mg);

  std::vector<int> group_of(n, -1);
  for (size_t g = 0; g < p.groups.size(); ++g) {
    for (int i : p.groups[g].index) group_of[i] = static_cast<int>(g);
  }

  // Prox fixed-point residual with unit step for l1/bound variables.
  double st = 0.0;
  for (int i = 0; i < n; ++i) {
    if (group_of[i] >= 0) continue;
    const double z = v[i] - grad[i];
    const double w = p.l1_weights[i];
    double s = z;
    if (w > 0.0) s = z > w ? z - w : (z < -w ? z + w : 0.0);
    s = std::clamp(s, p.lower[i], p.upper[i]);
    st = std::max(st, std::abs(v[i] - s));
  }
  // Dual-norm condition on zero groups, gradient alignment on active ones.
  for (const auto& g : p.groups) {
    double vn = 0.0, gn = 0.0;
    for (int i : g.index) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    if (vn > 1e-10) {
      for (int i : g.index) {
        const double r = grad[i] + g.weight * v[i] / vn;
        gn = std::max(gn, std::abs(r));
      }
      st = std::max(st, gn);
    } else {
      double sub = 0.0;
      for (int i : g.index) sub += grad[i] * grad[i];
      st = std::max(st, std::max(std::sqrt(sub) - g.weight, 0.0));
    }
  }
  double grad_scale = 1.0 + inf_norm(grad);
  res.stationarity = st / grad_scale;

  double primal = 0.0;
  if (me > 0) primal = inf_norm(Vec(p.E * v - p.e));
  if (mg > 0) {
    const Vec gv = p.G * v - p.h;
    primal = std::max(primal, gv.maxCoeff() > 0 ? gv.maxCoeff() : 0.0);
  }
  for (int i = 0; i < n; ++i) {
    if (p.lower[i] > -kInf) primal = std::max(primal, p.lower[i] - v[i]);
    if (p.upper[i] < kInf) primal = std::max(primal, v[i] - p.upper[i]);
  }
  res.primal = primal / (1.0 + inf_norm(v));

  if (mg > 0) {
    const Vec yg = y.tail(mg);
    res.dual_sign = std::max(-yg.minCoeff(), 0.0) / (1.0 + inf_norm(yg));
    const Vec gv = p.G * v - p.h;
    res.complementarity = std::abs(yg.dot(gv)) / (1.0 + inf_norm(yg) * (1.0 + inf_norm(gv)));
  }
  return res;
}

double KktResiduals::max_all() const {
  return std::max(std::max(stationarity, primal), std::max(dual_sign, complementarity));
}

}  // namespace emdflow::solver
