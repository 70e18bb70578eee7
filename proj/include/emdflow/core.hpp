#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace emdflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Evenly spaced 1-D or 2-D support grid. Linear indices are row-major
/// over dims(), so for a [rows, cols] grid index = r * cols + c.
class GridGeometry {
 public:
  explicit GridGeometry(std::vector<int> dims, std::vector<double> spacing = {});

  int ndim() const { return static_cast<int>(dims_.size()); }
  int size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<double>& spacing() const { return spacing_; }

  /// Physical coordinates of cell i, respecting per-axis spacing.
  Vec coordinate(int i) const;
  std::vector<int> unflatten(int i) const;
  int flatten(const std::vector<int>& idx) const;

  bool operator==(const GridGeometry& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
  }

 private:
  std::vector<int> dims_;
  std::vector<double> spacing_;
  int size_ = 0;
};

/// Length-N elementwise-nonnegative vector over a grid.
class NonnegSignal {
 public:
  explicit NonnegSignal(Vec values);
  const Vec& values() const { return values_; }
  double mass() const { return values_.sum(); }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  Vec values_;
};

/// Four nonnegative component vectors (Re+, Re-, Im+, Im-) of a complex
/// vector. A split is disjoint when re_pos[i]*re_neg[i] = im_pos[i]*im_neg[i] = 0.
struct ComplexSplit {
  Vec re_pos, re_neg, im_pos, im_neg;
  int size() const { return static_cast<int>(re_pos.size()); }
};

/// Disjoint decomposition via a+ = max(a,0), a- = -min(a,0).
ComplexSplit canonical_split(const CVec& z);

/// Exact inverse of the split: (re+ - re-) + i(im+ - im-).
CVec recompose(const ComplexSplit& s);

/// Per-element magnitude proxy re+ + re- + im+ + im-. For disjoint splits
/// this lies in [|z|, sqrt(2)|z|] elementwise.
Vec l1_magnitude_proxy(const ComplexSplit& s);

class ComplexSignal {
 public:
  explicit ComplexSignal(CVec values) : values_(std::move(values)) {}
  const CVec& values() const { return values_; }
  ComplexSplit split() const { return canonical_split(values_); }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  CVec values_;
};

/// Dense linear observation operator plus measurement noise level.
struct MeasurementModel {
  CMat A;
  double noise_sigma = 0.0;

  bool is_real() const;
  Mat real_matrix() const;  // valid only when is_real()
  void validate() const;
};

/// Realified operator for the complex relaxation: A' = [A, -A, iA, -iA]
/// stacked as [Re A'; Im A'], shape 2M x 4N.
Mat realify_operator(const CMat& A);

/// Stacks a complex right-hand side as [Re y; Im y].
Vec realify_rhs(const CVec& y);

/// Tuning parameters shared by the tracker family.
struct TrackerConfig {
  double lambda = 0.1;  // l1 weight
  double gamma = 0.1;   // dynamics weight
  double mu = 0.01;     // slack reward; default chosen as 0.1 * lambda
  double xi = 1.0;      // RWL1 family numerator
  double beta = 1.0;    // RWL1 family estimate scaling
  double eta = 0.1;     // RWL1 family damping
  int q = 1;            // top-q dynamics
  int rwl1_iters = 3;   // reweighting iteration count

  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  int max_iters = 50000;

  void validate() const;
};

}  // namespace emdflow
