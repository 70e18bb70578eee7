#include "emdflow/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emdflow {

GridGeometry::GridGeometry(std::vector<int> dims, std::vector<double> spacing)
    : dims_(std::move(dims)), spacing_(std::move(spacing)) {
  if (dims_.empty() || dims_.size() > 2) {
    throw std::invalid_argument("GridGeometry: dims must have 1 or 2 axes");
  }
  if (spacing_.empty()) {
    spacing_.assign(dims_.size(), 1.0);
  }
  if (spacing_.size() != dims_.size()) {
    throw std::invalid_argument("GridGeometry: spacing size must match dims");
  }
  size_ = 1;
  for (size_t a = 0; a < dims_.size(); ++a) {
    if (dims_[a] < 1) throw std::invalid_argument("GridGeometry: axis length must be >= 1");
    if (!(spacing_[a] > 0.0)) throw std::invalid_argument("GridGeometry: spacing must be positive");
    size_ *= dims_[a];
  }
}

std::vector<int> GridGeometry::unflatten(int i) const {
  if (i < 0 || i >= size_) throw std::out_of_range("GridGeometry: index out of range");
  std::vector<int> idx(dims_.size());
  for (int a = static_cast<int>(dims_.size()) - 1; a >= 0; --a) {
    idx[a] = i % dims_[a];
    i /= dims_[a];
  }
  return idx;
}

int GridGeometry::flatten(const std::vector<int>& idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("GridGeometry: index rank mismatch");
  int lin = 0;
  for (size_t a = 0; a < dims_.size(); ++a) {
    if (idx[a] < 0 || idx[a] >= dims_[a]) throw std::out_of_range("GridGeometry: index out of range");
    lin = lin * dims_[a] + idx[a];
  }
  return lin;
}

Vec GridGeometry::coordinate(int i) const {
  const std::vector<int> idx = unflatten(i);
  Vec c(ndim());
  for (int a = 0; a < ndim(); ++a) c[a] = idx[a] * spacing_[a];
  return c;
}

NonnegSignal::NonnegSignal(Vec values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) {
      throw std::invalid_argument("NonnegSignal: entry " + std::to_string(i) + " is negative");
    }
  }
}

ComplexSplit canonical_split(const CVec& z) {
  const Eigen::Index n = z.size();
  ComplexSplit s{Vec(n), Vec(n), Vec(n), Vec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = z[i].real();
    const double im = z[i].imag();
    s.re_pos[i] = std::max(re, 0.0);
    s.re_neg[i] = -std::min(re, 0.0);
    s.im_pos[i] = std::max(im, 0.0);
    s.im_neg[i] = -std::min(im, 0.0);
  }
  return s;
}

CVec recompose(const ComplexSplit& s) {
  const Eigen::Index n = s.re_pos.size();
  CVec z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = std::complex<double>(s.re_pos[i] - s.re_neg[i], s.im_pos[i] - s.im_neg[i]);
  }
  return z;
}

Vec l1_magnitude_proxy(const ComplexSplit& s) {
  return s.re_pos + s.re_neg + s.im_pos + s.im_neg;
}

bool MeasurementModel::is_real() const {
  return A.imag().cwiseAbs().maxCoeff() == 0.0;
}

Mat MeasurementModel::real_matrix() const {
  if (!is_real()) throw std::logic_error("MeasurementModel: operator has imaginary part");
  return A.real();
}

void MeasurementModel::validate() const {
  if (A.rows() < 1) throw std::invalid_argument("MeasurementModel: M must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("MeasurementModel: noise_sigma must be >= 0");
}

Mat realify_operator(const CMat& A) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const std::complex<double> j(0.0, 1.0);
  CMat Ap(m, 4 * n);
  Ap << A, -A, j * A, -j * A;
  Mat H(2 * m, 4 * n);
  H.topRows(m) = Ap.real();
  H.bottomRows(m) = Ap.imag();
  return H;
}

Vec realify_rhs(const CVec& y) {
  Vec b(2 * y.size());
  b.head(y.size()) = y.real();
  b.tail(y.size()) = y.imag();
  return b;
}

void TrackerConfig::validate() const {
  if (!(lambda >= 0.0 && gamma >= 0.0 && mu >= 0.0)) {
    throw std::invalid_argument("TrackerConfig: lambda, gamma, mu must be >= 0");
  }
  if (!(eta > 0.0)) throw std::invalid_argument("TrackerConfig: eta must be > 0");
  if (q < 1) throw std::invalid_argument("TrackerConfig: q must be >= 1");
  if (rwl1_iters < 1) throw std::invalid_argument("TrackerConfig: rwl1_iters must be >= 1");
}

}  // namespace emdflow
