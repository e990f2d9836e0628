#include "stelar/tensor.hpp"

#include <cmath>
#include <sstream>

#include "stelar/error.hpp"

namespace stelar {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw UsageError(msg);
}

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    std::ostringstream os;
    os << "tensor mode must be 1, 2 or 3, got " << mode;
    throw UsageError(os.str());
  }
}

}  // namespace

DenseTensor3::DenseTensor3(Index locations, Index signals, Index timesteps, double fill)
    : m_(locations), n_(signals), l_(timesteps) {
  require(m_ >= 1 && n_ >= 1 && l_ >= 1, "tensor dims must all be >= 1");
  data_.assign(static_cast<std::size_t>(m_ * n_ * l_), fill);
}

Eigen::Map<const Matrix> DenseTensor3::slab(Index t) const {
  return Eigen::Map<const Matrix>(data_.data() + t * m_ * n_, m_, n_);
}

Eigen::Map<Matrix> DenseTensor3::slab(Index t) {
  return Eigen::Map<Matrix>(data_.data() + t * m_ * n_, m_, n_);
}

double DenseTensor3::frobenius_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

bool DenseTensor3::all_nonnegative() const {
  for (double v : data_)
    if (v < 0.0) return false;
  return true;
}

bool DenseTensor3::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool DenseTensor3::operator==(const DenseTensor3& other) const {
  return m_ == other.m_ && n_ == other.n_ && l_ == other.l_ && data_ == other.data_;
}

FactorModel normalize(const FactorModel& model) {
  FactorModel out = model;
  const Index k = model.rank();
  out.weights = Vector::Ones(k);
  if (model.weights.size() > 0) out.weights = model.weights;
  for (Index j = 0; j < k; ++j) {
    const double na = out.A.col(j).norm();
    const double nb = out.B.col(j).norm();
    const double nc = out.C.col(j).norm();
    if (na > 0) out.A.col(j) /= na;
    if (nb > 0) out.B.col(j) /= nb;
    if (nc > 0) out.C.col(j) /= nc;
    out.weights(j) *= na * nb * nc;
  }
  return out;
}

FactorModel absorb_weights(const FactorModel& model) {
  FactorModel out = model;
  if (out.weights.size() == 0) return out;
  for (Index j = 0; j < out.rank(); ++j) out.C.col(j) *= out.weights(j);
  out.weights.resize(0);
  return out;
}

Matrix unfold(const DenseTensor3& t, int mode) {
  check_mode(mode);
  const Index m = t.locations(), n = t.signals(), l = t.timesteps();
  Matrix out;
  switch (mode) {
    case 1:
      out.resize(n * l, m);
      for (Index tt = 0; tt < l; ++tt)
        for (Index nn = 0; nn < n; ++nn)
          for (Index mm = 0; mm < m; ++mm) out(tt * n + nn, mm) = t(mm, nn, tt);
      break;
    case 2:
      out.resize(m * l, n);
      for (Index tt = 0; tt < l; ++tt)
        for (Index nn = 0; nn < n; ++nn)
          for (Index mm = 0; mm < m; ++mm) out(tt * m + mm, nn) = t(mm, nn, tt);
      break;
    default:  // mode 3: column t is vec(X(:,:,t)), which is how slabs are stored
      out.resize(m * n, l);
      for (Index tt = 0; tt < l; ++tt)
        for (Index nn = 0; nn < n; ++nn)
          for (Index mm = 0; mm < m; ++mm) out(nn * m + mm, tt) = t(mm, nn, tt);
      break;
  }
  return out;
}

DenseTensor3 refold(const Matrix& mat, int mode, Index locations, Index signals, Index timesteps) {
  check_mode(mode);
  const Index m = locations, n = signals, l = timesteps;
  switch (mode) {
    case 1:
      require(mat.rows() == n * l && mat.cols() == m, "refold: matrix shape does not match mode-1 layout");
      break;
    case 2:
      require(mat.rows() == m * l && mat.cols() == n, "refold: matrix shape does not match mode-2 layout");
      break;
    default:
      require(mat.rows() == m * n && mat.cols() == l, "refold: matrix shape does not match mode-3 layout");
      break;
  }
  DenseTensor3 out(m, n, l);
  for (Index tt = 0; tt < l; ++tt)
    for (Index nn = 0; nn < n; ++nn)
      for (Index mm = 0; mm < m; ++mm) {
        switch (mode) {
          case 1: out(mm, nn, tt) = mat(tt * n + nn, mm); break;
          case 2: out(mm, nn, tt) = mat(tt * m + mm, nn); break;
          default: out(mm, nn, tt) = mat(nn * m + mm, tt); break;
        }
      }
  return out;
}

Matrix khatri_rao(const Matrix& P, const Matrix& Q) {
  require(P.cols() == Q.cols(), "khatri_rao: operands must have the same column count");
  const Index j_rows = P.rows(), i_rows = Q.rows(), k = P.cols();
  Matrix out(i_rows * j_rows, k);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < j_rows; ++j) out.block(j * i_rows, c, i_rows, 1) = P(j, c) * Q.col(c);
  return out;
}

Matrix mttkrp(const DenseTensor3& t, const Matrix& f1, const Matrix& f2, int mode) {
  check_mode(mode);
  const Index m = t.locations(), n = t.signals(), l = t.timesteps();
  require(f1.cols() == f2.cols(), "mttkrp: factors must share the component count");
  const Index k = f1.cols();

  Matrix out;
  switch (mode) {
    case 1: {  // f1 = C (L x K), f2 = B (N x K) -> M x K
      require(f1.rows() == l && f2.rows() == n, "mttkrp mode 1 expects factors of shape L x K and N x K");
      out = Matrix::Zero(m, k);
      for (Index tt = 0; tt < l; ++tt)
        out.noalias() += (t.slab(tt) * f2) * f1.row(tt).asDiagonal();
      break;
    }
    case 2: {  // f1 = C (L x K), f2 = A (M x K) -> N x K
      require(f1.rows() == l && f2.rows() == m, "mttkrp mode 2 expects factors of shape L x K and M x K");
      out = Matrix::Zero(n, k);
      for (Index tt = 0; tt < l; ++tt)
        out.noalias() += (t.slab(tt).transpose() * f2) * f1.row(tt).asDiagonal();
      break;
    }
    default: {  // f1 = B (N x K), f2 = A (M x K) -> L x K
      require(f1.rows() == n && f2.rows() == m, "mttkrp mode 3 expects factors of shape N x K and M x K");
      out.resize(l, k);
      for (Index tt = 0; tt < l; ++tt)
        out.row(tt) = ((t.slab(tt).transpose() * f2).cwiseProduct(f1)).colwise().sum();
      break;
    }
  }
  return out;
}

DenseTensor3 reconstruct(const FactorModel& model) {
  const Index m = model.A.rows(), n = model.B.rows(), l = model.C.rows();
  const Index k = model.rank();
  require(model.B.cols() == k && model.C.cols() == k, "reconstruct: factors must share the component count");
  require(model.weights.size() == 0 || model.weights.size() == k,
          "reconstruct: weights length must equal the component count");

  Matrix scaled_a = model.A;
  if (model.weights.size() > 0) scaled_a = model.A * model.weights.asDiagonal();

  DenseTensor3 out(m, n, l);
  for (Index tt = 0; tt < l; ++tt)
    out.slab(tt).noalias() = scaled_a * model.C.row(tt).asDiagonal() * model.B.transpose();
  return out;
}

}  // namespace stelar
