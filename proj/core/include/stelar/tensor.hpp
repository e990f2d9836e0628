#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace stelar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense 3-way tensor of case counts, indexed (location m, signal n, time t).
///
/// Storage is slab-contiguous: each frontal slice X(:,:,t) is an M x N
/// column-major block, slices stacked along t. Entry (m,n,t) sits at
/// t*M*N + n*M + m.
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  DenseTensor3(Index locations, Index signals, Index timesteps, double fill = 0.0);

  Index locations() const { return m_; }
  Index signals() const { return n_; }
  Index timesteps() const { return l_; }
  std::array<Index, 3> dims() const { return {m_, n_, l_}; }
  Index size() const { return m_ * n_ * l_; }

  double operator()(Index m, Index n, Index t) const { return data_[offset(m, n, t)]; }
  double& operator()(Index m, Index n, Index t) { return data_[offset(m, n, t)]; }

  /// Frontal slice X(:,:,t) as an M x N matrix view.
  Eigen::Map<const Matrix> slab(Index t) const;
  Eigen::Map<Matrix> slab(Index t);

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double frobenius_norm() const;
  bool all_nonnegative() const;
  bool all_finite() const;

  bool operator==(const DenseTensor3& other) const;

 private:
  Index offset(Index m, Index n, Index t) const { return t * m_ * n_ + n * m_ + m; }

  Index m_ = 0, n_ = 0, l_ = 0;
  std::vector<double> data_;
};

/// Rank-K factor set A (M x K), B (N x K), C (L x K). `weights` is empty for
/// a raw model; after normalize() it holds the per-component scales.
struct FactorModel {
  Matrix A, B, C;
  Vector weights;

  Index rank() const { return A.cols(); }
};

/// Unit-normalize every factor column and absorb the scales into weights,
/// component weight = product of the three column norms. Zero columns keep
/// weight zero.
FactorModel normalize(const FactorModel& model);

/// Fold weights back into the temporal factor, leaving `weights` empty.
FactorModel absorb_weights(const FactorModel& model);

/// Matricization. Row layouts follow the column-wise Kronecker ordering with
/// the left factor's index varying slower:
///   mode 1: (N*L) x M, row t*N + n
///   mode 2: (M*L) x N, row t*M + m
///   mode 3: (M*N) x L, row n*M + m
Matrix unfold(const DenseTensor3& t, int mode);

/// Inverse of unfold for the same mode and dims.
DenseTensor3 refold(const Matrix& mat, int mode, Index locations, Index signals, Index timesteps);

/// Column-wise Kronecker product: column k of the result is kron(P(:,k), Q(:,k)),
/// so entry (j*I + i, k) = P(j,k) * Q(i,k) with Q being I x K.
Matrix khatri_rao(const Matrix& P, const Matrix& Q);

/// Matricized tensor times Khatri-Rao product: unfold(t, mode)^T * (f1 ⊙ f2),
/// computed slab-wise without materializing either operand.
Matrix mttkrp(const DenseTensor3& t, const Matrix& f1, const Matrix& f2, int mode);

/// Sum of rank-1 components: X(m,n,t) = sum_k w_k A(m,k) B(n,k) C(t,k).
DenseTensor3 reconstruct(const FactorModel& model);

}  // namespace stelar
