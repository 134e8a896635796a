#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mwt/filterbank.hpp"

namespace mwt {

/// Coefficients of one scale. Storage is translation-major with the
/// polynomial index fastest:
///   1-D: data[l * k + j]
///   2-D: data[((l1 * side + l2) * components + t) * k*k + j1 * k + j2]
/// `components` is 1 for s-arrays and for 1-D d-arrays; 2-D d-arrays carry
/// the three detail orientations (H x G, G x H, G x G) in that order.
struct CoeffArray {
  int k = 0;
  int dims = 1;
  int side = 0;
  int components = 1;
  std::vector<double> data;

  int block() const { return dims == 1 ? k : k * k; }
  int cells() const { return dims == 1 ? side : side * side; }
  int cell_size() const { return components * block(); }
  std::size_t size() const { return data.size(); }

  static CoeffArray zeros(int k, int dims, int side, int components = 1);
};

/// Full multiresolution decomposition from scale `finest` down to `coarsest`.
/// s holds only the coarsest scale; d[n - coarsest] holds the details at n
/// for n = coarsest .. finest - 1.
struct MultiresCoeffs {
  int k = 0;
  int dims = 1;
  int finest = 0;
  int coarsest = 0;
  CoeffArray s;
  std::vector<CoeffArray> d;

  const CoeffArray& d_at(int n) const { return d[n - coarsest]; }
  CoeffArray& d_at(int n) { return d[n - coarsest]; }
};

/// Kronecker-lifted bank for 2-D fields. Index c = 2a + b names the child
/// quadrant (a along the first axis, b along the second).
struct KronBank {
  int k = 0;  // underlying 1-D order; matrices are k^2 x k^2
  std::array<Eigen::MatrixXd, 4> H;                    // H^a (x) H^b
  std::array<std::array<Eigen::MatrixXd, 4>, 3> G;     // [orientation][child]
  std::array<Eigen::MatrixXd, 4> Sigma;                // Sigma^a (x) Sigma^b
};

KronBank kron_bank(const FilterBank& fb);

/// One dyadic step of the filter bank, prepared for repeated application to
/// multichannel fields. A field holds `groups` independent coefficient
/// vectors per cell: fine/coarse-s layout is [cell][group][block] and the
/// d layout is [cell][group][component][block].
class Ladder {
 public:
  Ladder() = default;
  Ladder(const FilterBank& fb, int dims);

  int k() const { return k_; }
  int dims() const { return dims_; }
  int block() const { return block_; }
  int children() const { return dims_ == 1 ? 2 : 4; }
  int components() const { return dims_ == 1 ? 1 : 3; }

  /// fine has `side` cells per axis; s/d get side/2.
  void decompose(std::span<const double> fine, int side, int groups, std::span<double> s,
                 std::span<double> d) const;
  /// Inverse of decompose: writes the fine field from (s, d) at side/2.
  void reconstruct(std::span<const double> s, std::span<const double> d, int side, int groups,
                   std::span<double> fine) const;

  /// Transposes, used for reverse-mode differentiation.
  void decompose_adjoint(std::span<const double> gs, std::span<const double> gd, int side,
                         int groups, std::span<double> gfine) const;
  void reconstruct_adjoint(std::span<const double> gfine, int side, int groups,
                           std::span<double> gs, std::span<double> gd) const;

 private:
  // Row-major block x block matrices.
  using Mat = std::vector<double>;
  int k_ = 0, dims_ = 1, block_ = 0;
  std::vector<Mat> dec_s_;  // [child]
  std::vector<Mat> dec_d_;  // [component * children + child]
  std::vector<Mat> rec_s_;  // Sigma_c H_c^T
  std::vector<Mat> rec_d_;  // Sigma_c G_{t,c}^T

  int child_offset(int cell, int child, int side) const;
};

/// Multiscale decomposition of the finest s-array down to scale L. Throws
/// ShapeError if the side is not a power of two or does not match fb.k, and
/// ScaleError unless 0 <= L < N.
MultiresCoeffs decompose(const FilterBank& fb, const CoeffArray& s_fine, int L);
CoeffArray reconstruct(const FilterBank& fb, const MultiresCoeffs& coeffs);

/// log2 of a power of two; throws ShapeError otherwise.
int dyadic_level(std::size_t length);

/// Non-standard form of an integral operator with kernel K on [0,1]^2.
/// Scale index n runs over the coefficient scales L..N-1: blocks at n act on
/// the k*2^n-dimensional (d^n, s^n) vectors, in the same layout as CoeffArray.
struct KernelProjection {
  int k = 0;
  int finest = 0;
  int coarsest = 0;
  double threshold = 1e-8;
  std::vector<Eigen::MatrixXd> A, B, C;  // [n - coarsest]
  Eigen::MatrixXd T;                      // coarsest block T-bar

  const Eigen::MatrixXd& A_at(int n) const { return A[n - coarsest]; }
  const Eigen::MatrixXd& B_at(int n) const { return B[n - coarsest]; }
  const Eigen::MatrixXd& C_at(int n) const { return C[n - coarsest]; }
};

using Kernel2 = std::function<double(double, double)>;

/// Tensor-product quadrature (2k points per cell and axis) of K against the
/// scale-N scaling functions, followed by the two-scale change of basis
/// down to L. The operator represented is a -> int K(x, y) a(y) dmu_N(y)
/// in the orthonormal coefficients of the family measure.
/// Throws KernelEvaluationError on a non-finite kernel sample.
KernelProjection project_kernel(const Kernel2& K, const FilterBank& fb, int N, int L,
                                double threshold = 1e-8);

/// Matrix T^N of the operator on the finest scaling coefficients.
Eigen::MatrixXd finest_kernel_matrix(const Kernel2& K, const FilterBank& fb, int N);

/// Applies the blocks by the decomposition / reconstruction ladder:
///   Ud^n = A_n d^n + B_n s^n,  Us^n_hat = C_n d^n,  Us^L = T s^L.
std::vector<double> apply_nonstandard(const KernelProjection& kp, const FilterBank& fb,
                                      std::span<const double> s_fine);

/// Finest scaling coefficients <f, phi^N_{jl}> by 2k-point quadrature per cell.
CoeffArray project_function(const std::function<double(double)>& f, const FilterBank& fb,
                            int N);

/// Fraction of entries with |value| > threshold.
double mask_fraction(const Eigen::MatrixXd& m, double threshold);

}  // namespace mwt
