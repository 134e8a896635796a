#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mwt/specfun.hpp"

namespace mwt {

/// Polynomial with separate monomial coefficients on [0, 1/2) and [1/2, 1].
struct PiecewisePoly {
  std::vector<double> left;
  std::vector<double> right;

  double operator()(double x) const;
};

/// Multiwavelets psi_0..psi_{k-1} spanning W_0 for one polynomial family.
struct PiecewiseBasis {
  BasisKind kind{};
  int k = 0;
  std::vector<PiecewisePoly> psi;

  double eval(int i, double x) const { return psi[i](x); }
};

/// Two-scale relation between V_1 and V_0 (+) W_0:
///   s^n_l = H0 s^{n+1}_{2l} + H1 s^{n+1}_{2l+1}
///   d^n_l = G0 s^{n+1}_{2l} + G1 s^{n+1}_{2l+1}
/// with Sigma0/Sigma1 the correction matrices of the non-uniform measure.
struct FilterBank {
  BasisKind kind{};
  int k = 0;
  Eigen::MatrixXd H0, H1, G0, G1, Sigma0, Sigma1;
  /// True for the untrained-structure ablation produced by random_filters.
  bool random = false;
};

/// Discrete measure every psi inner product is taken in.
///
/// Legendre: the 2k-point Gauss-Legendre rule mapped onto each half interval,
/// which integrates piecewise polynomials of the relevant degree exactly.
/// Chebyshev: the 2k-point Gauss-Chebyshev rule on [0, 1]; 2k is even, so no
/// node sits on the x = 1/2 break.
QuadratureRule filter_measure(BasisKind kind, int k);

/// Measure-aware Gram-Schmidt for psi. Throws OrderUnsupportedError for k
/// outside 1..6 and DegenerateBasisError if a candidate loses rank.
PiecewiseBasis derive_psi(BasisKind kind, int k);

/// Filter and correction matrices for (kind, k). Throws FilterValidationError
/// if the orthogonality constraint residual exceeds 1e-8.
FilterBank build_filters(BasisKind kind, int k);

/// max |[H; G] blockdiag(Sigma0, Sigma1) [H; G]^T - I| entrywise.
double validate_filters(const FilterBank& fb);

/// Uniform(-1, 1) entries, each of H0/H1/G0/G1 scaled to unit spectral norm,
/// identity correction matrices. Deterministic in seed.
FilterBank random_filters(int k, std::uint64_t seed);

}  // namespace mwt
