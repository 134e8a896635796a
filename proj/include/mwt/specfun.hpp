#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mwt {

/// Orthogonal-polynomial family used as the mother subspace. Both are shifted
/// to [0, 1]: Legendre with w(x) = 1, Chebyshev (first kind) with
/// w(x) = 1 / sqrt(1 - (2x - 1)^2).
enum class BasisKind { Legendre, Chebyshev };

std::string_view to_string(BasisKind kind);
/// Accepts "legendre"/"leg" and "chebyshev"/"cheb"/"chb" (case-insensitive).
BasisKind parse_basis_kind(std::string_view name);

/// Weight function of the family on (0, 1).
double weight(BasisKind kind, double x);
/// Integral of the weight over [0, 1]: 1 for Legendre, pi/2 for Chebyshev.
double total_weight(BasisKind kind);

inline constexpr int kMaxQuadratureOrder = 64;
inline constexpr int kMaxBasisOrder = 6;

/// Gauss rule for the family weight on [0, 1]. Nodes are strictly increasing.
struct QuadratureRule {
  BasisKind kind{};
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// n-point Gauss-Legendre or Gauss-Chebyshev rule on [0, 1], 1 <= n <= 64.
/// Throws OrderUnsupportedError outside that range.
QuadratureRule make_quadrature(BasisKind kind, int n);

/// Normalized shifted polynomials phi_0..phi_{k-1}, orthonormal under w.
class OrthoBasis {
 public:
  OrthoBasis(BasisKind kind, int k);

  BasisKind kind() const { return kind_; }
  int order() const { return k_; }

  /// Monomial coefficients of phi_i in x, lowest degree first (length i + 1).
  const std::vector<double>& monomial(int i) const { return monomials_[i]; }

  /// phi_0(x)..phi_{k-1}(x) by three-term recurrence. x must lie in [0, 1].
  std::vector<double> eval(double x) const;
  void eval_into(double x, std::span<double> out) const;

  /// Recurrence evaluation without the domain check. Used where the caller
  /// evaluates a polynomial piece on a point it already knows is valid.
  void eval_unchecked(double x, std::span<double> out) const;

 private:
  BasisKind kind_;
  int k_;
  std::vector<std::vector<double>> monomials_;
};

/// Throws OrderUnsupportedError unless 1 <= k <= 6.
OrthoBasis make_basis(BasisKind kind, int k);

/// [phi_0(x), ..., phi_{k-1}(x)]; throws DomainError if x is outside [0, 1].
std::vector<double> eval_basis(const OrthoBasis& basis, double x);

/// Unnormalized P_n(t) or T_n(t) on [-1, 1] and its derivative.
struct PolyValue {
  double value;
  double derivative;
};
PolyValue legendre_p(int n, double t);
PolyValue chebyshev_t(int n, double t);

/// Horner evaluation of a monomial-coefficient polynomial (lowest degree first).
double horner(std::span<const double> coeffs, double x);

}  // namespace mwt
