#include "mwt/specfun.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "mwt/error.hpp"

namespace mwt {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Coefficients of p(2x - 1) given coefficients of p(t), lowest degree first.
std::vector<double> shift_to_unit_interval(const std::vector<double>& p) {
  std::vector<double> out(p.size(), 0.0);
  std::vector<double> power{1.0};  // (2x - 1)^d
  for (std::size_t d = 0; d < p.size(); ++d) {
    for (std::size_t m = 0; m < power.size(); ++m) out[m] += p[d] * power[m];
    std::vector<double> next(power.size() + 1, 0.0);
    for (std::size_t m = 0; m < power.size(); ++m) {
      next[m] -= power[m];
      next[m + 1] += 2.0 * power[m];
    }
    power = std::move(next);
  }
  return out;
}

double normalization(BasisKind kind, int i) {
  if (kind == BasisKind::Legendre) return std::sqrt(2.0 * i + 1.0);
  return i == 0 ? std::sqrt(2.0 / kPi) : 2.0 / std::sqrt(kPi);
}

QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule{BasisKind::Legendre, std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    // Chebyshev node as the starting guess; roots come out descending in t.
    double t = std::cos(kPi * (i + 0.5) / n);
    for (int iter = 0; iter < 100; ++iter) {
      const PolyValue p = legendre_p(n, t);
      const double step = p.value / p.derivative;
      t -= step;
      if (std::abs(step) <= 1e-15) break;
    }
    const double dp = legendre_p(n, t).derivative;
    const double pm1 = n > 1 ? legendre_p(n - 1, t).value : 1.0;
    rule.nodes[n - 1 - i] = 0.5 * (t + 1.0);
    rule.weights[n - 1 - i] = 1.0 / (n * dp * pm1);
  }
  return rule;
}

QuadratureRule gauss_chebyshev(int n) {
  QuadratureRule rule{BasisKind::Chebyshev, std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    const double t = std::cos(kPi * (i + 0.5) / n);
    rule.nodes[n - 1 - i] = 0.5 * (t + 1.0);
    rule.weights[n - 1 - i] = kPi / (2.0 * n);
  }
  return rule;
}

}  // namespace

std::string_view to_string(BasisKind kind) {
  return kind == BasisKind::Legendre ? "legendre" : "chebyshev";
}

BasisKind parse_basis_kind(std::string_view name) {
  const std::string s = lower(name);
  if (s == "legendre" || s == "leg") return BasisKind::Legendre;
  if (s == "chebyshev" || s == "cheb" || s == "chb") return BasisKind::Chebyshev;
  throw ConfigError("unknown basis kind '" + std::string(name) + "' (expected legendre or chebyshev)");
}

double weight(BasisKind kind, double x) {
  if (kind == BasisKind::Legendre) return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double t = 2.0 * x - 1.0;
  return 1.0 / std::sqrt(1.0 - t * t);
}

double total_weight(BasisKind kind) { return kind == BasisKind::Legendre ? 1.0 : kPi / 2.0; }

PolyValue legendre_p(int n, double t) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = t;
  double d0 = 0.0, d1 = 1.0;
  for (int i = 2; i <= n; ++i) {
    const double p2 = ((2.0 * i - 1.0) * t * p1 - (i - 1.0) * p0) / i;
    // P'_i = P'_{i-2} + (2i - 1) P_{i-1}
    const double d2 = d0 + (2.0 * i - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

PolyValue chebyshev_t(int n, double t) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = t;
  double d0 = 0.0, d1 = 1.0;
  for (int i = 2; i <= n; ++i) {
    const double p2 = 2.0 * t * p1 - p0;
    const double d2 = 2.0 * p1 + 2.0 * t * d1 - d0;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

double horner(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

QuadratureRule make_quadrature(BasisKind kind, int n) {
  if (n < 1 || n > kMaxQuadratureOrder) {
    throw OrderUnsupportedError("quadrature order " + std::to_string(n) +
                                " unsupported (supported range 1..64)");
  }
  return kind == BasisKind::Legendre ? gauss_legendre(n) : gauss_chebyshev(n);
}

OrthoBasis::OrthoBasis(BasisKind kind, int k) : kind_(kind), k_(k) {
  if (k < 1 || k > kMaxBasisOrder) {
    throw OrderUnsupportedError("basis order k=" + std::to_string(k) +
                                " unsupported (supported range 1..6)");
  }
  // Monomial tables of P_i(t) / T_i(t), built by the same recurrences.
  std::vector<std::vector<double>> raw(k);
  raw[0] = {1.0};
  if (k > 1) raw[1] = {0.0, 1.0};
  for (int i = 2; i < k; ++i) {
    std::vector<double> next(i + 1, 0.0);
    const double a = kind == BasisKind::Legendre ? (2.0 * i - 1.0) / i : 2.0;
    const double c = kind == BasisKind::Legendre ? (i - 1.0) / i : 1.0;
    for (int m = 0; m < i; ++m) next[m + 1] += a * raw[i - 1][m];
    for (int m = 0; m < i - 1; ++m) next[m] -= c * raw[i - 2][m];
    raw[i] = std::move(next);
  }
  monomials_.resize(k);
  for (int i = 0; i < k; ++i) {
    monomials_[i] = shift_to_unit_interval(raw[i]);
    for (double& c : monomials_[i]) c *= normalization(kind, i);
  }
}

void OrthoBasis::eval_unchecked(double x, std::span<double> out) const {
  const double t = 2.0 * x - 1.0;
  double p0 = 1.0, p1 = t;
  for (int i = 0; i < k_; ++i) {
    double p;
    if (i == 0) {
      p = 1.0;
    } else if (i == 1) {
      p = t;
    } else {
      p = kind_ == BasisKind::Legendre ? ((2.0 * i - 1.0) * t * p1 - (i - 1.0) * p0) / i
                                       : 2.0 * t * p1 - p0;
      p0 = p1;
      p1 = p;
    }
    out[i] = normalization(kind_, i) * p;
  }
}

void OrthoBasis::eval_into(double x, std::span<double> out) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("basis evaluation point " + std::to_string(x) + " outside [0, 1]");
  }
  eval_unchecked(x, out);
}

std::vector<double> OrthoBasis::eval(double x) const {
  std::vector<double> out(k_);
  eval_into(x, out);
  return out;
}

OrthoBasis make_basis(BasisKind kind, int k) { return OrthoBasis(kind, k); }

std::vector<double> eval_basis(const OrthoBasis& basis, double x) { return basis.eval(x); }

}  // namespace mwt
