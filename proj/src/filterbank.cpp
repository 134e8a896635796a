#include "mwt/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwt/error.hpp"
#include "mwt/random.hpp"

namespace mwt {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_order(int k) {
  if (k < 1 || k > kMaxBasisOrder) {
    throw OrderUnsupportedError("filter order k=" + std::to_string(k) +
                                " unsupported (supported range 1..6)");
  }
}

// Coefficients of p(a x + b), lowest degree first.
std::vector<double> compose_affine(const std::vector<double>& p, double a, double b) {
  std::vector<double> out(p.size(), 0.0);
  std::vector<double> power{1.0};
  for (std::size_t d = 0; d < p.size(); ++d) {
    for (std::size_t m = 0; m < power.size(); ++m) out[m] += p[d] * power[m];
    std::vector<double> next(power.size() + 1, 0.0);
    for (std::size_t m = 0; m < power.size(); ++m) {
      next[m] += b * power[m];
      next[m + 1] += a * power[m];
    }
    power = std::move(next);
  }
  return out;
}

// Intermediate products shared by derive_psi and build_filters.
struct Derivation {
  Eigen::MatrixXd H0, H1, Sigma0, Sigma1;
  // Row i holds psi_i in the V_1 basis {sqrt2 phi_j(2x)} (first k columns)
  // and {sqrt2 phi_j(2x-1)} (last k columns).
  Eigen::MatrixXd psi_v1;
};

Derivation derive(BasisKind kind, int k) {
  check_order(k);
  const OrthoBasis basis(kind, k);
  const QuadratureRule rule = make_quadrature(kind, 2 * k);
  std::vector<double> phi_a(k), phi_b(k);

  Derivation out;
  // H_ij = (1/sqrt2) int_0^1 phi_i(x/2) phi_j(x) w(x) dx (and x/2 + 1/2 for H1):
  // polynomial integrands, exact under the family rule.
  out.H0 = Eigen::MatrixXd::Zero(k, k);
  out.H1 = Eigen::MatrixXd::Zero(k, k);
  for (int m = 0; m < rule.size(); ++m) {
    const double x = rule.nodes[m];
    const double w = rule.weights[m] / kSqrt2;
    basis.eval_unchecked(x, phi_b);
    basis.eval_unchecked(0.5 * x, phi_a);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) out.H0(i, j) += w * phi_a[i] * phi_b[j];
    basis.eval_unchecked(0.5 * x + 0.5, phi_a);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) out.H1(i, j) += w * phi_a[i] * phi_b[j];
  }

  // Correction matrices: Gram matrices of the V_1 basis in the psi measure.
  const QuadratureRule measure = filter_measure(kind, k);
  out.Sigma0 = Eigen::MatrixXd::Zero(k, k);
  out.Sigma1 = Eigen::MatrixXd::Zero(k, k);
  for (int m = 0; m < measure.size(); ++m) {
    const double x = measure.nodes[m];
    const double w = 2.0 * measure.weights[m];
    if (x < 0.5) {
      basis.eval_unchecked(2.0 * x, phi_a);
      out.Sigma0 += w * Eigen::Map<Eigen::VectorXd>(phi_a.data(), k) *
                    Eigen::Map<Eigen::VectorXd>(phi_a.data(), k).transpose();
    } else {
      basis.eval_unchecked(2.0 * x - 1.0, phi_a);
      out.Sigma1 += w * Eigen::Map<Eigen::VectorXd>(phi_a.data(), k) *
                    Eigen::Map<Eigen::VectorXd>(phi_a.data(), k).transpose();
    }
  }
  if (kind == BasisKind::Legendre) {
    // Uniform weight: the scaled pieces are orthonormal, so the Gram matrices
    // are the identity (the quadrature above reproduces it to rounding).
    out.Sigma0.setIdentity();
    out.Sigma1.setIdentity();
  }

  // Gram-Schmidt in V_1 coordinates under metric blockdiag(Sigma0, Sigma1).
  Eigen::MatrixXd metric = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  metric.topLeftCorner(k, k) = out.Sigma0;
  metric.bottomRightCorner(k, k) = out.Sigma1;
  Eigen::MatrixXd phi_v1(k, 2 * k);
  phi_v1 << out.H0, out.H1;

  out.psi_v1 = Eigen::MatrixXd::Zero(k, 2 * k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(2 * k);
    seed(i) = 1.0;  // sqrt2 phi_i(2x) on the left half, zero on the right
    Eigen::VectorXd v = seed;
    // Two passes: the second removes the rounding residue of the first.
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd cj = phi_v1.row(j).transpose();
        v -= (v.dot(metric * cj)) * cj;
      }
      for (int l = 0; l < i; ++l) {
        const Eigen::VectorXd pl = out.psi_v1.row(l).transpose();
        v -= (v.dot(metric * pl)) * pl;
      }
    }
    const double norm = std::sqrt(std::max(0.0, v.dot(metric * v)));
    if (!(norm > 1e-10)) {
      throw DegenerateBasisError("Gram-Schmidt lost rank at psi_" + std::to_string(i) +
                                 " (norm " + std::to_string(norm) + ")");
    }
    out.psi_v1.row(i) = (v / norm).transpose();
  }
  return out;
}

PiecewisePoly to_piecewise(const Eigen::VectorXd& coords, const OrthoBasis& basis) {
  const int k = basis.order();
  PiecewisePoly p{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (int j = 0; j < k; ++j) {
    const auto left = compose_affine(basis.monomial(j), 2.0, 0.0);
    const auto right = compose_affine(basis.monomial(j), 2.0, -1.0);
    for (std::size_t m = 0; m < left.size(); ++m) {
      p.left[m] += coords(j) * kSqrt2 * left[m];
      p.right[m] += coords(k + j) * kSqrt2 * right[m];
    }
  }
  return p;
}

// Sign of the highest-degree non-negligible coefficient of the left piece.
double leading_sign(const PiecewisePoly& p) {
  double scale = 0.0;
  for (double c : p.left) scale = std::max(scale, std::abs(c));
  for (auto it = p.left.rbegin(); it != p.left.rend(); ++it) {
    if (std::abs(*it) > 1e-9 * scale) return *it > 0.0 ? 1.0 : -1.0;
  }
  return 1.0;
}

struct Canonical {
  Derivation d;
  PiecewiseBasis psi;
};

Canonical canonical(BasisKind kind, int k) {
  Canonical c{derive(kind, k), PiecewiseBasis{kind, k, {}}};
  const OrthoBasis basis(kind, k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd coords = c.d.psi_v1.row(i).transpose();
    PiecewisePoly p = to_piecewise(coords, basis);
    if (leading_sign(p) < 0.0) {
      c.d.psi_v1.row(i) *= -1.0;
      for (double& v : p.left) v = -v;
      for (double& v : p.right) v = -v;
    }
    c.psi.psi.push_back(std::move(p));
  }
  return c;
}

Eigen::MatrixXd random_unit_matrix(int k, Rng& rng) {
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
  if (norm > 0.0) m /= norm;
  return m;
}

}  // namespace

double PiecewisePoly::operator()(double x) const {
  return x < 0.5 ? horner(left, x) : horner(right, x);
}

QuadratureRule filter_measure(BasisKind kind, int k) {
  check_order(k);
  const QuadratureRule base = make_quadrature(kind, 2 * k);
  if (kind == BasisKind::Chebyshev) return base;
  QuadratureRule rule{kind, {}, {}};
  for (int half = 0; half < 2; ++half) {
    for (int m = 0; m < base.size(); ++m) {
      rule.nodes.push_back(0.5 * (base.nodes[m] + half));
      rule.weights.push_back(0.5 * base.weights[m]);
    }
  }
  return rule;
}

PiecewiseBasis derive_psi(BasisKind kind, int k) { return canonical(kind, k).psi; }

FilterBank build_filters(BasisKind kind, int k) {
  Canonical c = canonical(kind, k);
  FilterBank fb;
  fb.kind = kind;
  fb.k = k;
  fb.H0 = std::move(c.d.H0);
  fb.H1 = std::move(c.d.H1);
  fb.G0 = c.d.psi_v1.leftCols(k);
  fb.G1 = c.d.psi_v1.rightCols(k);
  fb.Sigma0 = std::move(c.d.Sigma0);
  fb.Sigma1 = std::move(c.d.Sigma1);
  const double residual = validate_filters(fb);
  if (!(residual <= 1e-8)) {
    throw FilterValidationError("filter constraint residual " + std::to_string(residual) +
                                " exceeds 1e-8 for k=" + std::to_string(k));
  }
  return fb;
}

double validate_filters(const FilterBank& fb) {
  const int k = fb.k;
  Eigen::MatrixXd m(2 * k, 2 * k);
  m << fb.H0, fb.H1, fb.G0, fb.G1;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  s.topLeftCorner(k, k) = fb.Sigma0;
  s.bottomRightCorner(k, k) = fb.Sigma1;
  const Eigen::MatrixXd r = m * s * m.transpose() - Eigen::MatrixXd::Identity(2 * k, 2 * k);
  return r.cwiseAbs().maxCoeff();
}

FilterBank random_filters(int k, std::uint64_t seed) {
  check_order(k);
  Rng rng(seed);
  FilterBank fb;
  fb.kind = BasisKind::Legendre;
  fb.k = k;
  fb.random = true;
  fb.H0 = random_unit_matrix(k, rng);
  fb.H1 = random_unit_matrix(k, rng);
  fb.G0 = random_unit_matrix(k, rng);
  fb.G1 = random_unit_matrix(k, rng);
  fb.Sigma0 = Eigen::MatrixXd::Identity(k, k);
  fb.Sigma1 = Eigen::MatrixXd::Identity(k, k);
  return fb;
}

}  // namespace mwt
