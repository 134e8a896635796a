#include "mwt/pdedata.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "mwt/error.hpp"
#include "mwt/random.hpp"

namespace mwt {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool is_pow2(long n) { return n > 0 && (n & (n - 1)) == 0; }

void require_pow2(long n, const char* what) {
  if (!is_pow2(n)) throw ShapeError(std::string(what) + " must be a power of two, got " + std::to_string(n));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void GrfSpec::validate() const {
  if (dims != 1 && dims != 2) throw SpecError("random fields are 1-D or 2-D");
  if (!(sigma2 > 0.0)) throw SpecError("GRF scale sigma^2 must be positive");
  if (!(tau > 0.0)) throw SpecError("GRF inverse length tau must be positive");
  if (!(alpha > 0.5 * dims))
    throw SpecError("GRF exponent alpha must exceed dims/2 for a trace-class covariance");
}

std::vector<double> sample_grf(const GrfSpec& spec, int resolution, std::uint64_t seed) {
  spec.validate();
  const int n = resolution;
  const double sigma = std::sqrt(spec.sigma2);
  auto scale = [&](double eig) { return sigma * std::pow(eig + spec.tau * spec.tau, -0.5 * spec.alpha); };
  Rng rng(seed);

  if (!spec.periodic) {
    if (n < 2) throw ShapeError("Neumann random fields need at least two nodes");
    // u = sum_m xi_m scale(pi^2 |m|^2) e_m with e_0 = 1, e_m = sqrt(2) cos(pi m x),
    // evaluated by DCT-I, whose interior terms carry a factor 2.
    const std::size_t total = spec.dims == 1 ? n : static_cast<std::size_t>(n) * n;
    std::vector<double> X(total);
    auto axis = [&](int m) { return (m == 0 ? 1.0 : std::sqrt(2.0)) * (m == 0 || m == n - 1 ? 1.0 : 0.5); };
    for (std::size_t idx = 0; idx < total; ++idx) {
      const int m1 = spec.dims == 1 ? static_cast<int>(idx) : static_cast<int>(idx / n);
      const int m2 = spec.dims == 1 ? 0 : static_cast<int>(idx % n);
      const double eig = kPi * kPi * (double(m1) * m1 + double(m2) * m2);
      X[idx] = rng.normal() * scale(eig) * axis(m1) * (spec.dims == 2 ? axis(m2) : 1.0);
    }
    detail::dct1(X, n, spec.dims);
    return X;
  }

  require_pow2(n, "GRF resolution");
  if (spec.dims == 1) {
    // The FFT of real white noise has Hermitian, unit-variance coefficients.
    std::vector<double> w(n);
    for (double& x : w) x = rng.normal();
    detail::RealFft fft(n);
    std::vector<cplx> c(fft.bins());
    fft.forward(w.data(), c.data());
    const double norm = 1.0 / std::sqrt(double(n));
    for (int m = 0; m < fft.bins(); ++m) c[m] *= norm * scale(4 * kPi * kPi * double(m) * m);
    fft.inverse(c.data(), w.data());
    return w;
  }

  std::vector<double> w(static_cast<std::size_t>(n) * n);
  for (double& x : w) x = rng.normal();
  detail::RealFft2d fft(n);
  std::vector<cplx> c(fft.bins());
  fft.forward(w.data(), c.data());
  const int half = n / 2 + 1;
  const double norm = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double m1 = i <= n / 2 ? i : i - n;
    for (int j = 0; j < half; ++j)
      c[static_cast<std::size_t>(i) * half + j] *= norm * scale(4 * kPi * kPi * (m1 * m1 + double(j) * j));
  }
  fft.inverse(c.data(), w.data());
  return w;
}

double sqexp_periodic_kernel(double dx, double smoothing, double period) {
  const double s = std::sin(kPi * dx / period);
  return std::exp(-2.0 * s * s / (smoothing * smoothing));
}

SqExpSampler::SqExpSampler(double smoothing, double period, int n) : n_(n) {
  if (!(smoothing > 0.0) || !(period > 0.0)) throw SpecError("squared-exponential parameters must be positive");
  if (n < 1) throw ShapeError("sampler needs at least one point");
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = sqexp_periodic_kernel(double(i - j) / n, smoothing, period);
  gram_.assign(K.data(), K.data() + K.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) throw CovarianceError("eigendecomposition of the Gram matrix failed");
  const Eigen::VectorXd lam = eig.eigenvalues();
  min_eigenvalue_ = lam.minCoeff();
  const Eigen::MatrixXd F = eig.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  if (!F.allFinite()) throw CovarianceError("non-finite covariance factor");
  factor_.assign(F.data(), F.data() + F.size());
}

std::vector<double> SqExpSampler::sample(std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::VectorXd z(n_);
  for (int i = 0; i < n_; ++i) z[i] = rng.normal();
  const Eigen::Map<const Eigen::MatrixXd> F(factor_.data(), n_, n_);
  const Eigen::VectorXd x = F * z;
  return {x.data(), x.data() + n_};
}

std::vector<double> sample_sqexp_periodic(double smoothing, double period, int n, std::uint64_t seed) {
  return SqExpSampler(smoothing, period, n).sample(seed);
}

int smooth_random_cutoff(double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) throw SpecError("wavelength lambda must lie in (0, 1]");
  return static_cast<int>(std::ceil(1.0 / lambda - 1e-9));
}

std::vector<double> sample_smooth_random(double lambda, int n, std::uint64_t seed) {
  const int cutoff = smooth_random_cutoff(lambda);
  require_pow2(n, "resolution");
  if (2 * cutoff >= n)
    throw ShapeError("resolution " + std::to_string(n) + " cannot carry modes up to " + std::to_string(cutoff));
  Rng rng(seed);
  detail::RealFft fft(n);
  std::vector<cplx> c(fft.bins(), 0.0);
  c[0] = rng.normal();
  for (int m = 1; m <= cutoff; ++m) {
    const double re = rng.normal(), im = rng.normal();
    c[m] = {re, im};
  }
  std::vector<double> u(n);
  fft.inverse(c.data(), u.data());
  double mean = 0.0;
  for (double v : u) mean += v / n;
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean) / n;
  const double sd = std::sqrt(var);
  for (double& v : u) v /= sd;
  return u;
}

namespace {

/// Exponential time differencing RK4 for v_t = L v + N(v) in Fourier space,
/// with phi-function coefficients from a contour mean around each dt L.
class Etdrk4 {
 public:
  Etdrk4(const std::vector<cplx>& L, double dt) {
    const std::size_t n = L.size();
    E.resize(n), E2.resize(n), Q.resize(n), f1.resize(n), f2.resize(n), f3.resize(n);
    constexpr int M = 64;
    for (std::size_t i = 0; i < n; ++i) {
      cplx q = 0, a = 0, b = 0, c = 0;
      for (int j = 0; j < M; ++j) {
        const cplx r = std::polar(1.0, 2 * kPi * (j + 0.5) / M);
        const cplx z = dt * L[i] + r;
        const cplx ez = std::exp(z), z3 = z * z * z;
        q += (std::exp(z / 2.0) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      E[i] = std::exp(dt * L[i]);
      E2[i] = std::exp(dt * L[i] / 2.0);
      Q[i] = dt * q / double(M);
      f1[i] = dt * a / double(M);
      f2[i] = dt * b / double(M);
      f3[i] = dt * c / double(M);
    }
  }

  template <class Nonlinear>
  void step(std::vector<cplx>& v, Nonlinear&& N) {
    const std::size_t n = v.size();
    Nv.resize(n), Na.resize(n), Nb.resize(n), Nc.resize(n), a.resize(n), b.resize(n), c.resize(n);
    N(v, Nv);
    for (std::size_t i = 0; i < n; ++i) a[i] = E2[i] * v[i] + Q[i] * Nv[i];
    N(a, Na);
    for (std::size_t i = 0; i < n; ++i) b[i] = E2[i] * v[i] + Q[i] * Na[i];
    N(b, Nb);
    for (std::size_t i = 0; i < n; ++i) c[i] = E2[i] * a[i] + Q[i] * (2.0 * Nb[i] - Nv[i]);
    N(c, Nc);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = E[i] * v[i] + f1[i] * Nv[i] + 2.0 * f2[i] * (Na[i] + Nb[i]) + f3[i] * Nc[i];
  }

 private:
  std::vector<cplx> E, E2, Q, f1, f2, f3;
  std::vector<cplx> Nv, Na, Nb, Nc, a, b, c;
};

struct PeriodicProblem {
  double domain;       // period length
  cplx linear_power;   // L(k) = coefficient * (i k)^power
  int power;
  double flux;         // N(u) = flux * d/dx (u^2)
  bool cfl_limit;      // cap dt by 1 / (k_max max|u0|)
  const char* name;
};

std::vector<double> solve_periodic(std::span<const double> u0, double T, const PeriodicProblem& p,
                                   int default_resolution, double default_dt,
                                   SpectralSolverOptions opt) {
  const int n = static_cast<int>(u0.size());
  require_pow2(n, "initial condition length");
  if (!all_finite(u0)) throw SolverDivergenceError(std::string(p.name) + ": non-finite initial condition");
  if (!(T >= 0.0)) throw SpecError("final time must be non-negative");
  const int R = std::max(opt.resolution > 0 ? opt.resolution : default_resolution, n);
  require_pow2(R, "solver resolution");

  detail::RealFft coarse(n), fft(R);
  std::vector<cplx> c0(coarse.bins());
  coarse.forward(u0.data(), c0.data());
  // Zero-pad onto the internal grid; the coarse Nyquist bin splits in half.
  std::vector<cplx> v(fft.bins(), 0.0);
  const double up = double(R) / n;
  for (int m = 0; m < coarse.bins(); ++m) v[m] = c0[m] * up * ((m == n / 2 && R > n) ? 0.5 : 1.0);

  double umax = 0.0;
  for (double x : u0) umax = std::max(umax, std::abs(x));
  const double kmax = 2 * kPi / p.domain * (R / 3.0);
  double dt = opt.dt > 0.0 ? opt.dt : default_dt;
  if (opt.dt <= 0.0 && p.cfl_limit && umax > 0.0) dt = std::min(dt, 1.0 / (kmax * umax));
  const long steps = T == 0.0 ? 0 : std::max<long>(1, static_cast<long>(std::ceil(T / dt - 1e-9)));
  if (steps > 0) dt = T / steps;

  const int bins = fft.bins();
  std::vector<cplx> L(bins), ik(bins);
  std::vector<char> keep(bins);
  for (int m = 0; m < bins; ++m) {
    const double k = 2 * kPi / p.domain * m;
    L[m] = p.linear_power * std::pow(cplx(0.0, k), p.power);
    keep[m] = 3 * m < R;  // two-thirds dealiasing
    ik[m] = (m == R / 2) ? cplx(0.0) : cplx(0.0, k);
  }
  Etdrk4 etd(L, dt);
  std::vector<double> u(R);
  const double inv = 1.0 / R;
  auto nonlinear = [&](const std::vector<cplx>& s, std::vector<cplx>& out) {
    fft.inverse(s.data(), u.data());
    for (double& x : u) x = (x * inv) * (x * inv);
    fft.forward(u.data(), out.data());
    for (int m = 0; m < bins; ++m) out[m] = keep[m] ? p.flux * ik[m] * out[m] : cplx(0.0);
  };

  for (long s = 0; s < steps; ++s) {
    etd.step(v, nonlinear);
    if ((s & 63) == 63 || s + 1 == steps) {
      for (const cplx& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
          throw SolverDivergenceError(std::string(p.name) + ": solution blew up at t = " +
                                      std::to_string((s + 1) * dt));
    }
  }
  fft.inverse(v.data(), u.data());
  for (double& x : u) x *= inv;
  return subsample(u, R / n);
}

}  // namespace

std::vector<double> solve_kdv(std::span<const double> u0, double T, SpectralSolverOptions options) {
  // u_t = -(i k)^3 u - 0.25 (u^2)_x
  const PeriodicProblem p{1.0, cplx(-1.0), 3, -0.25, true, "KdV"};
  return solve_periodic(u0, T, p, 1 << 10, 1e-5, options);
}

std::vector<double> solve_burgers(std::span<const double> u0, double nu, double T,
                                  SpectralSolverOptions options) {
  if (!(nu > 0.0)) throw SpecError("viscosity must be positive");
  // u_t = nu (i k)^2 u - 0.5 (u^2)_x
  const PeriodicProblem p{2 * kPi, cplx(nu), 2, -0.5, false, "Burgers"};
  return solve_periodic(u0, T, p, 1 << 13, 1e-3, options);
}

namespace {

/// Fornberg's finite-difference weights: w[d][j] approximates the d-th
/// derivative at z from the values at x[j].
std::vector<std::vector<double>> fd_weights(double z, const std::vector<double>& x, int order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Row of weights for the derivative of `order` at node i of 0..M, using the
/// `width` nodes nearest to i that fit inside the grid. Positions are in
/// units of the spacing.
std::pair<int, std::vector<double>> stencil_row(int i, int M, int width, int order) {
  int first = i - width / 2;
  first = std::clamp(first, 0, M + 1 - width);
  std::vector<double> x(width);
  for (int j = 0; j < width; ++j) x[j] = first + j;
  return {first, fd_weights(i, x, order)[order]};
}

}  // namespace

struct BeamSolver::Impl {
  int M = 0, order = 4;
  double hp = 1.0;
  Eigen::MatrixXd A;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  std::vector<int> eq_nodes;  // equation row r + bc_rows sits at node eq_nodes[r]
  int bc_rows = 0;
  double ratio = 0.0;
};

namespace {

/// Boundary rows first, then the equation on interior nodes scaled by
/// h^order so that every row is O(1).
void assemble_beam(BeamSolver::Impl& s, double omega, int stencil) {
  const int M = s.M;
  s.A = Eigen::MatrixXd::Zero(M + 1, M + 1);
  int row = 0;
  s.A(row++, 0) = 1.0;
  s.A(row++, M) = 1.0;
  {
    const auto [first, w] = stencil_row(0, M, stencil, 1);
    for (int j = 0; j < stencil; ++j) s.A(row, first + j) = w[j];
    ++row;
  }
  if (s.order == 4) {
    const auto [first, w] = stencil_row(M, M, stencil, 1);
    for (int j = 0; j < stencil; ++j) s.A(row, first + j) = w[j];
    ++row;
  }
  s.bc_rows = row;
  s.eq_nodes.clear();
  for (int i = s.order == 4 ? 2 : 1; row <= M; ++i, ++row) {
    const auto [first, w] = stencil_row(i, M, stencil, s.order);
    for (int j = 0; j < stencil; ++j) s.A(row, first + j) += w[j];
    s.A(row, i) -= omega * omega * s.hp;
    s.eq_nodes.push_back(i);
  }
}

}  // namespace

BeamSolver::BeamSolver(int intervals, double omega, int order, int stencil) : impl_(std::make_unique<Impl>()) {
  if (order != 3 && order != 4) throw SpecError("beam order must be 3 or 4");
  if (stencil < order + 2) throw SpecError("finite-difference stencil too narrow for the derivative order");
  if (intervals + 1 < stencil + 2) throw ShapeError("beam grid too coarse for the stencil");
  if (!std::isfinite(omega)) throw SpecError("omega must be finite");
  Impl& s = *impl_;
  s.M = intervals;
  s.order = order;
  s.hp = std::pow(1.0 / intervals, order);

  // The static operator (omega = 0) sets the scale against which closeness
  // to an eigenfrequency is judged.
  assemble_beam(s, 0.0, stencil);
  const double rc0 = Eigen::PartialPivLU<Eigen::MatrixXd>(s.A).rcond();
  assemble_beam(s, omega, stencil);
  s.lu.compute(s.A);
  const double rc = s.lu.rcond();
  s.ratio = rc / rc0;
  if (!(rc > 64 * std::numeric_limits<double>::epsilon()) || !(s.ratio > 1e-5)) {
    char msg[200];
    std::snprintf(msg, sizeof msg,
                  "beam operator is singular at omega = %.10g (reciprocal condition %.3g, %.3g of the static beam)",
                  omega, rc, s.ratio);
    throw ResonanceError(msg);
  }
}

BeamSolver::~BeamSolver() = default;
BeamSolver::BeamSolver(BeamSolver&&) noexcept = default;
BeamSolver& BeamSolver::operator=(BeamSolver&&) noexcept = default;

double BeamSolver::resonance_ratio() const { return impl_->ratio; }
int BeamSolver::intervals() const { return impl_->M; }

std::vector<double> BeamSolver::solve(std::span<const double> f) const {
  const Impl& s = *impl_;
  if (f.size() != static_cast<std::size_t>(s.M) + 1)
    throw ShapeError("forcing has " + std::to_string(f.size()) + " nodes, solver expects " + std::to_string(s.M + 1));
  if (!all_finite(f)) throw SpecError("non-finite forcing");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s.M + 1);
  for (std::size_t r = 0; r < s.eq_nodes.size(); ++r) rhs[s.bc_rows + r] = f[s.eq_nodes[r]] * s.hp;
  const Eigen::VectorXd u = s.lu.solve(rhs);
  if (!u.allFinite()) throw ResonanceError("beam solve produced non-finite values");

  double res = 0.0, fn = 0.0;
  for (std::size_t r = 0; r < s.eq_nodes.size(); ++r) {
    const double fi = f[s.eq_nodes[r]];
    const double lhs = s.A.row(s.bc_rows + static_cast<int>(r)).dot(u) / s.hp;
    res += (lhs - fi) * (lhs - fi);
    fn += fi * fi;
  }
  if (fn > 0.0 && std::sqrt(res / fn) > 1e-6) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "beam residual %.3g exceeds 1e-6", std::sqrt(res / fn));
    throw SolverError(msg);
  }
  return {u.data(), u.data() + s.M + 1};
}

std::vector<double> solve_beam(std::span<const double> f, double omega, int order, int stencil) {
  if (f.size() < 2) throw ShapeError("beam forcing needs at least two nodes");
  return BeamSolver(static_cast<int>(f.size()) - 1, omega, order, stencil).solve(f);
}

std::vector<double> solve_darcy(std::span<const double> a, int side, std::span<const double> f,
                                double tolerance) {
  if (side < 3) throw ShapeError("Darcy grid needs at least 3 nodes per side");
  const std::size_t total = static_cast<std::size_t>(side) * side;
  if (a.size() != total) throw ShapeError("coefficient field does not match the grid");
  if (!f.empty() && f.size() != total) throw ShapeError("forcing field does not match the grid");
  for (double v : a)
    if (!(v > 0.0)) throw EllipticityError("coefficient must be strictly positive (min <= 0)");

  const int m = side - 2;  // interior nodes per side
  const double h = 1.0 / (side - 1);
  auto at = [&](int i, int j) { return a[static_cast<std::size_t>(i) * side + j]; };
  auto id = [&](int i, int j) { return (i - 1) * m + (j - 1); };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * m * 5);
  Eigen::VectorXd b(m * m);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      const double c = at(i, j);
      const double faces[4] = {0.5 * (c + at(i - 1, j)), 0.5 * (c + at(i + 1, j)), 0.5 * (c + at(i, j - 1)),
                               0.5 * (c + at(i, j + 1))};
      const int ni[4] = {i - 1, i + 1, i, i};
      const int nj[4] = {j, j, j - 1, j + 1};
      double diag = 0.0;
      for (int q = 0; q < 4; ++q) {
        diag += faces[q];
        if (ni[q] >= 1 && ni[q] <= m && nj[q] >= 1 && nj[q] <= m) trip.emplace_back(id(i, j), id(ni[q], nj[q]), -faces[q]);
      }
      trip.emplace_back(id(i, j), id(i, j), diag);
      b[id(i, j)] = (f.empty() ? 1.0 : f[static_cast<std::size_t>(i) * side + j]) * h * h;
    }
  }
  Eigen::SparseMatrix<double> K(m * m, m * m);
  K.setFromTriplets(trip.begin(), trip.end());

  std::vector<double> u(total, 0.0);
  if (b.norm() == 0.0) return u;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tolerance);
  cg.setMaxIterations(std::max(1000, 20 * m * m));
  cg.compute(K);
  const Eigen::VectorXd x = cg.solve(b);
  // The CG recurrence can drift from the true residual, so check it directly.
  const double achieved = x.allFinite() ? (b - K * x).norm() / b.norm() : HUGE_VAL;
  if (cg.info() != Eigen::Success || !(achieved <= 10 * tolerance)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "conjugate gradients did not reach relative residual %.3g (true residual %.3g after %ld iterations)",
                  tolerance, achieved, static_cast<long>(cg.iterations()));
    throw SolverError(msg);
  }
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) u[static_cast<std::size_t>(i) * side + j] = x[id(i, j)];
  return u;
}

std::vector<double> threshold_coefficient(std::span<const double> field, double hi, double lo) {
  std::vector<double> out(field.size());
  std::transform(field.begin(), field.end(), out.begin(), [&](double v) { return v >= 0.0 ? hi : lo; });
  return out;
}

std::vector<double> subsample(std::span<const double> field, int factor) {
  if (factor < 1 || field.size() % factor != 0)
    throw ShapeError("subsample factor " + std::to_string(factor) + " does not divide length " +
                     std::to_string(field.size()));
  std::vector<double> out(field.size() / factor);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = field[i * factor];
  return out;
}

std::vector<double> subsample_2d(std::span<const double> field, int side, int factor) {
  if (side < 1 || field.size() != static_cast<std::size_t>(side) * side)
    throw ShapeError("field is not side x side");
  if (factor < 1 || side % factor != 0)
    throw ShapeError("subsample factor " + std::to_string(factor) + " does not divide side " +
                     std::to_string(side));
  const int s = side / factor;
  std::vector<double> out(static_cast<std::size_t>(s) * s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      out[static_cast<std::size_t>(i) * s + j] = field[static_cast<std::size_t>(i) * factor * side + j * factor];
  return out;
}

}  // namespace mwt
