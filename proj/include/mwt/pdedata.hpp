#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwt/model.hpp"

namespace mwt {

/// Gaussian random field N(0, sigma2 (-Laplacian + tau^2 I)^(-alpha)).
/// Periodic fields use the eigenvalues 4 pi^2 |m|^2 on the unit interval or
/// square; non-periodic ones use the Neumann cosine basis with eigenvalues
/// pi^2 |m|^2 on nodes i / (n - 1).
struct GrfSpec {
  double sigma2 = 1.0;
  double tau = 1.0;
  double alpha = 2.0;
  int dims = 1;
  bool periodic = true;

  /// Throws SpecError unless sigma2 > 0, tau > 0, alpha > dims / 2.
  void validate() const;
};

/// One draw of the field on a resolution^dims grid (row-major for 2-D).
std::vector<double> sample_grf(const GrfSpec& spec, int resolution, std::uint64_t seed);

/// exp(-2 sin^2(pi dx / period) / smoothing^2)
double sqexp_periodic_kernel(double dx, double smoothing, double period);

/// Draws from the periodic squared-exponential process on x_i = i / n. The
/// Gram matrix is factored once; negative eigenvalues are clipped to zero.
class SqExpSampler {
 public:
  SqExpSampler(double smoothing, double period, int n);
  std::vector<double> sample(std::uint64_t seed) const;
  double min_eigenvalue() const { return min_eigenvalue_; }
  const std::vector<double>& gram() const { return gram_; }
  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> gram_;
  std::vector<double> factor_;  // column-major V sqrt(max(Lambda, 0))
  double min_eigenvalue_ = 0.0;
};

std::vector<double> sample_sqexp_periodic(double smoothing, double period, int n, std::uint64_t seed);

/// Band-limited periodic random function: i.i.d. normal Fourier coefficients
/// for |m| <= ceil(1 / lambda), rescaled to unit empirical standard deviation.
std::vector<double> sample_smooth_random(double lambda, int n, std::uint64_t seed);
int smooth_random_cutoff(double lambda);

struct SpectralSolverOptions {
  int resolution = 0;  // internal grid; 0 selects the equation default
  double dt = 0.0;     // 0 selects the equation default
};

/// u_t = -0.5 u u_x - u_xxx on [0, 1) periodic, ETDRK4 at 2^10 points with
/// dt <= 1e-5. Returns u(., T) on the grid of u0.
std::vector<double> solve_kdv(std::span<const double> u0, double T = 1.0,
                              SpectralSolverOptions options = {});

/// u_t + u u_x = nu u_xx on (0, 2 pi) periodic, ETDRK4 at 2^13 points.
std::vector<double> solve_burgers(std::span<const double> u0, double nu = 0.1, double T = 1.0,
                                  SpectralSolverOptions options = {});

/// d^order u / dx^order - omega^2 u = f on [0, 1], with u(0) = u(1) = u'(0) = 0
/// and, for order 4, u'(1) = 0, discretised on the nodes j / M, j = 0..M with
/// `stencil`-point finite differences. The dense system is factored once.
/// Throws ResonanceError when omega sits on an eigenfrequency: the
/// reciprocal condition falls below 1e-5 of the omega = 0 operator's.
class BeamSolver {
 public:
  BeamSolver(int intervals, double omega, int order, int stencil = 9);
  ~BeamSolver();
  BeamSolver(BeamSolver&&) noexcept;
  BeamSolver& operator=(BeamSolver&&) noexcept;

  /// f on the M + 1 nodes; returns u on the same nodes. Throws SolverError if
  /// the interior residual |D u - omega^2 u - f| / |f| exceeds 1e-6.
  std::vector<double> solve(std::span<const double> f) const;
  double resonance_ratio() const;
  int intervals() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

std::vector<double> solve_beam(std::span<const double> f, double omega, int order, int stencil = 9);

/// -div(a grad u) = f on the unit square with u = 0 on the boundary; a and f
/// live on side x side nodes i / (side - 1). An empty f means f = 1.
std::vector<double> solve_darcy(std::span<const double> a, int side, std::span<const double> f = {},
                                double tolerance = 1e-10);

/// Maps a field to hi where it is >= 0 and lo elsewhere.
std::vector<double> threshold_coefficient(std::span<const double> field, double hi = 12.0,
                                          double lo = 3.0);

/// Every factor-th point starting at index 0.
std::vector<double> subsample(std::span<const double> field, int factor);
std::vector<double> subsample_2d(std::span<const double> field, int side, int factor);

/// Input/output pairs plus the metadata needed to regenerate them.
struct Dataset {
  std::string equation;
  std::vector<std::pair<std::string, std::string>> metadata;
  int dims = 1;
  int count = 0;
  int side = 0;
  std::vector<double> inputs;
  std::vector<double> outputs;

  int points() const { return dims == 1 ? side : side * side; }
  std::string meta(const std::string& key, const std::string& fallback = "") const;
  /// Samples [first, first + n) as a training set.
  SampleSet slice(int first, int n) const;
};

/// "MWTD", version byte, equation name, metadata pairs, dims/count/side, then
/// inputs and outputs as little-endian float64.
void write_dataset(const Dataset& data, std::ostream& out);
Dataset read_dataset(std::istream& in);
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

/// Strided copy of every sample at side / factor.
Dataset subsample_dataset(const Dataset& data, int factor);

struct DatagenConfig {
  std::string equation = "burgers";  // identity, kdv, burgers, beam3, beam4, darcy
  int count = 10;
  int resolution = 256;
  std::uint64_t seed = 0;
  double nu = 0.1;
  double omega = 215.0;
  double lambda = 0.25;  // identity inputs
  int solver_resolution = 0;
  double dt = 0.0;
  int beam_refine = 4;
};

/// Sample i draws from Rng::derive(seed, i), so samples do not depend on
/// generation order. Throws SolverDivergenceError naming the sample index.
Dataset generate_dataset(const DatagenConfig& config);

}  // namespace mwt
