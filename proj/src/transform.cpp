#include "mwt/transform.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "mwt/error.hpp"

namespace mwt {

CoeffArray CoeffArray::zeros(int k, int dims, int side, int components) {
  CoeffArray a;
  a.k = k;
  a.dims = dims;
  a.side = side;
  a.components = components;
  a.data.assign(static_cast<std::size_t>(a.cells()) * a.cell_size(), 0.0);
  return a;
}

int dyadic_level(std::size_t length) {
  if (length == 0 || (length & (length - 1)) != 0)
    throw ShapeError("length " + std::to_string(length) + " is not a power of two");
  int n = 0;
  while ((std::size_t{1} << n) < length) ++n;
  return n;
}

KronBank kron_bank(const FilterBank& fb) {
  using Eigen::kroneckerProduct;
  KronBank kb;
  kb.k = fb.k;
  const Eigen::MatrixXd* H[2] = {&fb.H0, &fb.H1};
  const Eigen::MatrixXd* G[2] = {&fb.G0, &fb.G1};
  const Eigen::MatrixXd* S[2] = {&fb.Sigma0, &fb.Sigma1};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int c = 2 * a + b;
      kb.H[c] = kroneckerProduct(*H[a], *H[b]);
      kb.G[0][c] = kroneckerProduct(*H[a], *G[b]);
      kb.G[1][c] = kroneckerProduct(*G[a], *H[b]);
      kb.G[2][c] = kroneckerProduct(*G[a], *G[b]);
      kb.Sigma[c] = kroneckerProduct(*S[a], *S[b]);
    }
  }
  return kb;
}

namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  return out;
}

// y += M x, with M row-major b x b.
inline void gemv_acc(const double* M, const double* x, double* y, int b) {
  for (int i = 0; i < b; ++i) {
    double acc = 0.0;
    const double* row = M + i * b;
    for (int j = 0; j < b; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y += M^T x
inline void gemv_t_acc(const double* M, const double* x, double* y, int b) {
  for (int i = 0; i < b; ++i) {
    const double xi = x[i];
    const double* row = M + i * b;
    for (int j = 0; j < b; ++j) y[j] += row[j] * xi;
  }
}

}  // namespace

Ladder::Ladder(const FilterBank& fb, int dims) : k_(fb.k), dims_(dims) {
  if (dims != 1 && dims != 2) throw ShapeError("only 1-D and 2-D fields are supported");
  if (dims == 1) {
    block_ = k_;
    const Eigen::MatrixXd* H[2] = {&fb.H0, &fb.H1};
    const Eigen::MatrixXd* G[2] = {&fb.G0, &fb.G1};
    const Eigen::MatrixXd* S[2] = {&fb.Sigma0, &fb.Sigma1};
    for (int c = 0; c < 2; ++c) {
      dec_s_.push_back(row_major(*H[c]));
      dec_d_.push_back(row_major(*G[c]));
      rec_s_.push_back(row_major(*S[c] * H[c]->transpose()));
      rec_d_.push_back(row_major(*S[c] * G[c]->transpose()));
    }
  } else {
    block_ = k_ * k_;
    const KronBank kb = kron_bank(fb);
    dec_d_.resize(12);
    rec_d_.resize(12);
    for (int c = 0; c < 4; ++c) {
      dec_s_.push_back(row_major(kb.H[c]));
      rec_s_.push_back(row_major(kb.Sigma[c] * kb.H[c].transpose()));
      for (int t = 0; t < 3; ++t) {
        dec_d_[t * 4 + c] = row_major(kb.G[t][c]);
        rec_d_[t * 4 + c] = row_major(kb.Sigma[c] * kb.G[t][c].transpose());
      }
    }
  }
}

int Ladder::child_offset(int cell, int child, int side) const {
  if (dims_ == 1) return 2 * cell + child;
  const int half = side / 2;
  const int l1 = cell / half, l2 = cell % half;
  return (2 * l1 + child / 2) * side + (2 * l2 + child % 2);
}

void Ladder::decompose(std::span<const double> fine, int side, int groups, std::span<double> s,
                       std::span<double> d) const {
  const int b = block_, nc = children(), nt = components();
  const int coarse_cells = dims_ == 1 ? side / 2 : (side / 2) * (side / 2);
  const int fine_stride = groups * b;
  for (int cell = 0; cell < coarse_cells; ++cell) {
    for (int g = 0; g < groups; ++g) {
      double* so = s.data() + (static_cast<std::size_t>(cell) * groups + g) * b;
      double* dout = d.data() + (static_cast<std::size_t>(cell) * groups + g) * nt * b;
      std::fill(so, so + b, 0.0);
      std::fill(dout, dout + nt * b, 0.0);
      for (int c = 0; c < nc; ++c) {
        const double* x =
            fine.data() + static_cast<std::size_t>(child_offset(cell, c, side)) * fine_stride + g * b;
        gemv_acc(dec_s_[c].data(), x, so, b);
        for (int t = 0; t < nt; ++t) gemv_acc(dec_d_[t * nc + c].data(), x, dout + t * b, b);
      }
    }
  }
}

void Ladder::reconstruct(std::span<const double> s, std::span<const double> d, int side,
                         int groups, std::span<double> fine) const {
  const int b = block_, nc = children(), nt = components();
  const int coarse_cells = dims_ == 1 ? side / 2 : (side / 2) * (side / 2);
  const int fine_stride = groups * b;
  for (int cell = 0; cell < coarse_cells; ++cell) {
    for (int g = 0; g < groups; ++g) {
      const double* si = s.data() + (static_cast<std::size_t>(cell) * groups + g) * b;
      const double* di = d.data() + (static_cast<std::size_t>(cell) * groups + g) * nt * b;
      for (int c = 0; c < nc; ++c) {
        double* y =
            fine.data() + static_cast<std::size_t>(child_offset(cell, c, side)) * fine_stride + g * b;
        std::fill(y, y + b, 0.0);
        gemv_acc(rec_s_[c].data(), si, y, b);
        for (int t = 0; t < nt; ++t) gemv_acc(rec_d_[t * nc + c].data(), di + t * b, y, b);
      }
    }
  }
}

void Ladder::decompose_adjoint(std::span<const double> gs, std::span<const double> gd, int side,
                               int groups, std::span<double> gfine) const {
  const int b = block_, nc = children(), nt = components();
  const int coarse_cells = dims_ == 1 ? side / 2 : (side / 2) * (side / 2);
  const int fine_stride = groups * b;
  for (int cell = 0; cell < coarse_cells; ++cell) {
    for (int g = 0; g < groups; ++g) {
      const double* si = gs.data() + (static_cast<std::size_t>(cell) * groups + g) * b;
      const double* di = gd.data() + (static_cast<std::size_t>(cell) * groups + g) * nt * b;
      for (int c = 0; c < nc; ++c) {
        double* y =
            gfine.data() + static_cast<std::size_t>(child_offset(cell, c, side)) * fine_stride + g * b;
        std::fill(y, y + b, 0.0);
        gemv_t_acc(dec_s_[c].data(), si, y, b);
        for (int t = 0; t < nt; ++t) gemv_t_acc(dec_d_[t * nc + c].data(), di + t * b, y, b);
      }
    }
  }
}

void Ladder::reconstruct_adjoint(std::span<const double> gfine, int side, int groups,
                                 std::span<double> gs, std::span<double> gd) const {
  const int b = block_, nc = children(), nt = components();
  const int coarse_cells = dims_ == 1 ? side / 2 : (side / 2) * (side / 2);
  const int fine_stride = groups * b;
  for (int cell = 0; cell < coarse_cells; ++cell) {
    for (int g = 0; g < groups; ++g) {
      double* so = gs.data() + (static_cast<std::size_t>(cell) * groups + g) * b;
      double* dout = gd.data() + (static_cast<std::size_t>(cell) * groups + g) * nt * b;
      std::fill(so, so + b, 0.0);
      std::fill(dout, dout + nt * b, 0.0);
      for (int c = 0; c < nc; ++c) {
        const double* x =
            gfine.data() + static_cast<std::size_t>(child_offset(cell, c, side)) * fine_stride + g * b;
        gemv_t_acc(rec_s_[c].data(), x, so, b);
        for (int t = 0; t < nt; ++t) gemv_t_acc(rec_d_[t * nc + c].data(), x, dout + t * b, b);
      }
    }
  }
}

namespace {

void check_shape(const FilterBank& fb, const CoeffArray& a) {
  if (a.dims != 1 && a.dims != 2) throw ShapeError("coefficient arrays must be 1-D or 2-D");
  if (a.k != fb.k)
    throw ShapeError("coefficient order " + std::to_string(a.k) + " does not match filter order " +
                     std::to_string(fb.k));
  if (a.components != 1) throw ShapeError("expected an s-array with one component");
  dyadic_level(static_cast<std::size_t>(a.side));
  if (a.data.size() != static_cast<std::size_t>(a.cells()) * a.cell_size())
    throw ShapeError("coefficient storage does not match its declared shape");
}

}  // namespace

MultiresCoeffs decompose(const FilterBank& fb, const CoeffArray& s_fine, int L) {
  check_shape(fb, s_fine);
  const int N = dyadic_level(static_cast<std::size_t>(s_fine.side));
  if (L < 0 || L >= N)
    throw ScaleError("coarsest scale " + std::to_string(L) + " must satisfy 0 <= L < " +
                     std::to_string(N));
  const Ladder ladder(fb, s_fine.dims);
  MultiresCoeffs out;
  out.k = fb.k;
  out.dims = s_fine.dims;
  out.finest = N;
  out.coarsest = L;
  out.d.resize(N - L);
  CoeffArray cur = s_fine;
  for (int n = N - 1; n >= L; --n) {
    CoeffArray s = CoeffArray::zeros(fb.k, cur.dims, cur.side / 2);
    CoeffArray d = CoeffArray::zeros(fb.k, cur.dims, cur.side / 2, ladder.components());
    ladder.decompose(cur.data, cur.side, 1, s.data, d.data);
    out.d_at(n) = std::move(d);
    cur = std::move(s);
  }
  out.s = std::move(cur);
  return out;
}

CoeffArray reconstruct(const FilterBank& fb, const MultiresCoeffs& coeffs) {
  if (coeffs.k != fb.k) throw ShapeError("coefficient order does not match the filter bank");
  if (coeffs.coarsest < 0 || coeffs.coarsest >= coeffs.finest ||
      static_cast<int>(coeffs.d.size()) != coeffs.finest - coeffs.coarsest)
    throw ScaleError("inconsistent scale range in multiresolution coefficients");
  const Ladder ladder(fb, coeffs.dims);
  CoeffArray cur = coeffs.s;
  check_shape(fb, cur);
  if (cur.side != (1 << coeffs.coarsest)) throw ShapeError("coarsest s-array has the wrong side");
  for (int n = coeffs.coarsest; n < coeffs.finest; ++n) {
    const CoeffArray& d = coeffs.d_at(n);
    if (d.side != cur.side || d.components != ladder.components() || d.k != fb.k ||
        d.data.size() != static_cast<std::size_t>(d.cells()) * d.cell_size())
      throw ShapeError("d-array at scale " + std::to_string(n) + " has the wrong shape");
    CoeffArray fine = CoeffArray::zeros(fb.k, cur.dims, cur.side * 2);
    ladder.reconstruct(cur.data, d.data, fine.side, 1, fine.data);
    cur = std::move(fine);
  }
  return cur;
}

namespace {

// Quadrature nodes and basis values shared by the kernel routines.
struct CellRule {
  std::vector<double> t, w;
  Eigen::MatrixXd phi;  // k x q
};

CellRule cell_rule(const FilterBank& fb) {
  const auto rule = make_quadrature(fb.kind, 2 * fb.k);
  const auto basis = make_basis(fb.kind, fb.k);
  CellRule cr{rule.nodes, rule.weights, Eigen::MatrixXd(fb.k, rule.size())};
  std::vector<double> v(fb.k);
  for (int q = 0; q < rule.size(); ++q) {
    basis.eval_into(rule.nodes[q], v);
    for (int j = 0; j < fb.k; ++j) cr.phi(j, q) = v[j];
  }
  return cr;
}

// Rows: finest scaling coefficients; columns: quadrature samples. Applying it
// to samples f(x_q) gives <f, phi^N_{jl}> in the scale-N measure.
Eigen::MatrixXd projection_matrix(const CellRule& cr, int k, int N) {
  const int cells = 1 << N, q = static_cast<int>(cr.t.size());
  const double scale = std::pow(2.0, -0.5 * N);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(cells * k, cells * q);
  for (int l = 0; l < cells; ++l)
    for (int j = 0; j < k; ++j)
      for (int m = 0; m < q; ++m) P(l * k + j, l * q + m) = scale * cr.w[m] * cr.phi(j, m);
  return P;
}

std::vector<double> sample_points(const CellRule& cr, int N) {
  const int cells = 1 << N, q = static_cast<int>(cr.t.size());
  std::vector<double> x(static_cast<std::size_t>(cells) * q);
  for (int l = 0; l < cells; ++l)
    for (int m = 0; m < q; ++m) x[l * q + m] = (l + cr.t[m]) / cells;
  return x;
}

// Two-scale change of basis at coefficient scale n: (s^{n+1}) -> (s^n ; d^n).
Eigen::MatrixXd two_scale(const FilterBank& fb, int n) {
  const int k = fb.k, half = 1 << n;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2 * half * k, 2 * half * k);
  for (int l = 0; l < half; ++l) {
    D.block(l * k, 2 * l * k, k, k) = fb.H0;
    D.block(l * k, (2 * l + 1) * k, k, k) = fb.H1;
    D.block((half + l) * k, 2 * l * k, k, k) = fb.G0;
    D.block((half + l) * k, (2 * l + 1) * k, k, k) = fb.G1;
  }
  return D;
}

Eigen::MatrixXd two_scale_inverse(const FilterBank& fb, int n) {
  const int k = fb.k, half = 1 << n;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * half * k, 2 * half * k);
  for (int l = 0; l < half; ++l) {
    S.block(2 * l * k, 2 * l * k, k, k) = fb.Sigma0;
    S.block((2 * l + 1) * k, (2 * l + 1) * k, k, k) = fb.Sigma1;
  }
  return S * two_scale(fb, n).transpose();
}

}  // namespace

Eigen::MatrixXd finest_kernel_matrix(const Kernel2& K, const FilterBank& fb, int N) {
  if (N < 0 || N > 8) throw ScaleError("kernel projection supports 0 <= N <= 8");
  const CellRule cr = cell_rule(fb);
  const auto x = sample_points(cr, N);
  const Eigen::Index m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd samples(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = K(x[i], x[j]);
      if (!std::isfinite(v))
        throw KernelEvaluationError("kernel is not finite at (" + std::to_string(x[i]) + ", " +
                                    std::to_string(x[j]) + ")");
      samples(i, j) = v;
    }
  }
  const Eigen::MatrixXd P = projection_matrix(cr, fb.k, N);
  return P * samples * P.transpose();
}

KernelProjection project_kernel(const Kernel2& K, const FilterBank& fb, int N, int L,
                                double threshold) {
  if (L < 0 || L >= N) throw ScaleError("kernel projection needs 0 <= L < N");
  KernelProjection kp;
  kp.k = fb.k;
  kp.finest = N;
  kp.coarsest = L;
  kp.threshold = threshold;
  kp.A.resize(N - L);
  kp.B.resize(N - L);
  kp.C.resize(N - L);

  Eigen::MatrixXd T = finest_kernel_matrix(K, fb, N);
  for (int n = N - 1; n >= L; --n) {
    const Eigen::Index h = Eigen::Index{fb.k} << n;
    const Eigen::MatrixXd M = two_scale(fb, n) * T * two_scale_inverse(fb, n);
    kp.A[n - L] = M.block(h, h, h, h);
    kp.B[n - L] = M.block(h, 0, h, h);
    kp.C[n - L] = M.block(0, h, h, h);
    T = M.block(0, 0, h, h);
  }
  kp.T = std::move(T);
  return kp;
}

std::vector<double> apply_nonstandard(const KernelProjection& kp, const FilterBank& fb,
                                      std::span<const double> s_fine) {
  if (s_fine.size() != (static_cast<std::size_t>(fb.k) << kp.finest))
    throw ShapeError("input length does not match the projection's finest scale");
  const Ladder ladder(fb, 1);
  const int levels = kp.finest - kp.coarsest;
  std::vector<Eigen::VectorXd> s(levels), d(levels);
  Eigen::VectorXd cur = Eigen::Map<const Eigen::VectorXd>(s_fine.data(), s_fine.size());
  for (int n = kp.finest - 1; n >= kp.coarsest; --n) {
    Eigen::VectorXd sc(cur.size() / 2), dc(cur.size() / 2);
    ladder.decompose({cur.data(), static_cast<std::size_t>(cur.size())}, 2 << n, 1,
                     {sc.data(), static_cast<std::size_t>(sc.size())},
                     {dc.data(), static_cast<std::size_t>(dc.size())});
    s[n - kp.coarsest] = sc;
    d[n - kp.coarsest] = dc;
    cur = std::move(sc);
  }

  Eigen::VectorXd us = kp.T * s[0];
  for (int n = kp.coarsest; n < kp.finest; ++n) {
    const int i = n - kp.coarsest;
    const Eigen::VectorXd ud = kp.A[i] * d[i] + kp.B[i] * s[i];
    us += kp.C[i] * d[i];
    Eigen::VectorXd fine(2 * us.size());
    ladder.reconstruct({us.data(), static_cast<std::size_t>(us.size())},
                       {ud.data(), static_cast<std::size_t>(ud.size())}, 2 << n, 1,
                       {fine.data(), static_cast<std::size_t>(fine.size())});
    us = std::move(fine);
  }
  return {us.data(), us.data() + us.size()};
}

CoeffArray project_function(const std::function<double(double)>& f, const FilterBank& fb,
                            int N) {
  const CellRule cr = cell_rule(fb);
  const auto x = sample_points(cr, N);
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(x[i]);
  const Eigen::VectorXd s = projection_matrix(cr, fb.k, N) * v;
  CoeffArray out = CoeffArray::zeros(fb.k, 1, 1 << N);
  for (Eigen::Index i = 0; i < s.size(); ++i) out.data[i] = s[i];
  return out;
}

double mask_fraction(const Eigen::MatrixXd& m, double threshold) {
  if (m.size() == 0) return 0.0;
  return static_cast<double>((m.array().abs() > threshold).count()) / static_cast<double>(m.size());
}

}  // namespace mwt
