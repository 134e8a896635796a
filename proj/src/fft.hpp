#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <vector>

namespace mwt::detail {

// Thin RAII wrappers over FFTW plans with private aligned buffers. Forward
// transforms are unnormalised; inverse transforms compute the plain sum
// sum_m c_m exp(+2 pi i m j / n) without the 1/n factor.

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    real_ = fftw_alloc_real(n);
    spec_ = fftw_alloc_complex(n / 2 + 1);
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  void forward(const double* in, std::complex<double>* out) {
    std::memcpy(real_, in, sizeof(double) * n_);
    fftw_execute(fwd_);
    std::memcpy(static_cast<void*>(out), spec_, sizeof(fftw_complex) * bins());
  }

  void inverse(const std::complex<double>* in, double* out) {
    std::memcpy(spec_, static_cast<const void*>(in), sizeof(fftw_complex) * bins());
    fftw_execute(inv_);
    std::memcpy(out, real_, sizeof(double) * n_);
  }

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_, inv_;
};

class RealFft2d {
 public:
  explicit RealFft2d(int n) : n_(n) {
    real_ = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    spec_ = fftw_alloc_complex(static_cast<std::size_t>(n) * (n / 2 + 1));
    fwd_ = fftw_plan_dft_r2c_2d(n, n, real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(n, n, spec_, real_, FFTW_ESTIMATE);
  }
  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;
  ~RealFft2d() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  std::size_t bins() const { return static_cast<std::size_t>(n_) * (n_ / 2 + 1); }

  void forward(const double* in, std::complex<double>* out) {
    std::memcpy(real_, in, sizeof(double) * n_ * n_);
    fftw_execute(fwd_);
    std::memcpy(static_cast<void*>(out), spec_, sizeof(fftw_complex) * bins());
  }

  void inverse(const std::complex<double>* in, double* out) {
    std::memcpy(spec_, static_cast<const void*>(in), sizeof(fftw_complex) * bins());
    fftw_execute(inv_);
    std::memcpy(out, real_, sizeof(double) * n_ * n_);
  }

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_, inv_;
};

/// In-place DCT-I along every axis of a 1-D or 2-D array (FFTW REDFT00).
inline void dct1(std::vector<double>& data, int n, int dims) {
  double* buf = fftw_alloc_real(data.size());
  std::memcpy(buf, data.data(), sizeof(double) * data.size());
  fftw_plan plan = dims == 1 ? fftw_plan_r2r_1d(n, buf, buf, FFTW_REDFT00, FFTW_ESTIMATE)
                             : fftw_plan_r2r_2d(n, n, buf, buf, FFTW_REDFT00, FFTW_REDFT00, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::memcpy(data.data(), buf, sizeof(double) * data.size());
  fftw_destroy_plan(plan);
  fftw_free(buf);
}

}  // namespace mwt::detail
