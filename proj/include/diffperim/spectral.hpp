#pragma once

// FFTW-backed real transforms on periodic grids and the spectral heat
// channel p_t = P_t p_0 built on top of them.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "diffperim/error.hpp"
#include "diffperim/grid_field.hpp"

namespace diffperim {

namespace fft_detail {

// The FFTW planner is not thread-safe; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

/// Forward/inverse real transforms for one lattice shape.
class RealTransform {
 public:
  RealTransform(int n, const std::array<int, 3>& shape) : n_(n), shape_(shape) {
    real_size_ = 1;
    for (int i = 0; i < n; ++i) real_size_ *= static_cast<std::size_t>(shape[i]);
    complex_shape_ = {1, 1, 1};
    for (int i = 0; i < n; ++i) complex_shape_[i] = shape[i];
    complex_shape_[n - 1] = shape[n - 1] / 2 + 1;
    complex_size_ = static_cast<std::size_t>(complex_shape_[0]) * complex_shape_[1] * complex_shape_[2];
    real_.reset(fftw_alloc_real(real_size_));
    spec_.reset(fftw_alloc_complex(complex_size_));
    std::lock_guard lock(planner_mutex());
    forward_.reset(fftw_plan_dft_r2c(n, shape.data(), real_.get(), spec_.get(), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r(n, shape.data(), spec_.get(), real_.get(), FFTW_ESTIMATE));
  }

  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }
  const std::array<int, 3>& complex_shape() const { return complex_shape_; }

  /// Unnormalized forward transform.
  void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) const {
    std::copy(in.begin(), in.end(), real_.get());
    fftw_execute(forward_.get());
    out.resize(complex_size_);
    const auto* s = reinterpret_cast<const std::complex<double>*>(spec_.get());
    std::copy(s, s + complex_size_, out.begin());
  }

  /// Inverse transform divided by the point count.
  void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) const {
    auto* s = reinterpret_cast<std::complex<double>*>(spec_.get());
    std::copy(in.begin(), in.end(), s);
    fftw_execute(inverse_.get());
    out.resize(real_size_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < real_size_; ++i) out[i] = real_.get()[i] * scale;
  }

 private:
  int n_;
  std::array<int, 3> shape_;
  std::array<int, 3> complex_shape_{};
  std::size_t real_size_ = 0, complex_size_ = 0;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  Plan forward_, inverse_;
};

}  // namespace fft_detail

/// Angular wavenumbers 2 pi m / L of one axis in FFTW half-complex order.
inline std::vector<double> axis_wavenumbers(int cells, double length, bool halved) {
  const int count = halved ? cells / 2 + 1 : cells;
  std::vector<double> k(count);
  for (int j = 0; j < count; ++j) {
    const int m = (halved || j <= cells / 2) ? j : j - cells;
    k[j] = 2.0 * std::numbers::pi * m / length;
  }
  return k;
}

/// Heat flow d_t u = Laplacian u on a periodic box, solved exactly in
/// Fourier space. A cell-average input is read as the piecewise-constant
/// function it describes, so its Fourier coefficients carry the box-filter
/// symbol prod sinc(k_i h_i / 2); outputs are point samples at cell centers.
class HeatChannel {
 public:
  explicit HeatChannel(GridField initial)
      : initial_(std::move(initial)), transform_(initial_.n, initial_.shape) {
    const int n = initial_.n;
    for (int i = 0; i < 3; ++i) {
      const bool active = i < n;
      k_[i] = active ? axis_wavenumbers(initial_.shape[i], initial_.box[i], i == n - 1) : std::vector<double>{0.0};
      nyquist_[i].assign(k_[i].size(), false);
      if (active && initial_.shape[i] % 2 == 0) {
        const std::size_t ny = static_cast<std::size_t>(initial_.shape[i] / 2);
        nyquist_[i][ny] = true;
      }
      sinc_[i].assign(k_[i].size(), 1.0);
      if (active && initial_.sampling == Sampling::CellAverage) {
        const double h = initial_.spacing(i);
        for (std::size_t j = 0; j < k_[i].size(); ++j) {
          const double x = 0.5 * k_[i][j] * h;
          sinc_[i][j] = x == 0.0 ? 1.0 : std::sin(x) / x;
        }
      }
    }
    transform_.forward(initial_.values, spectrum_);
    const auto& cs = transform_.complex_shape();
    std::size_t idx = 0;
    for (int a = 0; a < cs[0]; ++a)
      for (int b = 0; b < cs[1]; ++b)
        for (int c = 0; c < cs[2]; ++c, ++idx) spectrum_[idx] *= sinc_[0][a] * sinc_[1][b] * sinc_[2][c];
  }

  const GridField& initial() const { return initial_; }

  /// p_t at cell centers, clamped into [0, 1]; t = 0 returns the input.
  GridField field_at(double t) const {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "euclidean_flow", "heat flow needs t >= 0");
    if (t == 0.0) return initial_;
    std::vector<std::complex<double>> work(spectrum_.size());
    apply_symbol(t, work, -1);
    GridField out = initial_;
    transform_.inverse(work, out.values);
    out.sampling = Sampling::Point;
    out.clamp_excess = clamp(out.values);
    return out;
  }

  /// Unclamped p_t values (maximum-principle diagnostics).
  std::vector<double> raw_values_at(double t) const {
    std::vector<std::complex<double>> work(spectrum_.size());
    apply_symbol(t, work, -1);
    std::vector<double> out;
    transform_.inverse(work, out);
    return out;
  }

  /// Spectral partial derivative of p_t along each active axis.
  std::vector<std::vector<double>> gradient_at(double t) const {
    std::vector<std::vector<double>> grad(initial_.n);
    std::vector<std::complex<double>> work(spectrum_.size());
    for (int axis = 0; axis < initial_.n; ++axis) {
      apply_symbol(t, work, axis);
      transform_.inverse(work, grad[axis]);
    }
    return grad;
  }

 private:
  // Multiplies the stored spectrum by exp(-t|k|^2), and by i k_axis when
  // axis >= 0 (the Nyquist mode of a derivative is dropped).
  void apply_symbol(double t, std::vector<std::complex<double>>& out, int axis) const {
    const auto& cs = transform_.complex_shape();
    std::size_t idx = 0;
    for (int a = 0; a < cs[0]; ++a) {
      const double ka2 = k_[0][a] * k_[0][a];
      for (int b = 0; b < cs[1]; ++b) {
        const double kb2 = ka2 + k_[1][b] * k_[1][b];
        for (int c = 0; c < cs[2]; ++c, ++idx) {
          const double k2 = kb2 + k_[2][c] * k_[2][c];
          std::complex<double> v = spectrum_[idx] * std::exp(-t * k2);
          if (axis >= 0) {
            const int j = axis == 0 ? a : (axis == 1 ? b : c);
            v = nyquist_[axis][j] ? std::complex<double>(0.0) : v * std::complex<double>(0.0, k_[axis][j]);
          }
          out[idx] = v;
        }
      }
    }
  }

  static double clamp(std::vector<double>& values) {
    double excess = 0.0;
    for (double& v : values) {
      if (v < 0.0) {
        excess = std::max(excess, -v);
        v = 0.0;
      } else if (v > 1.0) {
        excess = std::max(excess, v - 1.0);
        v = 1.0;
      }
    }
    return excess;
  }

  GridField initial_;
  fft_detail::RealTransform transform_;
  std::vector<std::complex<double>> spectrum_;
  std::array<std::vector<double>, 3> k_, sinc_;
  std::array<std::vector<bool>, 3> nyquist_;
};

}  // namespace diffperim
