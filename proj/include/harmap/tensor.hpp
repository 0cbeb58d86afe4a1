#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "harmap/grid.hpp"

namespace harmap {

enum class Variance : unsigned char { Co, Contra };

enum class Symmetry : unsigned char { None, LastTwo, All };

using Slots = std::vector<Variance>;

inline Slots co_slots(int rank) { return Slots(rank, Variance::Co); }

/// Rank-(p,q) real tensor field sampled on a periodic grid. Components are
/// stored fully expanded, component-major: each component is a contiguous
/// scalar field over the nodes.
class TensorField {
 public:
  TensorField() = default;

  TensorField(Grid grid, Slots slots, Symmetry sym = Symmetry::None)
      : grid_(std::move(grid)), slots_(std::move(slots)), sym_(sym) {
    ncomp_ = 1;
    for (size_t s = 0; s < slots_.size(); ++s) ncomp_ *= grid_.dim();
    data_.assign(static_cast<size_t>(ncomp_) * grid_.total_nodes(), 0.0);
  }

  static TensorField scalar(const Grid& g) { return TensorField(g, {}); }
  static TensorField one_form(const Grid& g) {
    return TensorField(g, co_slots(1));
  }
  static TensorField sym2(const Grid& g) {
    return TensorField(g, co_slots(2), Symmetry::All);
  }

  const Grid& grid() const { return grid_; }
  const Slots& slots() const { return slots_; }
  Symmetry symmetry() const { return sym_; }
  void set_symmetry(Symmetry s) { sym_ = s; }
  int rank() const { return static_cast<int>(slots_.size()); }
  int ncomp() const { return ncomp_; }
  int nnodes() const { return grid_.total_nodes(); }

  int covariant_rank() const {
    int p = 0;
    for (auto s : slots_)
      if (s == Variance::Co) ++p;
    return p;
  }
  int contravariant_rank() const { return rank() - covariant_rank(); }

  double* comp(int c) { return data_.data() + static_cast<size_t>(c) * nnodes(); }
  const double* comp(int c) const {
    return data_.data() + static_cast<size_t>(c) * nnodes();
  }

  double& value(int node) { return data_[node]; }
  double value(int node) const { return data_[node]; }

  double& at(int node, int i) { return comp(i)[node]; }
  double at(int node, int i) const { return comp(i)[node]; }
  double& at(int node, int i, int j) { return comp(i * grid_.dim() + j)[node]; }
  double at(int node, int i, int j) const {
    return comp(i * grid_.dim() + j)[node];
  }
  double& at(int node, int i, int j, int k) {
    const int n = grid_.dim();
    return comp((i * n + j) * n + k)[node];
  }
  double at(int node, int i, int j, int k) const {
    const int n = grid_.dim();
    return comp((i * n + j) * n + k)[node];
  }
  double& at(int node, int i, int j, int k, int l) {
    const int n = grid_.dim();
    return comp(((i * n + j) * n + k) * n + l)[node];
  }
  double at(int node, int i, int j, int k, int l) const {
    const int n = grid_.dim();
    return comp(((i * n + j) * n + k) * n + l)[node];
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  TensorField& operator+=(const TensorField& o) {
    require_same_shape(o, "operator+=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  TensorField& operator-=(const TensorField& o) {
    require_same_shape(o, "operator-=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  TensorField& operator*=(double c) {
    for (auto& v : data_) v *= c;
    return *this;
  }
  friend TensorField operator+(TensorField a, const TensorField& b) {
    a += b;
    return a;
  }
  friend TensorField operator-(TensorField a, const TensorField& b) {
    a -= b;
    return a;
  }
  friend TensorField operator*(double c, TensorField a) {
    a *= c;
    return a;
  }

  /// a += c*b
  void axpy(double c, const TensorField& b) {
    require_same_shape(b, "axpy");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += c * b.data_[i];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  void require_same_shape(const TensorField& o, const std::string& who) const {
    if (grid_ != o.grid_ || slots_ != o.slots_)
      throw Error(who + ": tensor field shape mismatch");
  }

 private:
  Grid grid_;
  Slots slots_;
  Symmetry sym_ = Symmetry::None;
  int ncomp_ = 1;
  std::vector<double> data_;
};

/// Componentwise spectral derivative along one coordinate axis. Exact for
/// fields band-limited below the Nyquist wavenumber.
inline TensorField partial_derivative(const TensorField& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim())
    throw Error("partial_derivative: axis out of range");
  const Eigen::MatrixXd& d = g.diff_matrix(axis);
  const int n = g.size(axis);
  const int stride = g.stride(axis);
  const int nlines = g.total_nodes() / n;
  const int block = stride * n;

  TensorField out(g, f.slots(), Symmetry::None);
  Eigen::VectorXd x(n), y(n);
  for (int c = 0; c < f.ncomp(); ++c) {
    const double* src = f.comp(c);
    double* dst = out.comp(c);
    for (int line = 0; line < nlines; ++line) {
      const int base = (line / stride) * block + (line % stride);
      for (int k = 0; k < n; ++k) x[k] = src[base + k * stride];
      y.noalias() = d * x;
      for (int k = 0; k < n; ++k) dst[base + k * stride] = y[k];
    }
  }
  return out;
}

/// Prepends a covariant slot holding the plain partial derivative along each
/// axis: (out)_{a I} = d_a f_I.
inline TensorField partial_derivative_stack(const TensorField& f) {
  const Grid& g = f.grid();
  Slots slots;
  slots.push_back(Variance::Co);
  for (auto s : f.slots()) slots.push_back(s);
  TensorField out(g, slots);
  for (int a = 0; a < g.dim(); ++a) {
    TensorField da = partial_derivative(f, a);
    for (int c = 0; c < f.ncomp(); ++c) {
      const double* src = da.comp(c);
      double* dst = out.comp(a * f.ncomp() + c);
      std::copy(src, src + g.total_nodes(), dst);
    }
  }
  return out;
}

/// Quadrature of f against a positive volume density: prod_a(2pi/N_a) *
/// sum_nodes f*vol. Spectrally exact on the torus for band-limited data.
inline double integrate(const TensorField& f, const TensorField& vol) {
  if (f.rank() != 0 || vol.rank() != 0)
    throw Error("integrate: scalar fields required");
  if (f.grid() != vol.grid()) throw Error("integrate: grid mismatch");
  const int total = f.nnodes();
  double acc = 0.0;
  for (int i = 0; i < total; ++i) {
    const double v = vol.value(i);
    if (!(v > 0.0))
      throw Error("integrate: non-positive volume density at node " +
                   std::to_string(i));
    acc += f.value(i) * v;
  }
  return acc * f.grid().cell_volume();
}

struct SpectralDiagnostics {
  double tail_fraction = 0.0;  // in [0,1]
};

namespace detail {

// Full discrete Fourier transform of one component, axis by axis.
inline std::vector<std::complex<double>> dft_component(const Grid& g,
                                                       const double* values) {
  const int total = g.total_nodes();
  std::vector<std::complex<double>> data(values, values + total);
  std::vector<std::complex<double>> line, out;
  for (int a = 0; a < g.dim(); ++a) {
    const int n = g.size(a);
    const int stride = g.stride(a);
    const int nlines = total / n;
    const int block = stride * n;
    line.assign(n, {});
    out.assign(n, {});
    std::vector<std::complex<double>> twiddle(n);
    for (int m = 0; m < n; ++m)
      twiddle[m] = std::polar(1.0, -kPeriod * m / n);
    for (int l = 0; l < nlines; ++l) {
      const int base = (l / stride) * block + (l % stride);
      for (int k = 0; k < n; ++k) line[k] = data[base + k * stride];
      for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) acc += line[j] * twiddle[(k * j) % n];
        out[k] = acc / double(n);
      }
      for (int k = 0; k < n; ++k) data[base + k * stride] = out[k];
    }
  }
  return data;
}

inline int signed_wavenumber(int k, int n) { return (k <= n / 2) ? k : k - n; }

}  // namespace detail

/// Fraction of spectral L2 energy carried by modes whose wavenumber along
/// some axis lies in the top third of the resolved band (|k_a| > N_a/3),
/// maximized over axes. Used as a resolution-adequacy guard.
inline SpectralDiagnostics spectral_diagnostics(const TensorField& f) {
  const Grid& g = f.grid();
  double total_energy = 0.0;
  std::vector<double> tail(g.dim(), 0.0);
  for (int c = 0; c < f.ncomp(); ++c) {
    const auto coeff = detail::dft_component(g, f.comp(c));
    for (int node = 0; node < g.total_nodes(); ++node) {
      const double e = std::norm(coeff[node]);
      total_energy += e;
      const auto idx = g.multi_index(node);
      for (int a = 0; a < g.dim(); ++a) {
        const int k = detail::signed_wavenumber(idx[a], g.size(a));
        if (3 * std::abs(k) > g.size(a)) tail[a] += e;
      }
    }
  }
  SpectralDiagnostics diag;
  if (total_energy > 0.0) {
    double worst = 0.0;
    for (double t : tail) worst = std::max(worst, t);
    diag.tail_fraction = std::min(1.0, worst / total_energy);
  }
  return diag;
}

namespace detail {

// Band-limited cardinal function for an even number of points:
// S(d) = sin(N d / 2) / (N tan(d / 2)), S(0) = 1.
inline double periodic_sinc(double d, int n) {
  double r = std::remainder(d, kPeriod);
  if (std::abs(r) < 1e-13) return 1.0;
  return std::sin(0.5 * n * r) / (n * std::tan(0.5 * r));
}

}  // namespace detail

/// Evaluates the trigonometric interpolant of every component at an
/// arbitrary point of the torus.
inline std::vector<double> interpolate_at(const TensorField& f,
                                          const std::array<double, 3>& point) {
  const Grid& g = f.grid();
  const int dim = g.dim();
  std::array<std::vector<double>, 3> w;
  for (int a = 0; a < dim; ++a) {
    const int n = g.size(a);
    w[a].resize(n);
    for (int k = 0; k < n; ++k)
      w[a][k] = detail::periodic_sinc(point[a] - g.node_coord(a, k), n);
  }
  std::vector<double> result(f.ncomp(), 0.0);
  // Contract the trailing axis first, then the rest.
  const int n_last = g.size(dim - 1);
  const int outer = g.total_nodes() / n_last;
  std::vector<double> reduced(outer);
  for (int c = 0; c < f.ncomp(); ++c) {
    const double* src = f.comp(c);
    for (int o = 0; o < outer; ++o) {
      double acc = 0.0;
      const double* line = src + o * n_last;
      for (int k = 0; k < n_last; ++k) acc += line[k] * w[dim - 1][k];
      reduced[o] = acc;
    }
    if (dim == 2) {
      double acc = 0.0;
      for (int k = 0; k < g.size(0); ++k) acc += reduced[k] * w[0][k];
      result[c] = acc;
    } else {
      double acc = 0.0;
      for (int k0 = 0; k0 < g.size(0); ++k0) {
        double inner = 0.0;
        for (int k1 = 0; k1 < g.size(1); ++k1)
          inner += reduced[k0 * g.size(1) + k1] * w[1][k1];
        acc += inner * w[0][k0];
      }
      result[c] = acc;
    }
  }
  return result;
}

/// Samples a pointwise-defined function into a scalar field.
inline TensorField sample_scalar(
    const Grid& g, const std::function<double(const std::array<double, 3>&)>& fn) {
  TensorField out = TensorField::scalar(g);
  for (int node = 0; node < g.total_nodes(); ++node)
    out.value(node) = fn(g.coords(node));
  return out;
}

}  // namespace harmap
