#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace harmap {

inline constexpr double kPeriod = 2.0 * std::numbers::pi;

/// Error type used across the library for precondition and validation
/// failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Per-axis tables: node coordinates and the trigonometric differentiation
// matrix for an even number of equispaced points on [0, 2pi).
struct AxisTable {
  int n = 0;
  std::vector<double> nodes;
  Eigen::MatrixXd diff;

  explicit AxisTable(int n_pts) : n(n_pts), nodes(n_pts), diff(n_pts, n_pts) {
    for (int j = 0; j < n; ++j) nodes[j] = kPeriod * j / n;
    // D_jk = (1/2)(-1)^(j-k) cot((j-k) pi / n), zero diagonal (even n).
    // Exact derivative of the band-limited trigonometric interpolant.
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (j == k) {
          diff(j, k) = 0.0;
          continue;
        }
        const int m = j - k;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        diff(j, k) = 0.5 * sign / std::tan(std::numbers::pi * m / n);
      }
    }
  }
};

}  // namespace detail

/// Uniform periodic grid on the flat torus T^n, n in {2,3}, period 2pi per
/// axis. Copies are cheap; spectral tables are shared.
class Grid {
 public:
  Grid() = default;

  Grid(int dim, const std::array<int, 3>& sizes) : dim_(dim) {
    if (dim != 2 && dim != 3) throw Error("Grid: dim must be 2 or 3");
    total_ = 1;
    for (int a = 0; a < dim_; ++a) {
      const int n = sizes[a];
      if (n < 8 || n % 2 != 0)
        throw Error("Grid: axis " + std::to_string(a) +
                     " resolution must be even and >= 8, got " +
                     std::to_string(n));
      sizes_[a] = n;
      total_ *= n;
    }
    for (int a = dim_ - 1; a >= 0; --a)
      strides_[a] = (a == dim_ - 1) ? 1 : strides_[a + 1] * sizes_[a + 1];
    for (int a = 0; a < dim_; ++a)
      tables_[a] = std::make_shared<detail::AxisTable>(sizes_[a]);
  }

  static Grid uniform(int dim, int n_per_axis) {
    return Grid(dim, {n_per_axis, n_per_axis, n_per_axis});
  }

  int dim() const { return dim_; }
  int size(int axis) const { return sizes_[axis]; }
  int stride(int axis) const { return strides_[axis]; }
  int total_nodes() const { return total_; }

  double node_coord(int axis, int k) const { return tables_[axis]->nodes[k]; }

  const Eigen::MatrixXd& diff_matrix(int axis) const {
    return tables_[axis]->diff;
  }

  /// Quadrature weight of a single node: prod_a (2pi / N_a).
  double cell_volume() const {
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) w *= kPeriod / sizes_[a];
    return w;
  }

  std::array<int, 3> multi_index(int node) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      k[a] = node / strides_[a];
      node -= k[a] * strides_[a];
    }
    return k;
  }

  std::array<double, 3> coords(int node) const {
    const auto k = multi_index(node);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = tables_[a]->nodes[k[a]];
    return x;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.sizes_[i] != b.sizes_[i]) return false;
    return true;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  int dim_ = 0;
  std::array<int, 3> sizes_{0, 0, 0};
  std::array<int, 3> strides_{0, 0, 0};
  int total_ = 0;
  std::array<std::shared_ptr<const detail::AxisTable>, 3> tables_;
};

}  // namespace harmap
