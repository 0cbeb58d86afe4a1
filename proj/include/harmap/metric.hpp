#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "harmap/expression.hpp"
#include "harmap/grid.hpp"
#include "harmap/tensor.hpp"

namespace harmap {

/// Symmetric matrix of component expressions backing a metric, so the metric
/// and its Christoffel symbols can be evaluated at arbitrary points.
class MetricExpr {
 public:
  MetricExpr(int dim, std::vector<Expression> components)
      : dim_(dim), comp_(std::move(components)) {
    if (static_cast<int>(comp_.size()) != dim_ * dim_)
      throw Error("MetricExpr: need dim*dim component expressions");
    partials_.resize(static_cast<size_t>(dim_) * dim_ * dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int c = 0; c < dim_; ++c)
          partials_[(i * dim_ + j) * dim_ + c] = comp_[i * dim_ + j].derivative(c);
  }

  static MetricExpr flat(int dim) {
    std::vector<Expression> comp(static_cast<size_t>(dim) * dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        comp[i * dim + j] = Expression::constant(i == j ? 1.0 : 0.0);
    return MetricExpr(dim, std::move(comp));
  }

  int dim() const { return dim_; }

  Eigen::MatrixXd eval(const std::array<double, 3>& x) const {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = comp_[i * dim_ + j].eval(x);
    return m;
  }

  /// Christoffel symbols G^a_{bc} at an arbitrary point, from the exact
  /// symbolic partials of the components.
  std::vector<double> christoffel(const std::array<double, 3>& x) const {
    Eigen::MatrixXd m = eval(x);
    Eigen::MatrixXd inv = m.inverse();
    std::vector<double> dg(static_cast<size_t>(dim_) * dim_ * dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int c = 0; c < dim_; ++c)
          dg[(c * dim_ + i) * dim_ + j] =
              partials_[(i * dim_ + j) * dim_ + c].eval(x);
    std::vector<double> gamma(static_cast<size_t>(dim_) * dim_ * dim_, 0.0);
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        for (int c = 0; c < dim_; ++c) {
          double acc = 0.0;
          for (int d = 0; d < dim_; ++d)
            acc += inv(a, d) * (dg[(b * dim_ + d) * dim_ + c] +
                                dg[(c * dim_ + d) * dim_ + b] -
                                dg[(d * dim_ + b) * dim_ + c]);
          gamma[(a * dim_ + b) * dim_ + c] = 0.5 * acc;
        }
    return gamma;
  }

 private:
  int dim_;
  std::vector<Expression> comp_;
  std::vector<Expression> partials_;
};

struct PositiveDefiniteReport {
  bool positive_definite = true;
  int worst_node = -1;
  double min_eigenvalue = 0.0;
};

/// Nodewise Cholesky test of a symmetric 2-tensor field; reports the first
/// failing node and its smallest eigenvalue.
inline PositiveDefiniteReport positive_definite_check(const TensorField& phi) {
  if (phi.rank() != 2 || phi.covariant_rank() != 2)
    throw Error("positive_definite_check: covariant rank-2 field required");
  const int n = phi.grid().dim();
  Eigen::MatrixXd m(n, n);
  PositiveDefiniteReport report;
  double global_min = std::numeric_limits<double>::max();
  int global_argmin = -1;
  for (int node = 0; node < phi.nnodes(); ++node) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = phi.at(node, i, j);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success && report.positive_definite) {
      report.positive_definite = false;
      report.worst_node = node;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      report.min_eigenvalue = es.eigenvalues().minCoeff();
      return report;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double mn = es.eigenvalues().minCoeff();
    if (mn < global_min) {
      global_min = mn;
      global_argmin = node;
    }
  }
  report.worst_node = global_argmin;
  report.min_eigenvalue = global_min;
  return report;
}

class CurvatureBundle;

/// Positive-definite symmetric 2-tensor field with nodewise inverse, volume
/// density and Cholesky factors. Immutable value; curvature data is computed
/// once on demand and shared.
class MetricField {
 public:
  explicit MetricField(TensorField g,
                       std::shared_ptr<const MetricExpr> expr = nullptr)
      : g_(std::move(g)), expr_(std::move(expr)) {
    if (g_.rank() != 2 || g_.covariant_rank() != 2)
      throw Error("MetricField: covariant rank-2 field required");
    const int n = dim();
    g_inv_ = TensorField(g_.grid(), Slots(2, Variance::Contra), Symmetry::All);
    sqrt_det_ = TensorField::scalar(g_.grid());
    chol_lower_ = TensorField(g_.grid(), Slots(2, Variance::Co));
    Eigen::MatrixXd m(n, n);
    for (int node = 0; node < g_.nnodes(); ++node) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g_.at(node, i, j);
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
        throw Error("MetricField: asymmetric components at node " +
                     std::to_string(node));
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        throw Error("MetricField: not positive definite at node " +
                     std::to_string(node) + " (min eigenvalue " +
                     std::to_string(es.eigenvalues().minCoeff()) + ")");
      }
      Eigen::MatrixXd l = llt.matrixL();
      Eigen::MatrixXd inv = m.inverse();
      double sd = 1.0;
      for (int i = 0; i < n; ++i) sd *= l(i, i);
      sqrt_det_.value(node) = sd;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          g_inv_.at(node, i, j) = inv(i, j);
          chol_lower_.at(node, i, j) = l(i, j);
        }
    }
  }

  static MetricField flat(const Grid& grid) {
    TensorField g = TensorField::sym2(grid);
    for (int node = 0; node < grid.total_nodes(); ++node)
      for (int i = 0; i < grid.dim(); ++i) g.at(node, i, i) = 1.0;
    return MetricField(std::move(g),
                       std::make_shared<MetricExpr>(MetricExpr::flat(grid.dim())));
  }

  /// Samples a symmetric expression matrix on the grid and keeps the
  /// expressions for arbitrary-point evaluation.
  static MetricField from_expressions(const Grid& grid,
                                      std::vector<Expression> components) {
    auto expr = std::make_shared<MetricExpr>(grid.dim(), std::move(components));
    TensorField g = TensorField::sym2(grid);
    const int n = grid.dim();
    for (int node = 0; node < grid.total_nodes(); ++node) {
      const Eigen::MatrixXd m = expr->eval(grid.coords(node));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.at(node, i, j) = m(i, j);
    }
    return MetricField(std::move(g), std::move(expr));
  }

  const Grid& grid() const { return g_.grid(); }
  int dim() const { return g_.grid().dim(); }
  const TensorField& tensor() const { return g_; }
  const TensorField& inverse() const { return g_inv_; }
  const TensorField& sqrt_det() const { return sqrt_det_; }
  const TensorField& cholesky_lower() const { return chol_lower_; }
  const std::shared_ptr<const MetricExpr>& expression() const { return expr_; }

  const CurvatureBundle& curvature() const;

  /// Christoffel symbols as a (1,2)-tensor field, component order (k, i, j).
  const TensorField& christoffel() const;

 private:
  TensorField g_;
  TensorField g_inv_;
  TensorField sqrt_det_;
  TensorField chol_lower_;
  std::shared_ptr<const MetricExpr> expr_;
  mutable std::shared_ptr<const TensorField> chris_;
  mutable std::shared_ptr<const CurvatureBundle> curv_;
};

/// Raises or lowers one slot with the metric; involutive.
enum class Direction : unsigned char { Up, Down };

inline TensorField raise_lower(const TensorField& t, const MetricField& g,
                               int slot, Direction dir) {
  if (slot < 0 || slot >= t.rank()) throw Error("raise_lower: slot out of range");
  if (t.grid() != g.grid()) throw Error("raise_lower: grid mismatch");
  const Variance want = dir == Direction::Up ? Variance::Co : Variance::Contra;
  if (t.slots()[slot] != want)
    throw Error("raise_lower: slot already has the requested variance");
  const int n = g.dim();
  Slots slots = t.slots();
  slots[slot] = dir == Direction::Up ? Variance::Contra : Variance::Co;
  TensorField out(t.grid(), slots, t.symmetry());
  const TensorField& m = dir == Direction::Up ? g.inverse() : g.tensor();

  // stride of the slot inside the component index
  int inner = 1;
  for (int s = t.rank() - 1; s > slot; --s) inner *= n;
  const int ncomp = t.ncomp();
  for (int c = 0; c < ncomp; ++c) {
    const int i = (c / inner) % n;     // current index in `slot`
    const int base = c - i * inner;    // component with slot index zeroed
    double* dst = out.comp(c);
    std::fill(dst, dst + t.nnodes(), 0.0);
    for (int j = 0; j < n; ++j) {
      const double* src = t.comp(base + j * inner);
      const double* w = m.comp(i * n + j);
      for (int node = 0; node < t.nnodes(); ++node) dst[node] += w[node] * src[node];
    }
  }
  return out;
}

namespace detail {

// Flips every slot (raises covariant, lowers contravariant ones).
inline TensorField metric_dual(const TensorField& t, const MetricField& g) {
  TensorField out = t;
  for (int s = 0; s < t.rank(); ++s)
    out = raise_lower(out, g, s,
                      out.slots()[s] == Variance::Co ? Direction::Up
                                                     : Direction::Down);
  return out;
}

}  // namespace detail

/// Pointwise full metric contraction g(phi, psi) as a scalar field.
inline TensorField pointwise_inner(const TensorField& phi,
                                   const TensorField& psi,
                                   const MetricField& g) {
  phi.require_same_shape(psi, "pointwise_inner");
  TensorField dual = detail::metric_dual(psi, g);
  TensorField out = TensorField::scalar(phi.grid());
  for (int c = 0; c < phi.ncomp(); ++c) {
    const double* a = phi.comp(c);
    const double* b = dual.comp(c);
    for (int node = 0; node < phi.nnodes(); ++node) out.value(node) += a[node] * b[node];
  }
  return out;
}

/// L2 inner product <phi, psi> = int g(phi, psi) dv_g.
inline double l2_inner_product(const TensorField& phi, const TensorField& psi,
                               const MetricField& g) {
  if (phi.grid() != g.grid()) throw Error("l2_inner_product: grid mismatch");
  return integrate(pointwise_inner(phi, psi, g), g.sqrt_det());
}

inline double l2_norm(const TensorField& phi, const MetricField& g) {
  return std::sqrt(std::max(0.0, l2_inner_product(phi, phi, g)));
}

/// Levi-Civita covariant derivative of a covariant tensor field, with the
/// differentiation slot first: (grad T)_{a i1..ip} = d_a T - sum_s Gamma
/// corrections. Reduces to the plain differential on scalars.
inline TensorField covariant_derivative(const TensorField& t,
                                        const MetricField& g) {
  if (t.grid() != g.grid()) throw Error("covariant_derivative: grid mismatch");
  if (t.contravariant_rank() != 0)
    throw Error("covariant_derivative: lower contravariant slots first");
  TensorField out = partial_derivative_stack(t);
  if (t.rank() == 0) return out;

  const int n = g.dim();
  const TensorField& gamma = g.christoffel();
  const int p = t.rank();
  const int ncomp_t = t.ncomp();
  std::vector<int> idx(p);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < ncomp_t; ++c) {
      int rem = c;
      for (int s = p - 1; s >= 0; --s) {
        idx[s] = rem % n;
        rem /= n;
      }
      double* dst = out.comp(a * ncomp_t + c);
      for (int s = 0; s < p; ++s) {
        int inner = 1;
        for (int q = p - 1; q > s; --q) inner *= n;
        const int base = c - idx[s] * inner;
        for (int m = 0; m < n; ++m) {
          const double* gm = gamma.comp((m * n + a) * n + idx[s]);
          const double* src = t.comp(base + m * inner);
          for (int node = 0; node < t.nnodes(); ++node)
            dst[node] -= gm[node] * src[node];
        }
      }
    }
  }
  if (t.symmetry() == Symmetry::All && p >= 2)
    out.set_symmetry(Symmetry::LastTwo);
  return out;
}

/// Connection coefficients, curvature tensor, Ricci tensor, scalar curvature
/// and the Einstein tensor of a metric.
class CurvatureBundle {
 public:
  explicit CurvatureBundle(const MetricField& g)
      : gamma_(compute_christoffel(g)),
        riemann_(compute_riemann(g, gamma_)),
        ricci_(contract_ricci(riemann_)),
        scalar_(trace_scalar(ricci_, g)),
        einstein_(compute_einstein(ricci_, scalar_, g)) {}

  /// Gamma^k_{ij}, component order (k, i, j).
  const TensorField& christoffel() const { return gamma_; }
  /// R^l_{ijk}, component order (l, i, j, k):
  /// R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
  ///           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}.
  const TensorField& riemann() const { return riemann_; }
  /// Ric_{jk} = R^i_{ijk}.
  const TensorField& ricci() const { return ricci_; }
  const TensorField& scalar() const { return scalar_; }
  /// E = Ric - (s/2) g.
  const TensorField& einstein() const { return einstein_; }

  static TensorField compute_christoffel(const MetricField& g) {
    const int n = g.dim();
    TensorField dg = partial_derivative_stack(g.tensor());  // (c, i, j)
    TensorField gamma(g.grid(), {Variance::Contra, Variance::Co, Variance::Co},
                      Symmetry::LastTwo);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double* dst = gamma.comp((k * n + i) * n + j);
          for (int l = 0; l < n; ++l) {
            const double* inv = g.inverse().comp(k * n + l);
            const double* a = dg.comp((i * n + j) * n + l);
            const double* b = dg.comp((j * n + i) * n + l);
            const double* c = dg.comp((l * n + i) * n + j);
            for (int node = 0; node < g.grid().total_nodes(); ++node)
              dst[node] += 0.5 * inv[node] * (a[node] + b[node] - c[node]);
          }
        }
    return gamma;
  }

 private:
  static TensorField compute_riemann(const MetricField& g,
                                     const TensorField& gamma) {
    const int n = g.dim();
    const int nn = g.grid().total_nodes();
    TensorField dgamma = partial_derivative_stack(gamma);  // (a, l, i, j)
    TensorField rm(g.grid(),
                   {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double* dst = rm.comp(((l * n + i) * n + j) * n + k);
            const double* d1 = dgamma.comp(((i * n + l) * n + j) * n + k);
            const double* d2 = dgamma.comp(((j * n + l) * n + i) * n + k);
            for (int node = 0; node < nn; ++node) dst[node] = d1[node] - d2[node];
            for (int m = 0; m < n; ++m) {
              const double* a1 = gamma.comp((l * n + i) * n + m);
              const double* b1 = gamma.comp((m * n + j) * n + k);
              const double* a2 = gamma.comp((l * n + j) * n + m);
              const double* b2 = gamma.comp((m * n + i) * n + k);
              for (int node = 0; node < nn; ++node)
                dst[node] += a1[node] * b1[node] - a2[node] * b2[node];
            }
          }
    return rm;
  }

  static TensorField contract_ricci(const TensorField& rm) {
    const int n = rm.grid().dim();
    TensorField ric = TensorField::sym2(rm.grid());
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double* dst = ric.comp(j * n + k);
        for (int i = 0; i < n; ++i) {
          const double* src = rm.comp(((i * n + i) * n + j) * n + k);
          for (int node = 0; node < rm.nnodes(); ++node) dst[node] += src[node];
        }
      }
    return ric;
  }

  static TensorField trace_scalar(const TensorField& ric, const MetricField& g) {
    const int n = g.dim();
    TensorField s = TensorField::scalar(g.grid());
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double* inv = g.inverse().comp(j * n + k);
        const double* r = ric.comp(j * n + k);
        for (int node = 0; node < g.grid().total_nodes(); ++node)
          s.value(node) += inv[node] * r[node];
      }
    return s;
  }

  static TensorField compute_einstein(const TensorField& ric,
                                      const TensorField& s,
                                      const MetricField& g) {
    const int n = g.dim();
    TensorField e = ric;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double* dst = e.comp(i * n + j);
        const double* gij = g.tensor().comp(i * n + j);
        for (int node = 0; node < g.grid().total_nodes(); ++node)
          dst[node] -= 0.5 * s.value(node) * gij[node];
      }
    return e;
  }

  TensorField gamma_;
  TensorField riemann_;
  TensorField ricci_;
  TensorField scalar_;
  TensorField einstein_;
};

inline const CurvatureBundle& MetricField::curvature() const {
  if (!curv_) curv_ = std::make_shared<const CurvatureBundle>(*this);
  return *curv_;
}

inline const TensorField& MetricField::christoffel() const {
  if (curv_) return curv_->christoffel();
  if (!chris_)
    chris_ = std::make_shared<const TensorField>(
        CurvatureBundle::compute_christoffel(*this));
  return *chris_;
}

inline TensorField curvature_trace(const TensorField& t, const MetricField& g,
                                   int slot_a, int slot_b) {
  // Contracts two covariant slots with the inverse metric.
  if (slot_a > slot_b) std::swap(slot_a, slot_b);
  if (slot_a == slot_b || slot_b >= t.rank())
    throw Error("curvature_trace: bad slots");
  if (t.slots()[slot_a] != Variance::Co || t.slots()[slot_b] != Variance::Co)
    throw Error("curvature_trace: covariant slots required");
  const int n = g.dim();
  const int r = t.rank();
  Slots slots;
  for (int s = 0; s < r; ++s)
    if (s != slot_a && s != slot_b) slots.push_back(t.slots()[s]);
  TensorField out(t.grid(), slots);
  std::vector<int> idx(r, 0);
  const int out_ncomp = out.ncomp();
  for (int oc = 0; oc < out_ncomp; ++oc) {
    int rem = oc;
    for (int s = r - 1; s >= 0; --s) {
      if (s == slot_a || s == slot_b) continue;
      idx[s] = rem % n;
      rem /= n;
    }
    double* dst = out.comp(oc);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        idx[slot_a] = a;
        idx[slot_b] = b;
        int c = 0;
        for (int s = 0; s < r; ++s) c = c * n + idx[s];
        const double* src = t.comp(c);
        const double* inv = g.inverse().comp(a * n + b);
        for (int node = 0; node < t.nnodes(); ++node)
          dst[node] += inv[node] * src[node];
      }
  }
  return out;
}

/// trace_g of a symmetric 2-tensor as a scalar field.
inline TensorField metric_trace(const TensorField& phi, const MetricField& g) {
  return curvature_trace(phi, g, 0, 1);
}

}  // namespace harmap
