#pragma once

#include <functional>
#include <string>
#include <utility>

#include "harmap/metric.hpp"

namespace harmap {

/// Divergence with the sign convention delta = -trace o grad: contracts the
/// differentiation slot with the first tensor slot. Applies uniformly to
/// 1-forms, symmetric 2-tensors and 3-tensors.
inline TensorField divergence(const TensorField& phi, const MetricField& g) {
  if (phi.rank() < 1) throw Error("divergence: rank >= 1 required");
  TensorField grad = covariant_derivative(phi, g);
  TensorField out = curvature_trace(grad, g, 0, 1);
  out *= -1.0;
  if (phi.rank() >= 3 && (phi.symmetry() == Symmetry::All ||
                          phi.symmetry() == Symmetry::LastTwo))
    out.set_symmetry(phi.rank() == 3 ? Symmetry::All : Symmetry::LastTwo);
  return out;
}

/// Killing operator (delta* theta)_{ij} = (grad_i theta_j + grad_j theta_i)/2,
/// one half of the Lie derivative of g along the dual vector field.
inline TensorField killing_operator(const TensorField& theta,
                                    const MetricField& g) {
  if (theta.rank() != 1 || theta.covariant_rank() != 1)
    throw Error("killing_operator: 1-form required");
  TensorField grad = covariant_derivative(theta, g);
  const int n = g.dim();
  TensorField out = TensorField::sym2(g.grid());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = out.comp(i * n + j);
      const double* a = grad.comp(i * n + j);
      const double* b = grad.comp(j * n + i);
      for (int node = 0; node < out.nnodes(); ++node)
        dst[node] = 0.5 * (a[node] + b[node]);
    }
  return out;
}

/// Totally symmetric derivative of a symmetric 2-tensor: the cyclic sum of
/// grad omega. Vanishes exactly on Killing tensors.
inline TensorField sym3_derivative(const TensorField& omega,
                                   const MetricField& g) {
  if (omega.rank() != 2 || omega.symmetry() == Symmetry::None)
    throw Error("sym3_derivative: symmetric 2-tensor required");
  TensorField t = covariant_derivative(omega, g);
  const int n = g.dim();
  TensorField out(g.grid(), co_slots(3), Symmetry::All);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double* dst = out.comp((a * n + b) * n + c);
        const double* t1 = t.comp((a * n + b) * n + c);
        const double* t2 = t.comp((b * n + c) * n + a);
        const double* t3 = t.comp((c * n + a) * n + b);
        for (int node = 0; node < out.nnodes(); ++node)
          dst[node] = t1[node] + t2[node] + t3[node];
      }
  return out;
}

/// Twisted exterior differential on symmetric 2-tensors:
/// (d omega)_{abc} = (grad_a omega)_{bc} - (grad_b omega)_{ac}.
/// Vanishes exactly on Codazzi tensors.
inline TensorField d_sym2(const TensorField& omega, const MetricField& g) {
  if (omega.rank() != 2 || omega.symmetry() == Symmetry::None)
    throw Error("d_sym2: symmetric 2-tensor required");
  TensorField t = covariant_derivative(omega, g);
  const int n = g.dim();
  TensorField out(g.grid(), co_slots(3));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double* dst = out.comp((a * n + b) * n + c);
        const double* t1 = t.comp((a * n + b) * n + c);
        const double* t2 = t.comp((b * n + a) * n + c);
        for (int node = 0; node < out.nnodes(); ++node)
          dst[node] = t1[node] - t2[node];
      }
  return out;
}

/// Scalar divergence of a 1-form.
inline TensorField codifferential(const TensorField& theta,
                                  const MetricField& g) {
  return divergence(theta, g);
}

inline TensorField differential(const TensorField& f) {
  if (f.rank() != 0) throw Error("differential: scalar field required");
  return partial_derivative_stack(f);
}

/// Rough Laplacian div o grad; on the flat torus acts componentwise with
/// Laplace(sin x1) = -sin x1.
inline TensorField rough_laplacian(const TensorField& t, const MetricField& g) {
  TensorField out = divergence(covariant_derivative(t, g), g);
  out *= -1.0;
  out.set_symmetry(t.symmetry());
  return out;
}

/// Sampson Laplacian on 1-forms: Delta_S = 2 delta delta* - d delta.
inline TensorField sampson_1form(const TensorField& theta,
                                 const MetricField& g) {
  TensorField a = divergence(killing_operator(theta, g), g);
  a *= 2.0;
  TensorField b = differential(divergence(theta, g));
  return a - b;
}

/// Lichnerowicz-type Laplacian on symmetric 2-tensors:
/// Delta phi_ij + 2 g^{kl} R^m_{kij} phi_{ml}
///             - Ric_i^k phi_{kj} - Ric_j^k phi_{ik}.
/// Curvature terms vanish on flat metrics.
inline TensorField lichnerowicz_sym2(const TensorField& phi,
                                     const MetricField& g) {
  if (phi.rank() != 2 || phi.symmetry() == Symmetry::None)
    throw Error("lichnerowicz_sym2: symmetric 2-tensor required");
  const int n = g.dim();
  const auto& curv = g.curvature();
  TensorField out = rough_laplacian(phi, g);
  const TensorField& rm = curv.riemann();
  const TensorField& ric = curv.ricci();
  const TensorField& inv = g.inverse();
  const int nn = phi.nnodes();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = out.comp(i * n + j);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double* w = inv.comp(k * n + l);
          for (int m = 0; m < n; ++m) {
            const double* r = rm.comp(((m * n + k) * n + i) * n + j);
            const double* p = phi.comp(m * n + l);
            for (int node = 0; node < nn; ++node)
              dst[node] += 2.0 * w[node] * r[node] * p[node];
          }
          const double* ril = ric.comp(i * n + l);
          const double* pjk = phi.comp(j * n + k);
          const double* rjl = ric.comp(j * n + l);
          const double* pik = phi.comp(i * n + k);
          for (int node = 0; node < nn; ++node)
            dst[node] -= w[node] * (ril[node] * pjk[node] + rjl[node] * pik[node]);
        }
    }
  out.set_symmetry(Symmetry::All);
  return out;
}

/// Sampson Laplacian on symmetric 2-tensors: delta* delta + delta delta*,
/// composed from the Killing operator, the symmetric derivative, and the
/// divergence. Kernel contains Killing tensors with constant trace.
inline TensorField sampson_sym2(const TensorField& phi, const MetricField& g) {
  TensorField a = killing_operator(divergence(phi, g), g);
  TensorField b = divergence(sym3_derivative(phi, g), g);
  return a + b;
}

/// Bourguignon Laplacian d delta + delta d on symmetric 2-tensors, with d the
/// twisted exterior differential; the first-order piece on the divergence is
/// its full covariant derivative.
inline TensorField bourguignon_sym2(const TensorField& omega,
                                    const MetricField& g) {
  TensorField a = covariant_derivative(divergence(omega, g), g);
  TensorField b = divergence(d_sym2(omega, g), g);
  TensorField out = a + b;
  out.set_symmetry(Symmetry::None);
  return out;
}

/// alpha_g(theta) = delta* theta + (delta theta / 2) g. Kernel = Killing
/// 1-forms.
inline TensorField alpha_g(const TensorField& theta, const MetricField& g) {
  TensorField out = killing_operator(theta, g);
  TensorField div = divergence(theta, g);
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = out.comp(i * n + j);
      const double* gij = g.tensor().comp(i * n + j);
      for (int node = 0; node < out.nnodes(); ++node)
        dst[node] += 0.5 * div.value(node) * gij[node];
    }
  return out;
}

/// Adjoint of alpha_g: delta phi + d(trace_g phi)/2. Vanishes exactly on
/// harmonic tensors.
inline TensorField alpha_g_adjoint(const TensorField& phi,
                                   const MetricField& g) {
  if (phi.rank() != 2) throw Error("alpha_g_adjoint: rank-2 field required");
  TensorField out = divergence(phi, g);
  TensorField dtr = differential(metric_trace(phi, g));
  out.axpy(0.5, dtr);
  return out;
}

/// L2 norm of delta* theta + (delta theta / n) g; zero exactly on conformal
/// Killing 1-forms.
inline double conformal_killing_residual(const TensorField& theta,
                                         const MetricField& g) {
  TensorField t = killing_operator(theta, g);
  TensorField div = divergence(theta, g);
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = t.comp(i * n + j);
      const double* gij = g.tensor().comp(i * n + j);
      for (int node = 0; node < t.nnodes(); ++node)
        dst[node] += div.value(node) * gij[node] / n;
    }
  return l2_norm(t, g);
}

/// Pointwise traceless projection phi - (trace_g phi / n) g.
inline TensorField traceless_part(const TensorField& phi, const MetricField& g) {
  TensorField out = phi;
  TensorField tr = metric_trace(phi, g);
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = out.comp(i * n + j);
      const double* gij = g.tensor().comp(i * n + j);
      for (int node = 0; node < out.nnodes(); ++node)
        dst[node] -= tr.value(node) * gij[node] / n;
    }
  return out;
}

/// Multiplies a symmetric 2-tensor shape by a scalar field times the metric:
/// out = phi + c * lambda * g.
inline void add_scalar_times_metric(TensorField& phi, double c,
                                    const TensorField& lambda,
                                    const MetricField& g) {
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double* dst = phi.comp(i * n + j);
      const double* gij = g.tensor().comp(i * n + j);
      for (int node = 0; node < phi.nnodes(); ++node)
        dst[node] += c * lambda.value(node) * gij[node];
    }
}

/// A named linear field-to-field operator together with its L2 adjoint.
struct OperatorHandle {
  std::string name;
  std::function<TensorField(const TensorField&)> apply;
  std::function<TensorField(const TensorField&)> adjoint;
  Slots domain_slots;
  Slots codomain_slots;
  Symmetry domain_symmetry = Symmetry::None;
  Symmetry codomain_symmetry = Symmetry::None;

  TensorField domain_zero(const Grid& grid) const {
    return TensorField(grid, domain_slots, domain_symmetry);
  }
};

inline OperatorHandle killing_handle(const MetricField& g) {
  return OperatorHandle{
      "killing",
      [&g](const TensorField& theta) { return killing_operator(theta, g); },
      [&g](const TensorField& phi) { return divergence(phi, g); },
      co_slots(1),
      co_slots(2),
      Symmetry::None,
      Symmetry::All};
}

inline OperatorHandle alpha_handle(const MetricField& g) {
  return OperatorHandle{
      "alpha",
      [&g](const TensorField& theta) { return alpha_g(theta, g); },
      [&g](const TensorField& phi) { return alpha_g_adjoint(phi, g); },
      co_slots(1),
      co_slots(2),
      Symmetry::None,
      Symmetry::All};
}

/// Killing operator followed by the pointwise traceless projection; the
/// conformal factor of the York split is eliminated through the trace.
inline OperatorHandle york_handle(const MetricField& g) {
  return OperatorHandle{
      "york-traceless-killing",
      [&g](const TensorField& theta) {
        return traceless_part(killing_operator(theta, g), g);
      },
      [&g](const TensorField& phi) {
        return divergence(traceless_part(phi, g), g);
      },
      co_slots(1),
      co_slots(2),
      Symmetry::None,
      Symmetry::All};
}

/// |<A x, y> - <x, A* y>| over scale, for seeded random band-limited pairs;
/// used to gate solver operators.
struct AdjointnessResult {
  double worst_relative = 0.0;
};

}  // namespace harmap
