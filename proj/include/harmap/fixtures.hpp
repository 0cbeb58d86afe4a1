#pragma once

#include <cstdint>
#include <vector>

#include "harmap/metric.hpp"

namespace harmap {

/// Deterministic generator with a fixed algorithm (splitmix64), so identical
/// seeds give identical fields on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [-1, 1).
  double next_symmetric() {
    return 2.0 * ((next_u64() >> 11) * 0x1.0p-53) - 1.0;
  }

 private:
  std::uint64_t state_;
};

/// Random real trigonometric polynomial with wavenumbers bounded by kmax per
/// axis, zero mean, coefficients in [-1, 1).
inline TensorField random_band_limited_scalar(const Grid& grid, int kmax,
                                              Rng& rng) {
  const int dim = grid.dim();
  TensorField out = TensorField::scalar(grid);
  std::array<int, 3> k{0, 0, 0};
  const int span = 2 * kmax + 1;
  const int total = dim == 2 ? span * span : span * span * span;
  for (int t = 0; t < total; ++t) {
    int rem = t;
    for (int a = 0; a < dim; ++a) {
      k[a] = rem % span - kmax;
      rem /= span;
    }
    // half-space representative per conjugate pair; skip the zero mode
    int lead = 0;
    for (int a = 0; a < dim; ++a) {
      if (k[a] != 0) {
        lead = k[a];
        break;
      }
    }
    if (lead <= 0) continue;
    const double ac = rng.next_symmetric();
    const double as = rng.next_symmetric();
    for (int node = 0; node < grid.total_nodes(); ++node) {
      const auto x = grid.coords(node);
      double phase = 0.0;
      for (int a = 0; a < dim; ++a) phase += k[a] * x[a];
      out.value(node) += ac * std::cos(phase) + as * std::sin(phase);
    }
  }
  return out;
}

/// Random symmetric band-limited 2-tensor, components scaled to a common
/// sup-norm bound.
inline TensorField random_band_limited_sym2(const Grid& grid, int kmax,
                                            double amplitude, Rng& rng) {
  const int n = grid.dim();
  TensorField out = TensorField::sym2(grid);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      TensorField s = random_band_limited_scalar(grid, kmax, rng);
      for (int node = 0; node < grid.total_nodes(); ++node) {
        out.at(node, i, j) = s.value(node);
        out.at(node, j, i) = s.value(node);
      }
    }
  const double m = out.max_abs();
  if (m > 0.0) out *= amplitude / m;
  return out;
}

inline TensorField random_band_limited_one_form(const Grid& grid, int kmax,
                                                double amplitude, Rng& rng) {
  const int n = grid.dim();
  TensorField out = TensorField::one_form(grid);
  for (int i = 0; i < n; ++i) {
    TensorField s = random_band_limited_scalar(grid, kmax, rng);
    for (int node = 0; node < grid.total_nodes(); ++node)
      out.at(node, i) = s.value(node);
  }
  const double m = out.max_abs();
  if (m > 0.0) out *= amplitude / m;
  return out;
}

/// Conformally flat 2-torus: g = exp(2u) delta with u = 0.1 sin x1. The
/// scalar curvature has the closed form 0.2 exp(-0.2 sin x1) sin x1.
inline MetricField conformal_t2(int resolution = 32) {
  Grid grid = Grid::uniform(2, resolution);
  std::vector<Expression> comps(4);
  comps[0] = Expression::parse("exp(0.2*sin(x1))");
  comps[1] = Expression::constant(0.0);
  comps[2] = Expression::constant(0.0);
  comps[3] = Expression::parse("exp(0.2*sin(x1))");
  return MetricField::from_expressions(grid, std::move(comps));
}

/// Band-limited symmetric perturbation of the flat 3-torus:
/// g = delta + A, wavenumbers <= 2, sup-norm amplitude 0.1 by default.
inline MetricField bump_t3(int resolution = 24, std::uint64_t seed = 1,
                           double amplitude = 0.1) {
  Grid grid = Grid::uniform(3, resolution);
  Rng rng(seed);
  TensorField pert = random_band_limited_sym2(grid, 2, amplitude, rng);
  TensorField g = TensorField::sym2(grid);
  for (int node = 0; node < grid.total_nodes(); ++node)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        g.at(node, i, j) = (i == j ? 1.0 : 0.0) + pert.at(node, i, j);
  return MetricField(std::move(g));
}

/// Expression-backed version of bump_t3 for checks that must evaluate the
/// metric away from grid nodes: diag(1 + a sin x1, 1 + b cos x2, 1 + c
/// sin(x3)) plus one off-diagonal coupling.
inline MetricField bump_t3_expr(int resolution = 24) {
  Grid grid = Grid::uniform(3, resolution);
  std::vector<Expression> comps(9);
  comps[0] = Expression::parse("1 + 0.1*sin(x1)*cos(x2)");
  comps[4] = Expression::parse("1 + 0.1*cos(x2)*sin(x3)");
  comps[8] = Expression::parse("1 + 0.1*sin(x3)*cos(x1)");
  comps[1] = comps[3] = Expression::parse("0.05*sin(x1+x2)");
  comps[2] = comps[6] = Expression::constant(0.0);
  comps[5] = comps[7] = Expression::parse("0.05*cos(x2+x3)");
  return MetricField::from_expressions(grid, std::move(comps));
}

struct FixtureSet {
  std::vector<std::pair<std::string, MetricField>> metrics;
};

/// The default desk-scale fixture family.
inline FixtureSet default_fixtures(int res2 = 32, int res3 = 24) {
  FixtureSet set;
  set.metrics.emplace_back("flat-t2", MetricField::flat(Grid::uniform(2, res2)));
  set.metrics.emplace_back("flat-t3", MetricField::flat(Grid::uniform(3, res3)));
  set.metrics.emplace_back("conformal-t2", conformal_t2(res2));
  set.metrics.emplace_back("bump-t3-s1", bump_t3(res3, 1));
  set.metrics.emplace_back("bump-t3-s2", bump_t3(res3, 2));
  set.metrics.emplace_back("bump-t3-s3", bump_t3(res3, 3));
  return set;
}

}  // namespace harmap
