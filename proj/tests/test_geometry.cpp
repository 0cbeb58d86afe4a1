#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "harmap/fixtures.hpp"
#include "harmap/geometry_checks.hpp"
#include "harmap/metric.hpp"
#include "harmap/operators.hpp"

using namespace harmap;

namespace {

double field_linf(const TensorField& f) { return f.max_abs(); }

}  // namespace

TEST_CASE("flat metric has vanishing curvature") {
  MetricField g = MetricField::flat(Grid::uniform(3, 8));
  const auto& c = g.curvature();
  CHECK(field_linf(c.christoffel()) < 1e-12);
  CHECK(field_linf(c.riemann()) < 1e-12);
  CHECK(field_linf(c.ricci()) < 1e-12);
  CHECK(field_linf(c.scalar()) < 1e-12);
  CHECK(field_linf(c.einstein()) < 1e-12);
}

TEST_CASE("metric field bookkeeping") {
  MetricField g = conformal_t2();
  const int n = 2;

  SECTION("g * g_inv = identity per node") {
    double worst = 0.0;
    for (int node = 0; node < g.grid().total_nodes(); ++node)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k)
            acc += g.tensor().at(node, i, k) * g.inverse().at(node, k, j);
          worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-12);
  }

  SECTION("sqrt_det matches the conformal factor") {
    // det g = exp(0.4 sin x1)
    double worst = 0.0;
    for (int node = 0; node < g.grid().total_nodes(); ++node) {
      const auto x = g.grid().coords(node);
      worst = std::max(worst, std::abs(g.sqrt_det().value(node) -
                                       std::exp(0.2 * std::sin(x[0]))));
    }
    CHECK(worst < 1e-12);
  }

  SECTION("indefinite input rejected") {
    Grid grid = Grid::uniform(2, 8);
    TensorField bad = TensorField::sym2(grid);
    for (int node = 0; node < grid.total_nodes(); ++node) {
      bad.at(node, 0, 0) = 1.0;
      bad.at(node, 1, 1) = -1.0;
    }
    CHECK_THROWS_AS(MetricField(bad), Error);
  }
}

TEST_CASE("conformal 2-torus scalar curvature closed form") {
  // g = exp(2u) delta with u = 0.1 sin x1 gives s = -2 exp(-2u) (Lap u)
  //   = 0.2 exp(-0.2 sin x1) sin x1.
  MetricField g = conformal_t2();
  const auto& c = g.curvature();
  double worst = 0.0;
  for (int node = 0; node < g.grid().total_nodes(); ++node) {
    const auto x = g.grid().coords(node);
    const double expect = 0.2 * std::exp(-0.2 * std::sin(x[0])) * std::sin(x[0]);
    worst = std::max(worst, std::abs(c.scalar().value(node) - expect));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("einstein tensor trace identity") {
  for (auto& [name, g] : default_fixtures(16, 12).metrics) {
    const auto& c = g.curvature();
    TensorField tr = metric_trace(c.einstein(), g);
    TensorField expect = c.scalar();
    expect *= 1.0 - g.dim() / 2.0;
    tr -= expect;
    INFO(name);
    CHECK(field_linf(tr) < 1e-10 * (1.0 + field_linf(c.scalar())));
  }
}

TEST_CASE("covariant derivative") {
  MetricField g = conformal_t2();

  SECTION("reduces to the differential on scalars") {
    Rng rng(2);
    TensorField f = random_band_limited_scalar(g.grid(), 4, rng);
    TensorField grad = covariant_derivative(f, g);
    for (int a = 0; a < 2; ++a) {
      TensorField pa = partial_derivative(f, a);
      double worst = 0.0;
      for (int node = 0; node < f.nnodes(); ++node)
        worst = std::max(worst, std::abs(grad.at(node, a) - pa.value(node)));
      CHECK(worst < 1e-13);
    }
  }

  SECTION("metric compatibility grad g = 0") {
    TensorField gg = covariant_derivative(g.tensor(), g);
    CHECK(field_linf(gg) < 1e-10);
  }

  SECTION("plain partials on the flat metric") {
    MetricField flat = MetricField::flat(g.grid());
    Rng rng(4);
    TensorField theta = random_band_limited_one_form(g.grid(), 4, 1.0, rng);
    TensorField grad = covariant_derivative(theta, flat);
    TensorField plain = partial_derivative_stack(theta);
    plain -= grad;
    CHECK(field_linf(plain) < 1e-12);
  }
}

TEST_CASE("raise and lower indices") {
  Grid grid = Grid::uniform(2, 16);

  SECTION("flat metric leaves components unchanged") {
    MetricField flat = MetricField::flat(grid);
    Rng rng(5);
    TensorField theta = random_band_limited_one_form(grid, 4, 1.0, rng);
    TensorField up = raise_lower(theta, flat, 0, Direction::Up);
    for (int node = 0; node < grid.total_nodes(); ++node)
      for (int i = 0; i < 2; ++i)
        CHECK(up.at(node, i) == Catch::Approx(theta.at(node, i)).margin(1e-14));
  }

  SECTION("down after up is the identity") {
    MetricField g = conformal_t2(16);
    Rng rng(6);
    TensorField phi = random_band_limited_sym2(grid, 4, 1.0, rng);
    TensorField round =
        raise_lower(raise_lower(phi, g, 1, Direction::Up), g, 1, Direction::Down);
    round -= phi;
    CHECK(field_linf(round) < 1e-12);
  }

  SECTION("constant diagonal metric divides componentwise") {
    std::vector<Expression> comps(4);
    comps[0] = Expression::constant(2.0);
    comps[1] = comps[2] = Expression::constant(0.0);
    comps[3] = Expression::constant(1.0);
    MetricField g = MetricField::from_expressions(grid, std::move(comps));
    TensorField theta = TensorField::one_form(grid);
    for (int node = 0; node < grid.total_nodes(); ++node) {
      const auto x = grid.coords(node);
      theta.at(node, 0) = 1.0 + 0.5 * std::sin(x[0]);
    }
    TensorField sharp = raise_lower(theta, g, 0, Direction::Up);
    for (int node = 0; node < grid.total_nodes(); ++node) {
      const auto x = grid.coords(node);
      CHECK(sharp.at(node, 0) ==
            Catch::Approx((1.0 + 0.5 * std::sin(x[0])) / 2.0).margin(1e-13));
      CHECK(std::abs(sharp.at(node, 1)) < 1e-13);
    }
  }

  SECTION("slot out of range") {
    MetricField flat = MetricField::flat(grid);
    TensorField theta = TensorField::one_form(grid);
    CHECK_THROWS_AS(raise_lower(theta, flat, 1, Direction::Up), Error);
  }
}

TEST_CASE("first Bianchi identity per node") {
  MetricField g = bump_t3(12, 1);
  const TensorField& rm = g.curvature().riemann();
  double worst = 0.0;
  for (int node = 0; node < g.grid().total_nodes(); ++node)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            worst = std::max(worst, std::abs(rm.at(node, l, i, j, k) +
                                             rm.at(node, l, j, k, i) +
                                             rm.at(node, l, k, i, j)));
  CHECK(worst < 1e-9 * std::max(1.0, field_linf(rm)));
}

TEST_CASE("Ricci commutation on a 1-form fixes the curvature sign") {
  // Small-amplitude fixture keeps collocation products fully resolved, so the
  // pointwise identity holds to near machine precision.
  const int n = 3;
  MetricField g = bump_t3(24, 2, 0.01);
  Rng rng(8);
  TensorField theta = random_band_limited_one_form(g.grid(), 2, 1.0, rng);
  TensorField ddtheta = covariant_derivative(covariant_derivative(theta, g), g);
  const TensorField& rm = g.curvature().riemann();
  double worst = 0.0;
  for (int node = 0; node < g.grid().total_nodes(); ++node)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double comm = ddtheta.at(node, i, j, k) - ddtheta.at(node, j, i, k);
          for (int l = 0; l < n; ++l)
            comm += rm.at(node, l, i, j, k) * theta.at(node, l);
          worst = std::max(worst, std::abs(comm));
        }
  const double scale = std::max(field_linf(rm), 1e-6);
  CHECK(worst < 1e-9 * std::max(1.0, scale));
}

TEST_CASE("contracted Bianchi residual") {
  SECTION("flat") {
    MetricField g = MetricField::flat(Grid::uniform(2, 16));
    CHECK(bianchi_residual(g) < 1e-12);
  }
  SECTION("conformal 2-torus") {
    MetricField g = conformal_t2();
    const double ric_norm = l2_norm(g.curvature().ricci(), g);
    CHECK(bianchi_residual(g) < 1e-7 * std::max(ric_norm, 1e-10));
  }
  SECTION("random band-limited bump metric") {
    MetricField g = bump_t3(24, 3);
    const double ric_norm = l2_norm(g.curvature().ricci(), g);
    CHECK(bianchi_residual(g) < 1e-6 * ric_norm);
  }
}

TEST_CASE("cross-curvature tensor") {
  SECTION("flat 3-torus has singular Einstein tensor") {
    MetricField g = MetricField::flat(Grid::uniform(3, 8));
    CHECK_THROWS_AS(cross_curvature(g), Error);
  }
  SECTION("dimension 2 rejected") {
    MetricField g = conformal_t2(16);
    CHECK_THROWS_AS(cross_curvature(g), Error);
  }
  SECTION("bump fixture satisfies the first-order identity") {
    // Resolution 32 keeps the quadratic-in-curvature products fully resolved.
    MetricField g = bump_t3(32, 1);
    const auto result = cross_curvature(g);
    CHECK(result.identity_residual < 1e-6 * result.identity_scale);
    CHECK(result.identity_residual_raw < 1e-6 * result.identity_scale_raw);
    // symmetry of Cr
    double asym = 0.0;
    for (int node = 0; node < g.grid().total_nodes(); ++node)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          asym = std::max(asym, std::abs(result.tensor.at(node, i, j) -
                                         result.tensor.at(node, j, i)));
    CHECK(asym < 1e-12 * std::max(1.0, field_linf(result.tensor)));
  }
}

TEST_CASE("sectional curvature") {
  SECTION("flat") {
    MetricField g = MetricField::flat(Grid::uniform(2, 16));
    CHECK(field_linf(sectional_curvature(g, 0, 1)) < 1e-12);
  }
  SECTION("equals s/2 in dimension 2") {
    MetricField g = conformal_t2();
    TensorField sigma = sectional_curvature(g, 0, 1);
    TensorField half_s = g.curvature().scalar();
    half_s *= 0.5;
    sigma -= half_s;
    CHECK(field_linf(sigma) < 1e-8);
  }
  SECTION("symmetric in the two axes") {
    MetricField g = bump_t3(24, 1, 0.01);
    TensorField a = sectional_curvature(g, 0, 2);
    TensorField b = sectional_curvature(g, 2, 0);
    a -= b;
    CHECK(field_linf(a) < 1e-12);
  }
  SECTION("coincident axes rejected") {
    MetricField g = MetricField::flat(Grid::uniform(2, 16));
    CHECK_THROWS_AS(sectional_curvature(g, 1, 1), Error);
  }
}

TEST_CASE("positive definiteness reporting") {
  Grid grid = Grid::uniform(2, 16);

  SECTION("flat metric passes") {
    MetricField flat = MetricField::flat(grid);
    CHECK(positive_definite_check(flat.tensor()).positive_definite);
  }

  SECTION("diag(1,-1) fails with eigenvalue -1") {
    TensorField bad = TensorField::sym2(grid);
    for (int node = 0; node < grid.total_nodes(); ++node) {
      bad.at(node, 0, 0) = 1.0;
      bad.at(node, 1, 1) = -1.0;
    }
    const auto report = positive_definite_check(bad);
    CHECK_FALSE(report.positive_definite);
    CHECK(report.min_eigenvalue == Catch::Approx(-1.0));
    CHECK(report.worst_node == 0);
  }

  SECTION("small perturbations stay positive definite") {
    MetricField flat = MetricField::flat(grid);
    Rng rng(12);
    TensorField phi = random_band_limited_sym2(grid, 4, 1.0, rng);
    TensorField g = flat.tensor();
    g.axpy(0.2, phi);  // |t phi|_inf = 0.2 < 1 = min eig of flat
    CHECK(positive_definite_check(g).positive_definite);
  }
}
