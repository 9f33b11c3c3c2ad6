#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "heisfan/eigenfunctions.hpp"
#include "heisfan/error.hpp"
#include "oracles.hpp"

using namespace heisfan;

namespace {

constexpr double kC = kSqrtTwoPi;

GroupElement random_point(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {kC * u(rng), kC * u(rng), kTwoPi * u(rng)};
}

/// Integral of f conj(g) over one copy by the periodic trapezoid rule in (x, y) at z = 0,
/// valid when f conj(g) does not depend on z.
Complex trapezoid_overlap(const CopyMode& f, const CopyMode& g, int n)
{
  const double h = kC / n;
  Complex total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const GroupElement q{i * h, j * h, 0.0};
      total += f.value(q) * std::conj(g.value(q));
    }
  return total * h * h * kTwoPi;
}

/// Periodic distance from the origin on the (x, y) torus.
double torus_radius(double x, double y)
{
  const double dx = std::remainder(x, kC), dy = std::remainder(y, kC);
  return std::hypot(dx, dy);
}

}  // namespace

TEST_SUITE("eigenfunctions")
{
  TEST_CASE("Zak modes against the direct sum")
  {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> level(0, 4), freq(1, 12), sign(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = level(rng);
      const std::int64_t alpha = (sign(rng) ? 1 : -1) * freq(rng);
      const int sector = static_cast<int>(rng() % static_cast<std::uint64_t>(std::llabs(alpha)));
      const BasisMode mode(BranchLabel::landau(n, alpha), sector);
      for (int p = 0; p < 10; ++p) {
        const auto q = random_point(rng);
        CHECK(std::abs(landau_mode_eval(mode, q) - oracle::zak_mode(n, alpha, sector, q.x, q.y, q.z)) < 1e-12);
      }
    }
  }

  TEST_CASE("frozen value at a sample point")
  {
    // direct summation with a much wider window than the library default
    const Complex v = landau_mode_eval(BasisMode(BranchLabel::landau(0, 2), 0), {0.3, 0.7, 1.1});
    CHECK(v.real() == doctest::Approx(-0.11958504591393466).epsilon(1e-13));
    CHECK(v.imag() == doctest::Approx(0.16529230738954542).epsilon(1e-13));
  }

  TEST_CASE("Fourier modes")
  {
    const BasisMode f(BranchLabel::fourier(2, -1));
    std::mt19937_64 rng(22);
    for (int i = 0; i < 20; ++i) {
      const auto q = random_point(rng);
      CHECK(std::abs(mode_eval(f, q) - oracle::fourier_mode(2, -1, q.x, q.y)) < 1e-15);
    }
    CHECK_THROWS_AS(BasisMode(BranchLabel::fourier(0, 0), 1), ValidationError);
    CHECK_THROWS_AS(BasisMode(BranchLabel::landau(0, 3), 3), ValidationError);
  }

  TEST_CASE("z phase and lattice invariance")
  {
    const BasisMode mode(BranchLabel::landau(1, -3), 2);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> u(-4, 4);
    for (int i = 0; i < 200; ++i) {
      const auto q = random_point(rng);
      const double t = 0.37 * i;
      CHECK(std::abs(mode_eval(mode, {q.x, q.y, q.z + t}) - std::polar(1.0, -3.0 * t) * mode_eval(mode, q)) < 1e-12);
      CHECK(std::abs(mode_eval(mode, group_mul({kC, 0, 0}, q)) - mode_eval(mode, q)) < 1e-12);
    }

    const auto phi = QuotientEigenfunction(
        {Term{{0.6, 0.0}, {CopyMode::basis(BranchLabel::landau(0, 4), 1), CopyMode::basis(BranchLabel::fourier(1, 1))}},
         Term{{0.0, 0.8}, {CopyMode::basis(BranchLabel::landau(0, -4), 0), CopyMode::basis(BranchLabel::fourier(-1, 1))}},
         Term{{0.3, 0.0}, {CopyMode::basis(BranchLabel::fourier(1, -1)), CopyMode::basis(BranchLabel::landau(0, 4), 3)}}});
    for (int i = 0; i < 500; ++i) {
      const ProductPoint q({random_point(rng), random_point(rng)});
      ProductPoint moved = q;
      for (auto& c : moved.copies) c = group_mul(LatticeElement{u(rng), u(rng), u(rng)}.embed(), c);
      CHECK(std::abs(phi.value(moved) - phi.value(q)) < 1e-10);
    }
  }

  TEST_CASE("eigen-equation residual")
  {
    std::mt19937_64 rng(24);
    std::uniform_int_distribution<int> level(0, 4), freq(1, 12), sign(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = level(rng);
      const std::int64_t alpha = (sign(rng) ? 1 : -1) * freq(rng);
      const int sector = static_cast<int>(rng() % static_cast<std::uint64_t>(std::llabs(alpha)));
      const auto phi = QuotientEigenfunction::single({BasisMode(BranchLabel::landau(n, alpha), sector)});
      CHECK(phi.eigenvalue() == static_cast<double>((2 * n + 1) * std::llabs(alpha)));
      double sup = 0.0, res = 0.0;
      for (int p = 0; p < 1000; ++p) {
        const ProductPoint q({random_point(rng)});
        const Complex v = phi.value(q);
        sup = std::max(sup, std::abs(v));
        res = std::max(res, std::abs(phi.apply_minus_delta(q) - phi.eigenvalue() * v));
      }
      worst = std::max(worst, res / sup);
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("closed-form Laplacian matches finite differences of the oracle")
  {
    // -(X^2 + Y^2) with X = d/dx, Y = d/dy - x d/dz, differentiated numerically
    const int n = 1;
    const std::int64_t alpha = 3;
    const double e = 1e-3;
    auto f = [&](double x, double y, double z) { return oracle::zak_mode(n, alpha, 1, x, y, z); };
    const BasisMode mode(BranchLabel::landau(n, alpha), 1);
    for (const GroupElement q : {GroupElement{0.4, 0.9, 0.2}, GroupElement{1.7, 2.2, 4.0}}) {
      const Complex fxx = (f(q.x + e, q.y, q.z) - 2.0 * f(q.x, q.y, q.z) + f(q.x - e, q.y, q.z)) / (e * e);
      auto yf = [&](double s) {
        // Y-flow: (x, y + s, z - x s)
        return f(q.x, q.y + s, q.z - q.x * s);
      };
      const Complex fyy = (yf(e) - 2.0 * yf(0.0) + yf(-e)) / (e * e);
      const Complex expected = -(fxx + fyy);
      CHECK(std::abs(mode_minus_delta(mode, q) - expected) < 1e-4 * std::max(1.0, std::abs(expected)));
      CHECK(std::abs(expected - 9.0 * f(q.x, q.y, q.z)) < 1e-4 * std::max(1.0, std::abs(expected)));
    }
  }

  TEST_CASE("simple Laplacian examples")
  {
    std::mt19937_64 rng(25);
    const auto c = QuotientEigenfunction::constant(2);
    const auto f = QuotientEigenfunction::single({BasisMode(BranchLabel::fourier(1, 0))});
    for (int i = 0; i < 20; ++i) {
      const ProductPoint q2({random_point(rng), random_point(rng)});
      CHECK(c.apply_minus_delta(q2) == Complex(0.0, 0.0));
      const ProductPoint q1({random_point(rng)});
      CHECK(std::abs(f.apply_minus_delta(q1) - kTwoPi * f.value(q1)) < 1e-12);
    }
  }

  TEST_CASE("mixed eigenvalues are rejected")
  {
    CHECK_THROWS_AS(QuotientEigenfunction({Term{{1, 0}, {CopyMode::basis(BranchLabel::landau(0, 1))}},
                                           Term{{1, 0}, {CopyMode::basis(BranchLabel::landau(0, 2))}}}),
                    ValidationError);
    CHECK_NOTHROW(QuotientEigenfunction({Term{{1, 0}, {CopyMode::basis(BranchLabel::landau(1, 1))}},
                                         Term{{1, 0}, {CopyMode::basis(BranchLabel::landau(0, 3))}}}));
  }

  TEST_CASE("normalization")
  {
    const auto f = QuotientEigenfunction::single({BasisMode(BranchLabel::fourier(1, 2))});
    const auto nf = f.normalized();
    std::mt19937_64 rng(26);
    for (int i = 0; i < 10; ++i) {
      const ProductPoint q({random_point(rng)});
      CHECK(std::abs(nf.value(q) - f.value(q)) < 1e-12);
    }
    const auto phi = QuotientEigenfunction(
        {Term{{0.5, 0.1}, {CopyMode::basis(BranchLabel::landau(1, 1))}},
         Term{{-0.2, 0.7}, {CopyMode::basis(BranchLabel::landau(0, 3), 1)}}});
    const auto n1 = normalize(phi), n2 = normalize(phi.scaled({2.0, 0.0}));
    CHECK(n1.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 10; ++i) {
      const ProductPoint q({random_point(rng)});
      CHECK(std::abs(n1.value(q) - n2.value(q)) < 1e-12);
    }
    CHECK(inner_product(n1, n1).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalize(phi.scaled({0.0, 0.0})), ValidationError);
  }

  TEST_CASE("quadrature norms of basis modes")
  {
    CHECK(std::abs(trapezoid_overlap(CopyMode::basis(BranchLabel::fourier(1, -1)), CopyMode::basis(BranchLabel::fourier(1, -1)), 32) - 1.0) < 1e-12);
    CHECK(std::abs(trapezoid_overlap(CopyMode::basis(BranchLabel::fourier(0, 0)), CopyMode::basis(BranchLabel::fourier(0, 0)), 8) - 1.0) < 1e-12);
    const auto l = CopyMode::basis(BranchLabel::landau(2, -3), 1);
    CHECK(std::abs(trapezoid_overlap(l, l, 96) - 1.0) < 1e-10);
  }

  TEST_CASE("Gram matrix of twenty modes with one frequency")
  {
    const std::int64_t alpha = 5;
    std::vector<CopyMode> modes;
    for (int n = 0; n < 4; ++n)
      for (int r = 0; r < 5; ++r) modes.push_back(CopyMode::basis(BranchLabel::landau(n, alpha), r));
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
      for (std::size_t j = i; j < modes.size(); ++j) {
        const Complex g = trapezoid_overlap(modes[i], modes[j], 96);
        if (i == j)
          diag = std::max(diag, std::abs(g - 1.0));
        else
          off = std::max(off, std::abs(g));
        CHECK(std::abs(copy_inner(modes[i], modes[j]) - (i == j ? 1.0 : 0.0)) == 0.0);
      }
    CHECK(off < 1e-6);
    CHECK(diag < 1e-6);
  }

  TEST_CASE("distinct labels are orthogonal")
  {
    const auto a = QuotientEigenfunction::single({BasisMode(BranchLabel::landau(0, 3)), BasisMode(BranchLabel::fourier(0, 1))});
    const auto b = QuotientEigenfunction::single({BasisMode(BranchLabel::fourier(0, 1)), BasisMode(BranchLabel::landau(0, 3))});
    CHECK(a.key() == b.key());
    CHECK(std::abs(inner_product(a, b)) == 0.0);
    CHECK(std::abs(trapezoid_overlap(CopyMode::basis(BranchLabel::landau(1, 2)), CopyMode::basis(BranchLabel::landau(0, 2)), 96)) < 1e-10);
  }

  TEST_CASE("single frequency densities do not depend on z")
  {
    const auto phi = QuotientEigenfunction(
        {Term{{0.6, 0.0}, {CopyMode::basis(BranchLabel::landau(0, 4), 1), CopyMode::basis(BranchLabel::landau(1, 2))}},
         Term{{0.0, 0.8}, {CopyMode::basis(BranchLabel::landau(0, 4), 3), CopyMode::basis(BranchLabel::landau(1, 2), 1)}}})
            .normalized();
    std::mt19937_64 rng(27);
    for (int i = 0; i < 200; ++i) {
      ProductPoint q({random_point(rng), random_point(rng)});
      const double d0 = std::norm(phi.value(q));
      q.copies[0].z += 1.234;
      q.copies[1].z -= 0.5;
      CHECK(std::abs(std::norm(phi.value(q)) - d0) < 1e-13);
    }
  }

  TEST_CASE("truncation convergence")
  {
    std::mt19937_64 rng(28);
    for (int n : {0, 3, 8})
      for (std::int64_t alpha : {1, -4, 11}) {
        const int w = default_half_width(n, alpha);
        const BasisMode base(BranchLabel::landau(n, alpha), 0, w);
        const BasisMode wide(BranchLabel::landau(n, alpha), 0, 2 * w);
        for (int i = 0; i < 20; ++i) {
          const auto q = random_point(rng);
          CHECK(std::abs(landau_mode_eval(base, q) - landau_mode_eval(wide, q)) < 1e-12);
        }
      }
  }

  TEST_CASE("localized states")
  {
    const auto one = localized_state(0, 1, 0.0, 0.0);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(std::abs(one[0].second) - 1.0) < 1e-15);

    // mass of the alpha = 25 state inside the disc of radius 0.5
    const auto state = localized_copy(0, 25, 0.0, 0.0);
    CHECK(state.norm2() == doctest::Approx(1.0).epsilon(1e-14));
    const int n = 200;
    const double h = kC / n;
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double d = std::norm(state.value({i * h, j * h, 0.0})) * h * h * kTwoPi;
        total += d;
        if (torus_radius(i * h, j * h) < 0.5) inside += d;
      }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(inside >= 0.9);

    // translating the centre translates the density, up to the lattice sampling of the weights
    const double x0 = 0.83, y0 = 1.47;
    const auto moved = localized_copy(0, 25, x0, y0);
    std::mt19937_64 rng(29);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto q = random_point(rng);
      worst = std::max(worst, std::abs(std::norm(moved.value({q.x + x0, q.y + y0, 0.0})) - std::norm(state.value(q))));
    }
    CHECK(worst < 1e-7);
  }

  TEST_CASE("grid sampling and export")
  {
    const auto phi = QuotientEigenfunction::single({BasisMode(BranchLabel::landau(0, 1))});
    const auto field = sample_field(phi, ProductPoint::origin(1), {AxisSelector::parse("x1"), AxisSelector::parse("y1"), AxisSelector::parse("z1")}, 24);
    CHECK(field.size() == 24u * 24u * 24u);
    CHECK(field.volume() == doctest::Approx(kTwoPi * kTwoPi).epsilon(1e-10));
    CHECK(std::abs(field.integrate()) < 1e-12);
    std::ostringstream os;
    write_grid_csv(os, field);
    CHECK(os.str().rfind("x1,y1,z1,re,im,abs2\n", 0) == 0);
    CHECK_THROWS_AS(AxisSelector::parse("w1"), ValidationError);
  }
}
