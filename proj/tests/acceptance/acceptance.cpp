// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "heisfan/cones.hpp"
#include "heisfan/quantum_limits.hpp"
#include "heisfan/sequences.hpp"
#include "heisfan/spectrum.hpp"
#include "oracles.hpp"

using namespace heisfan;

namespace {

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what)
  {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what)
  {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

GroupElement random_point(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {kSqrtTwoPi * u(rng), kSqrtTwoPi * u(rng), kTwoPi * u(rng)};
}

// ------------------------------------------------------------------ 1

Outcome eigen_equation()
{
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> level(0, 4), freq(1, 12), coin(0, 1), fourier(-3, 3);
  auto random_mode = [&]() {
    if (coin(rng) && coin(rng)) return BasisMode(BranchLabel::fourier(fourier(rng), fourier(rng)));
    const std::int64_t alpha = (coin(rng) ? 1 : -1) * freq(rng);
    const int sector = static_cast<int>(rng() % static_cast<std::uint64_t>(std::llabs(alpha)));
    return BasisMode(BranchLabel::landau(level(rng), alpha), sector);
  };
  double worst_residual = 0.0, worst_oracle = 0.0;
  for (int f = 0; f < 50; ++f) {
    const int m = 1 + f % 2;
    std::vector<BasisMode> modes;
    for (int j = 0; j < m; ++j) modes.push_back(random_mode());
    const auto phi = QuotientEigenfunction::single(modes);
    double sup = 0.0, res = 0.0;
    for (int p = 0; p < 1000; ++p) {
      std::vector<GroupElement> c;
      for (int j = 0; j < m; ++j) c.push_back(random_point(rng));
      const ProductPoint q(c);
      const Complex v = phi.value(q);
      sup = std::max(sup, std::abs(v));
      res = std::max(res, std::abs(phi.apply_minus_delta(q) - phi.eigenvalue() * v));
      // the library value against the direct Zak sum
      Complex ref = 1.0;
      for (int j = 0; j < m; ++j) {
        const auto& b = modes[static_cast<std::size_t>(j)].branch;
        const auto& g = c[static_cast<std::size_t>(j)];
        ref *= b.is_landau() ? oracle::zak_mode(b.level(), b.alpha(), modes[static_cast<std::size_t>(j)].sector, g.x, g.y, g.z)
                             : oracle::fourier_mode(b.k(), b.l(), g.x, g.y);
      }
      worst_oracle = std::max(worst_oracle, std::abs(v - ref));
    }
    worst_residual = std::max(worst_residual, res / sup);
  }
  o.require(worst_residual < 1e-8, "residual " + num(worst_residual));
  o.require(worst_oracle < 1e-11, "value vs direct sum " + num(worst_oracle));
  o.note("max relative residual " + num(worst_residual));
  return o;
}

// ------------------------------------------------------------------ 2

Outcome spectrum_cross_validation()
{
  Outcome o;
  const auto direct = enumerate_h1(500.0), arithmetic = enumerate_h1_arithmetic(500.0);
  bool same = direct.entries.size() == arithmetic.entries.size();
  for (std::size_t i = 0; same && i < direct.entries.size(); ++i) {
    const auto& a = direct.entries[i];
    const auto& b = arithmetic.entries[i];
    same = a.key == b.key && a.multiplicity == b.multiplicity &&
           std::set<JointLabel>(a.labels.begin(), a.labels.end()) == std::set<JointLabel>(b.labels.begin(), b.labels.end());
  }
  o.require(same, "m=1 enumerators differ");

  const auto one = oracle::h1_multiplicities(500.0);
  std::map<EigenKey, std::uint64_t> lib;
  for (const auto& e : direct.entries) lib[e.key] = e.multiplicity;
  o.require(lib == one, "m=1 differs from the direct count");

  const auto one200 = oracle::h1_multiplicities(200.0);
  const auto expected = oracle::convolve(one200, one200, 200.0);
  std::map<EigenKey, std::uint64_t> heap, sumset;
  for (const auto& e : enumerate_hm(2, 200.0).entries) heap[e.key] = e.multiplicity;
  for (const auto& e : sumset_multiplicities(2, 200.0)) sumset[e.key] = e.multiplicity;
  o.require(heap == sumset, "m=2 enumerators differ");
  o.require(heap == expected, "m=2 differs from the convolution");

  o.require(one.at({1, 0}) == 2 && lib.at({1, 0}) == 2, "mult(1)");
  o.require(one.at({3, 0}) == 8 && lib.at({3, 0}) == 8, "mult(3)");
  o.require(one.at({0, 1}) == 4 && lib.at({0, 1}) == 4, "mult(2pi)");
  o.note(std::to_string(direct.entries.size()) + " eigenvalues (m=1), " + std::to_string(heap.size()) + " (m=2)");
  return o;
}

// ------------------------------------------------------------------ 3

Outcome multiplicity_dimension()
{
  Outcome o;
  double worst = 0.0;
  const int n_grid = 128;
  const double h = kSqrtTwoPi / n_grid;
  for (std::int64_t a = 1; a <= 6; ++a)
    for (std::int64_t alpha : {a, -a}) {
      std::vector<CopyMode> modes;
      for (int n = 0; n <= 2; ++n)
        for (int r = 0; r < a; ++r) modes.push_back(CopyMode::basis(BranchLabel::landau(n, alpha), r));
      // values on the periodic grid, z = 0 (the products do not depend on z)
      std::vector<std::vector<Complex>> values(modes.size());
      for (std::size_t i = 0; i < modes.size(); ++i)
        for (int x = 0; x < n_grid; ++x)
          for (int y = 0; y < n_grid; ++y) values[i].push_back(modes[i].value({x * h, y * h, 0.0}));
      for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i; j < modes.size(); ++j) {
          Complex g = 0.0;
          for (std::size_t p = 0; p < values[i].size(); ++p) g += values[i][p] * std::conj(values[j][p]);
          g *= h * h * kTwoPi;
          worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
  o.require(worst < 1e-6, "Gram deviation " + num(worst));
  o.note("max Gram deviation " + num(worst));
  return o;
}

// ------------------------------------------------------------------ 4

Outcome density_trend()
{
  Outcome o;
  double last = 0.0;
  std::string values;
  for (double cutoff : {100.0, 400.0, 1600.0}) {
    const double f = density_fraction(1, cutoff);
    std::uint64_t landau = 0, total = 0;
    for (const auto& [k, mult] : oracle::h1_multiplicities(cutoff)) {
      total += mult;
      if (k.two_pi_part == 0 && k.integer_part > 0) landau += mult;
    }
    const double ref = static_cast<double>(landau) / static_cast<double>(total);
    o.require(std::abs(f - ref) < 1e-14, "oracle mismatch at " + num(cutoff));
    o.require(f >= last, "not monotone at " + num(cutoff));
    last = f;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", f);
    values += (values.empty() ? "" : ", ") + std::string(buf);
  }
  o.require(last >= 0.9, "below 0.9 at 1600");
  o.note("fractions " + values);
  return o;
}

// ------------------------------------------------------------------ 5

Outcome localization()
{
  Outcome o;
  const auto seq = tensor_preset("localized");
  Prediction conc;
  conc.kind = PredictionKind::concentration;
  conc.copies = {0};
  conc.radius = 0.4;
  Prediction uz;
  uz.kind = PredictionKind::uniform_z;
  uz.copies = {0};
  double last = 1.0, worst_z = 0.0, final_mass = 1.0;
  std::string series;
  for (int k = 3; k <= 10; ++k) {
    const auto phi = seq_tensor(seq, k);
    const double outside = measure_prediction(phi, conc);
    o.require(outside < last, "not decreasing at k=" + std::to_string(k));
    last = outside;
    worst_z = std::max(worst_z, measure_prediction(phi, uz));
    series += (series.empty() ? "" : " ") + num(outside);
    if (k == 10) {
      final_mass = outside;
      // brute-force midpoint measurement of the same quantity
      const int n = 600;
      const double h = kSqrtTwoPi / n;
      double out = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double x = (i + 0.5) * h, y = (j + 0.5) * h;
          if (std::hypot(std::remainder(x, kSqrtTwoPi), std::remainder(y, kSqrtTwoPi)) > 0.4)
            out += std::norm(phi.value(ProductPoint({{x, y, 0.0}}))) * h * h * kTwoPi;
        }
      o.require(std::abs(out - outside) < 2e-3, "brute-force mass " + num(out) + " vs " + num(outside));
    }
  }
  o.require(final_mass < 0.1, "outside mass at k=10 is " + num(final_mass));
  o.require(worst_z < 1e-10, "z-marginal deviation " + num(worst_z));
  o.note("outside mass " + series + "; z deviation " + num(worst_z));
  return o;
}

// ------------------------------------------------------------------ 6

Outcome converse_flow()
{
  Outcome o;
  const auto target = converse_preset("diagonal");
  const auto dict = standard_dictionary(2);
  const std::vector<TestFunction> coupling{parse_test_function("cos(z1-z2)", 2)};
  const SimplexPoint along({0, 1}, {0.5, 0.5}), across({0}, {1.0});
  Prediction line;
  line.kind = PredictionKind::line_z;
  line.copies = {0, 1};
  double worst_along = 0.0, worst_line = 0.0;
  std::string transverse;
  for (int k : {5, 10}) {
    const auto phi = seq_converse(target, k);
    // a + b = a' + b'
    std::set<std::int64_t> sums;
    for (const auto& t : phi.terms()) sums.insert(t.copies[0].branch.alpha() + t.copies[1].branch.alpha());
    o.require(sums.size() == 1 && phi.terms().size() == 2, "not an equal-eigenvalue two-alpha superposition");
    for (double t : {std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi})
      worst_along = std::max(worst_along, invariance_defect(phi, along, t, dict));
    const double d = invariance_defect(phi, across, std::numbers::pi, coupling);
    o.require(d > 0.01, "transverse defect " + num(d) + " at k=" + std::to_string(k));
    transverse += (transverse.empty() ? "" : " ") + num(d);
    worst_line = std::max(worst_line, measure_prediction(phi, line));
    if (k == 5) {
      // closed form 2|Re A| with A = ∫ e^{i(z1-z2)} |phi|^2 from brute-force cube integrals
      Complex a = 0.0;
      for (const auto& s : phi.terms())
        for (const auto& t : phi.terms()) {
          auto f = [](const CopyMode& c) { return [&c](double x, double y, double z) { return c.value({x, y, z}); }; };
          a += s.coefficient * std::conj(t.coefficient) *
               oracle::cube_integral(f(s.copies[0]), f(t.copies[0]), 0, 0, 1, 160, 6) *
               oracle::cube_integral(f(s.copies[1]), f(t.copies[1]), 0, 0, -1, 160, 6);
        }
      o.require(std::abs(d - 2.0 * std::abs(a.real())) < 1e-4, "transverse defect vs brute force " + num(2.0 * std::abs(a.real())));
    }
  }
  o.require(worst_along < 1e-8, "defect along s " + num(worst_along));
  o.require(worst_line < 1e-8, "line-z deviation " + num(worst_line));
  o.note("defect along s " + num(worst_along) + ", transverse " + transverse + ", line-z " + num(worst_line));
  return o;
}

// ------------------------------------------------------------------ 7

Outcome splitting()
{
  Outcome o;
  const EigenKey key{1, 1};
  std::vector<Term> terms;
  for (const auto& l : labels_with_key(2, key)) {
    std::vector<CopyMode> copies;
    for (const auto& b : l.branches()) copies.push_back(CopyMode::basis(b));
    terms.push_back(Term{{1.0, 0.0}, copies});
  }
  const auto phi = QuotientEigenfunction(terms).normalized();
  const auto s = split_copy_sets(phi, 0.1);
  o.require(!s.elliptic.has_value() && s.pieces.size() == 2 && s.pieces.count(CopySet(1)) && s.pieces.count(CopySet(2)),
            "expected pieces {1} and {2}");
  if (o.pass) {
    const auto& a = s.pieces.at(CopySet(1));
    const auto& b = s.pieces.at(CopySet(2));
    o.require(a.key() == key && b.key() == key, "pieces left the eigenvalue");
    // label count per side fixes the mass split exactly
    std::size_t na = a.terms().size(), nb = b.terms().size();
    const double share = static_cast<double>(na) / static_cast<double>(na + nb);
    o.require(std::abs(s.masses.at(CopySet(1)) - share) < 1e-14, "mass of {1}");
    o.require(std::abs(s.masses.at(CopySet(2)) - (1.0 - share)) < 1e-14, "mass of {2}");
    o.require(std::abs(inner_product(a, b)) == 0.0, "pieces not orthogonal");
    const double quad = std::abs(joint_pairing(a, b, TestFunction::constant(2)));
    o.require(quad < 1e-10, "quadrature overlap " + num(quad));
    std::mt19937_64 rng(107);
    double gap = 0.0;
    for (int i = 0; i < 200; ++i) {
      const ProductPoint q({random_point(rng), random_point(rng)});
      gap = std::max(gap, std::abs(a.value(q) + b.value(q) - phi.value(q)));
    }
    o.require(gap < 1e-12, "pieces do not sum to phi");
    o.note("masses " + num(s.masses.at(CopySet(1))) + "/" + num(s.masses.at(CopySet(2))));
  }

  // joint pairing of the sequences on Sigma_{1} and Sigma_{2} at lambda_k = k + 2pi
  const std::vector<TestFunction> planar{parse_test_function("cos(x1)", 2), parse_test_function("cos(y1)", 2),
                                         parse_test_function("cos(x1+y1)", 2), parse_test_function("sin(x1-y1)", 2)};
  double last = 1.0;
  std::string series;
  for (int k : {4, 8, 16, 32}) {
    const QuotientEigenfunction left({Term{{1.0, 0.0}, {localized_copy(0, k, 0.0, 0.0), CopyMode::basis(BranchLabel::fourier(1, 0))}}});
    const QuotientEigenfunction right({Term{{1.0, 0.0}, {CopyMode::basis(BranchLabel::fourier(1, 0)), localized_copy(0, k, 0.0, 0.0)}}});
    double v = 0.0;
    for (const auto& a : planar) v = std::max(v, std::abs(joint_pairing(left, right, a)));
    o.require(v <= last, "joint pairing grew at k=" + std::to_string(k));
    last = v;
    series += (series.empty() ? "" : " ") + num(v);
  }
  o.require(last < 0.05, "final joint pairing " + num(last));
  o.note("joint pairing " + series);
  return o;
}

// ------------------------------------------------------------------ 8

Outcome disintegration()
{
  Outcome o;
  const auto phi = seq_converse(converse_preset("two-s"), 6);
  const CopySet both(3);
  const ConePartition p(2, 6);
  const std::vector<int> even{0, 0}, skew{0, 1};
  std::map<std::uint64_t, double> masses;
  for (const auto& c : cone_masses(phi, both, 6).cells) masses[c.index] += c.mass;
  const double m1 = masses[p.locate_levels(even)], m2 = masses[p.locate_levels(skew)];
  o.require(std::abs(m1 - 0.36) < 1e-9, "mass at s=(1/2,1/2) is " + num(m1));
  o.require(std::abs(m2 - 0.64) < 1e-9, "mass at s=(1/4,3/4) is " + num(m2));
  double worst = 0.0;
  for (int n = 2; n < 6; ++n) {
    std::map<std::uint64_t, double> coarse, folded;
    double total = 0.0;
    for (const auto& c : cone_masses(phi, both, n).cells) {
      coarse[c.index] += c.mass;
      total += c.mass;
    }
    for (const auto& c : cone_masses(phi, both, n + 1).cells) folded[c.index >> 1] += c.mass;
    worst = std::max(worst, std::abs(total - 1.0));
    for (const auto& [leaf, m] : coarse) worst = std::max(worst, std::abs(folded[leaf] - m));
    o.require(coarse.size() == folded.size(), "refinement created a cell");
  }
  o.require(worst < 1e-12, "refinement leak " + num(worst));
  o.note("cells " + std::to_string(p.locate_levels(even)) + "/" + std::to_string(p.locate_levels(skew)) + " masses " +
         num(m1) + "/" + num(m2) + ", leak " + num(worst));
  return o;
}

// ------------------------------------------------------------------ 9

oracle::Simplex standard_simplex(int j)
{
  oracle::Simplex s;
  for (int i = 0; i < j; ++i) {
    std::vector<double> v(static_cast<std::size_t>(j), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    s.v.push_back(v);
  }
  s.tag = j - 1;
  return s;
}

Outcome partition_axioms()
{
  Outcome o;
  std::mt19937_64 rng(109);
  std::exponential_distribution<double> e(1.0);
  for (int j : {2, 3}) {
    std::vector<ConePartition> parts;
    for (int n = 0; n <= 10; ++n) parts.emplace_back(j, n);
    int bad_unique = 0, bad_leaf = 0, bad_nest = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<double> s(static_cast<std::size_t>(j));
      double total = 0.0;
      for (auto& v : s) total += (v = e(rng));
      for (auto& v : s) v /= total;
      auto cell = standard_simplex(j);
      std::uint64_t path = 0;
      for (int level = 1; level <= 10; ++level) {
        const auto [lower, upper] = oracle::bisect(cell);
        const bool in_lower = oracle::contains(lower, s, 1e-12), in_upper = oracle::contains(upper, s, 1e-12);
        if (in_lower == in_upper) ++bad_unique;
        cell = in_lower ? lower : upper;
        path = (path << 1) | (in_lower ? 0u : 1u);
        const auto leaf = parts[static_cast<std::size_t>(level)].locate(s);
        if (leaf != path) ++bad_leaf;
        if ((leaf >> 1) != parts[static_cast<std::size_t>(level - 1)].locate(s)) ++bad_nest;
      }
    }
    o.require(bad_unique == 0, std::to_string(bad_unique) + " points not in exactly one child (J=" + std::to_string(j) + ")");
    o.require(bad_leaf == 0, std::to_string(bad_leaf) + " leaves off the bisection (J=" + std::to_string(j) + ")");
    o.require(bad_nest == 0, std::to_string(bad_nest) + " nesting failures (J=" + std::to_string(j) + ")");
    double last = parts[0].max_diameter();
    for (int n = 1; n <= 10; ++n) {
      const double d = parts[static_cast<std::size_t>(n)].max_diameter();
      o.require(d <= last + 1e-15, "d(N) increased at N=" + std::to_string(n));
      last = d;
    }
    const double deep = ConePartition(j, 30).max_diameter();
    o.require(deep < 1e-3, "d(30) = " + num(deep));
    o.note("J=" + std::to_string(j) + " d(10)=" + num(last) + " d(30)=" + num(deep));
  }
  return o;
}

// ----------------------------------------------------------------- 10

std::string run_cli(std::vector<std::string> args, int& code)
{
  args.insert(args.begin(), "heisfan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome golden_files()
{
  Outcome o;
  const std::string dir = HEISFAN_GOLDEN_DIR;
  int c1 = 0, c2 = 0, c3 = 0;
  const auto spec1 = run_cli({"spectrum", "--m", "1", "--lambda", "100", "--threads", "1"}, c1);
  const auto spec2 = run_cli({"spectrum", "--m", "1", "--lambda", "100", "--threads", "8"}, c2);
  o.require(c1 == 0 && c2 == 0, "spectrum run failed");
  o.require(spec1 == spec2, "spectrum differs between runs");
  o.require(spec1 == read_file(dir + "/spectrum_m1_lambda100.csv"), "spectrum differs from the golden file");

  const auto fan1 = run_cli({"fan", "--m", "2", "--lambda", "50", "--threads", "1"}, c1);
  const auto fan2 = run_cli({"fan", "--m", "2", "--lambda", "50", "--threads", "8"}, c2);
  const auto fan3 = run_cli({"fan", "--m", "2", "--lambda", "50"}, c3);
  o.require(c1 == 0 && c2 == 0 && c3 == 0, "fan run failed");
  o.require(fan1 == fan2 && fan2 == fan3, "fan differs between runs");
  std::istringstream digest(read_file(dir + "/fan_m2_lambda50.fnv1a"));
  std::string hex;
  std::size_t lines = 0, bytes = 0;
  digest >> hex >> lines >> bytes;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(oracle::fnv1a(fan1)));
  o.require(hex == buf, "fan digest " + std::string(buf) + " differs from the golden " + hex);
  o.require(static_cast<std::size_t>(std::count(fan1.begin(), fan1.end(), '\n')) == lines, "fan line count");
  o.require(fan1.size() == bytes, "fan byte count");
  o.note("spectrum " + std::to_string(spec1.size()) + " bytes, fan " + std::to_string(fan1.size()) + " bytes");
  return o;
}

struct Criterion
{
  int id;
  const char* title;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main()
{
  const std::vector<Criterion> criteria{
      {1, "eigen-equation residual", 60, eigen_equation},
      {2, "spectrum cross-validation", 30, spectrum_cross_validation},
      {3, "Zak sector Gram matrices", 60, multiplicity_dimension},
      {4, "density-one trend", 60, density_trend},
      {5, "localization along alpha = k^2", 120, localization},
      {6, "mixture flow invariance", 120, converse_flow},
      {7, "splitting at 1+2pi", 120, splitting},
      {8, "two-s disintegration", 30, disintegration},
      {9, "cone partition axioms", 10, partition_axioms},
      {10, "golden outputs", 60, golden_files},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.limit_seconds) o.require(false, "took " + num(seconds) + " s, limit " + num(c.limit_seconds) + " s");
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " (" << num(seconds)
              << " s) " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
