#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "heisfan/error.hpp"
#include "heisfan/spectrum.hpp"
#include "heisfan/spectrum_io.hpp"
#include "oracles.hpp"

using namespace heisfan;

namespace {

std::map<EigenKey, std::uint64_t> as_map(const SpectrumTable& t)
{
  std::map<EigenKey, std::uint64_t> out;
  for (const auto& e : t.entries) out[e.key] = e.multiplicity;
  return out;
}

bool same_tables(const SpectrumTable& a, const SpectrumTable& b)
{
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.key != y.key || x.multiplicity != y.multiplicity) return false;
    std::set<JointLabel> lx(x.labels.begin(), x.labels.end()), ly(y.labels.begin(), y.labels.end());
    if (lx != ly) return false;
  }
  return true;
}

double oracle_density(double cutoff)
{
  std::uint64_t landau = 0, total = 0;
  for (const auto& [k, mult] : oracle::h1_multiplicities(cutoff)) {
    total += mult;
    if (k.two_pi_part == 0 && k.integer_part > 0) landau += mult;
  }
  return static_cast<double>(landau) / static_cast<double>(total);
}

}  // namespace

TEST_SUITE("spectrum")
{
  TEST_CASE("eigenvalue of labels")
  {
    CHECK(eigenvalue_of(JointLabel({BranchLabel::landau(0, 1)})) == 1.0);
    CHECK(eigenvalue_of(JointLabel({BranchLabel::fourier(1, 0)})) == doctest::Approx(2 * std::numbers::pi));
    const JointLabel two({BranchLabel::landau(0, 1), BranchLabel::landau(1, 2)});
    CHECK(eigenvalue_of(two) == 7.0);
    CHECK(two.key() == EigenKey{7, 0});
    CHECK(two.landau_copies().to_string() == "{1,2}");
    CHECK(two.weight() == 2);
    CHECK_THROWS_AS(BranchLabel::landau(0, 0), ValidationError);
    CHECK_THROWS_AS(BranchLabel::landau(-1, 2), ValidationError);
  }

  TEST_CASE("label text round trips")
  {
    for (const char* text : {"L(0,1)", "L(3,-7)", "F(0,0)", "F(-2,5)"})
      CHECK(BranchLabel::parse(text).to_string() == text);
    const auto j = JointLabel::parse("L(1,-2)|F(0,1)|L(0,3)");
    CHECK(j.to_string() == "L(1,-2)|F(0,1)|L(0,3)");
    CHECK(j.key() == EigenKey{9, 1});
    for (const EigenKey k : {EigenKey{0, 0}, EigenKey{7, 0}, EigenKey{0, 1}, EigenKey{0, 3}, EigenKey{1, 1}, EigenKey{3, 4}})
      CHECK(EigenKey::parse(k.to_string()) == k);
    CHECK(EigenKey::parse("1+2pi") == EigenKey{1, 1});
    CHECK_THROWS_AS(BranchLabel::parse("Q(1,2)"), ValidationError);
  }

  TEST_CASE("one copy examples")
  {
    const auto small = enumerate_h1(1.5);
    REQUIRE(small.entries.size() == 2);
    CHECK(small.entries[0].eigenvalue == 0.0);
    CHECK(small.entries[0].multiplicity == 1);
    CHECK(small.entries[1].eigenvalue == 1.0);
    CHECK(small.entries[1].multiplicity == 2);

    CHECK(enumerate_h1(3.5).find({3, 0})->multiplicity == 8);
    const auto* two_pi = enumerate_h1(7.0).find({0, 1});
    REQUIRE(two_pi != nullptr);
    CHECK(two_pi->multiplicity == 4);
  }

  TEST_CASE("one copy against the direct count")
  {
    for (double cutoff : {10.0, 97.5, 500.0}) {
      const auto table = enumerate_h1(cutoff);
      CHECK(as_map(table) == oracle::h1_multiplicities(cutoff));
      std::map<EigenKey, std::uint64_t> counts;
      for (const auto& e : table.entries) counts[e.key] = e.labels.size();
      CHECK(counts == oracle::h1_label_counts(cutoff));
    }
  }

  TEST_CASE("direct scan and arithmetic route agree up to 500")
  {
    CHECK(same_tables(enumerate_h1(500.0), enumerate_h1_arithmetic(500.0)));
  }

  TEST_CASE("table invariants")
  {
    const auto table = enumerate_hm(2, 60.0);
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
      const auto& e = table.entries[i];
      CHECK(e.eigenvalue <= 60.0);
      if (i > 0) CHECK(table.entries[i - 1].eigenvalue < e.eigenvalue);
      std::uint64_t mult = 0;
      for (const auto& l : e.labels) {
        CHECK(l.key() == e.key);
        double sum = 0.0;
        for (const auto& b : l.branches()) sum += b.eigenvalue();
        CHECK(std::abs(sum - e.eigenvalue) <= 1e-12 * std::max(1.0, e.eigenvalue));
        CopySet landau;
        for (int j = 0; j < l.m(); ++j)
          if (l.branches()[static_cast<std::size_t>(j)].is_landau()) landau.insert(j);
        CHECK(landau == l.landau_copies());
        mult += l.weight();
      }
      CHECK(mult == e.multiplicity);
    }
  }

  TEST_CASE("two copy examples")
  {
    const auto zero = enumerate_hm(2, 0.5);
    REQUIRE(zero.entries.size() == 1);
    CHECK(zero.entries[0].multiplicity == 1);

    const auto t = enumerate_hm(2, 2.5);
    REQUIRE(t.entries.size() == 3);
    CHECK(t.entries[1].key == EigenKey{1, 0});
    for (const auto& l : t.entries[1].labels) CHECK(l.landau_copies().size() == 1);
    CHECK(t.entries[2].key == EigenKey{2, 0});
    std::vector<JointLabel> full;
    for (const auto& l : t.entries[2].labels)
      if (l.landau_copies().size() == 2) full.push_back(l);
    CHECK(full.size() == 4);
    for (const auto& l : full)
      for (const auto& b : l.branches()) CHECK(std::llabs(b.alpha()) == 1);

    const auto* mixed = enumerate_hm(2, 8.0).find({1, 1});
    REQUIRE(mixed != nullptr);
    std::set<CopySet> sets;
    for (const auto& l : mixed->labels) sets.insert(l.landau_copies());
    CHECK(sets.count(CopySet(1)) == 1);
    CHECK(sets.count(CopySet(2)) == 1);
  }

  TEST_CASE("two copies against the convolution of one-copy tables")
  {
    const double cutoff = 200.0;
    const auto one = oracle::h1_multiplicities(cutoff);
    const auto expected = oracle::convolve(one, one, cutoff);
    CHECK(as_map(enumerate_hm(2, cutoff)) == expected);

    std::map<EigenKey, std::uint64_t> sumset;
    for (const auto& e : sumset_multiplicities(2, cutoff)) sumset[e.key] = e.multiplicity;
    CHECK(sumset == expected);

    const auto counts = oracle::h1_label_counts(cutoff);
    std::uint64_t labels = 0;
    for (const auto& [k, n] : oracle::convolve(counts, counts, cutoff)) labels += n;
    CHECK(count_joint_labels(2, cutoff) == labels);
  }

  TEST_CASE("three copies against the convolution")
  {
    const double cutoff = 40.0;
    const auto one = oracle::h1_multiplicities(cutoff);
    CHECK(as_map(enumerate_hm(3, cutoff)) == oracle::convolve(oracle::convolve(one, one, cutoff), one, cutoff));
  }

  TEST_CASE("streaming order")
  {
    JointLabelStream stream(2, 30.0);
    double last = -1.0;
    std::size_t n = 0;
    while (auto l = stream.next()) {
      CHECK(l->eigenvalue() >= last);
      last = l->eigenvalue();
      ++n;
    }
    CHECK(n == enumerate_hm(2, 30.0).label_count());
  }

  TEST_CASE("capacity guard")
  {
    EnumerationOptions opt;
    opt.max_labels = 100;
    CHECK_THROWS_AS(enumerate_hm(2, 200.0, opt), CapacityError);
  }

  TEST_CASE("density fraction")
  {
    CHECK(density_fraction(1, 0.5) == 0.0);
    double last = 0.0;
    for (double cutoff : {100.0, 400.0, 1600.0}) {
      const double f = density_fraction(1, cutoff);
      CHECK(f == doctest::Approx(oracle_density(cutoff)).epsilon(1e-14));
      CHECK(f > 0.0);
      CHECK(f < 1.0);
      CHECK(f >= last);
      last = f;
    }
    CHECK(last >= 0.9);
    // for m >= 2 the constant mode times L(0,N) shares every integer eigenvalue
    CHECK(density_fraction(2, 50.0) == 0.0);
  }

  TEST_CASE("fan points")
  {
    const auto p = fan_point(JointLabel({BranchLabel::landau(0, 1)}));
    CHECK(p.eigenvalue == 1.0);
    CHECK(p.abs_alpha == std::vector<std::int64_t>{1});
    CHECK(p.odd == std::vector<std::int64_t>{1});
    const auto f = fan_point(JointLabel({BranchLabel::fourier(1, 0)}));
    CHECK(f.eigenvalue == doctest::Approx(2 * std::numbers::pi));
    CHECK(f.abs_alpha == std::vector<std::int64_t>{0});
    CHECK(f.odd == std::vector<std::int64_t>{0});
    CHECK(fan_points(2, 10.0).size() == enumerate_hm(2, 10.0).label_count());

    std::ostringstream os;
    const auto rows = write_fan_csv(os, 2, 10.0);
    CHECK(rows == fan_points(2, 10.0).size());
    CHECK(os.str().rfind("eigenvalue,alpha_1,alpha_2,odd_1,odd_2\n", 0) == 0);
  }

  TEST_CASE("equal eigenvalue matching")
  {
    const auto sign_pair = labels_with_key(1, {1, 0});
    CHECK(sign_pair.size() == 2);

    MatchConstraints levels;
    levels.allowed_sets = {CopySet(3)};
    levels.levels = {0, 0};
    CHECK(labels_with_key(2, {2, 0}, levels).size() == 4);

    MatchConstraints mixed;
    mixed.allowed_sets = {CopySet(1), CopySet(2)};
    const auto groups = match_equal_eigenvalues(2, mixed, 8.0);
    bool found = false;
    for (const auto& g : groups) {
      CHECK(g.labels.size() >= 2);
      for (const auto& l : g.labels) {
        CHECK(l.key() == g.key);
        CHECK(mixed.admits(l));
      }
      if (g.key == EigenKey{1, 1}) {
        std::set<CopySet> sets;
        for (const auto& l : g.labels) sets.insert(l.landau_copies());
        found = sets.size() == 2;
      }
    }
    CHECK(found);

    // pure-Landau groups sit on integers, pure-Fourier ones on multiples of 2pi
    for (const auto& g : match_equal_eigenvalues(2, {}, 20.0)) {
      for (const auto& l : g.labels) {
        if (l.landau_copies() == CopySet(3)) CHECK(g.key.two_pi_part == 0);
        if (l.landau_copies().empty()) CHECK(g.key.integer_part == 0);
      }
    }
    CHECK(labels_with_key(1, {2, 1}).empty());
  }

  TEST_CASE("nearest alpha")
  {
    const auto a = nearest_alpha_with_eigenvalue({1, 1}, {1.0, 2.0}, 30);
    REQUIRE(a.has_value());
    CHECK((*a)[0] == 10);
    CHECK((*a)[1] == 20);
    const auto b = nearest_alpha_with_eigenvalue({1, 3}, {1.0, -1.0}, 8);
    REQUIRE(b.has_value());
    CHECK(std::llabs((*b)[0]) + 3 * std::llabs((*b)[1]) == 8);
    CHECK((*b)[1] < 0);
  }

  TEST_CASE("H-type spectra")
  {
    const auto h = enumerate_htype(1, {1.0}, 3.5);
    const auto h1 = enumerate_h1(3.5);
    REQUIRE(h.entries.size() == h1.entries.size());
    for (std::size_t i = 0; i < h.entries.size(); ++i) {
      CHECK(h.entries[i].eigenvalue == doctest::Approx(h1.entries[i].eigenvalue));
      CHECK(h.entries[i].multiplicity == h1.entries[i].multiplicity);
    }

    auto smallest_landau = [](const HtypeSpectrumTable& t) {
      for (const auto& e : t.entries)
        for (const auto& l : e.labels)
          if (l.alpha != 0) return e.eigenvalue;
      return -1.0;
    };
    CHECK(smallest_landau(enumerate_htype(2, {1.0, 1.0}, 2.5)) == doctest::Approx(2.0));
    CHECK(smallest_landau(enumerate_htype(2, {2.0, 0.5}, 3.0)) == doctest::Approx(2.5));
    CHECK_THROWS_AS(enumerate_htype(2, {1.0, 2.0}, 3.0), ValidationError);
  }

  TEST_CASE("CSV export")
  {
    std::ostringstream os;
    write_spectrum_csv(os, enumerate_h1(3.5), {"test"});
    const std::string text = os.str();
    CHECK(text.rfind("# test\neigenvalue,multiplicity,labels\n", 0) == 0);
    CHECK(text.find("\n1,2,L(0,-1);L(0,1)\n") != std::string::npos);
  }
}
