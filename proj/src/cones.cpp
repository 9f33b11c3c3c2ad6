#include "heisfan/cones.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "heisfan/error.hpp"
#include "heisfan/json_writer.hpp"
#include "heisfan/quantum_limits.hpp"

namespace heisfan {

namespace {

// One bisection step on barycentric coordinates: returns true for the upper child.
template <typename T>
bool bisect_coordinates(std::vector<T>& lam, int& tag, int d)
{
  const auto k = static_cast<std::size_t>(tag);
  bool upper = false;
  if (lam[0] >= lam[k]) {
    lam[0] -= lam[k];
    lam[k] *= 2;
  } else {
    const T l0 = lam[0];
    const T lk = lam[k];
    for (std::size_t i = 0; i + 1 < k; ++i) lam[i] = lam[i + 1];
    lam[k - 1] = lk - l0;
    lam[k] = 2 * l0;
    upper = true;
  }
  tag = tag == 1 ? d : tag - 1;
  return upper;
}

void bisect_vertices(std::vector<std::vector<double>>& v, int& tag, int d, bool upper)
{
  const auto k = static_cast<std::size_t>(tag);
  std::vector<double> mid(v[0].size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (v[0][i] + v[k][i]);
  if (!upper) {
    v[k] = mid;
  } else {
    for (std::size_t i = 0; i + 1 <= k; ++i) v[i] = v[i + 1];
    v[k] = mid;
  }
  tag = tag == 1 ? d : tag - 1;
}

double simplex_diameter(const std::vector<std::vector<double>>& v)
{
  double best = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < v[a].size(); ++i) s += (v[a][i] - v[b][i]) * (v[a][i] - v[b][i]);
      best = std::max(best, std::sqrt(s));
    }
  return best;
}

std::vector<std::vector<double>> standard_simplex(int j)
{
  std::vector<std::vector<double>> v(static_cast<std::size_t>(j), std::vector<double>(static_cast<std::size_t>(j), 0.0));
  for (int i = 0; i < j; ++i) v[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return v;
}

void max_diameter_walk(std::vector<std::vector<double>> v, int tag, int d, int remaining, double& best)
{
  if (remaining == 0) {
    best = std::max(best, simplex_diameter(v));
    return;
  }
  for (bool upper : {false, true}) {
    auto child = v;
    int t = tag;
    bisect_vertices(child, t, d, upper);
    max_diameter_walk(std::move(child), t, d, remaining - 1, best);
  }
}

}  // namespace

ConePartition::ConePartition(int j_size, int depth) : j_size_(j_size), depth_(depth)
{
  if (j_size < 1 || j_size > 64) throw ValidationError("ConePartition: |J| must be in [1, 64]");
  if (depth < 0 || depth > 32) throw ValidationError("ConePartition: depth must be in [0, 32]");
}

ConePartition build_partition(int j_size, int depth) { return ConePartition(j_size, depth); }

std::uint64_t ConePartition::leaf_count() const
{
  return j_size_ == 1 ? 1 : (std::uint64_t{1} << depth_);
}

std::uint64_t ConePartition::locate(std::span<const double> weights) const
{
  if (static_cast<int>(weights.size()) != j_size_) throw ValidationError("locate: weight count differs from |J|");
  if (j_size_ == 1) return 0;
  std::vector<double> lam(weights.begin(), weights.end());
  for (double v : lam)
    if (!(v >= 0.0)) throw ValidationError("locate: weights must be nonnegative");
  int tag = j_size_ - 1;
  std::uint64_t leaf = 0;
  for (int level = 0; level < depth_; ++level) leaf = (leaf << 1) | (bisect_coordinates(lam, tag, j_size_ - 1) ? 1u : 0u);
  return leaf;
}

std::uint64_t ConePartition::locate(const SimplexPoint& s) const { return locate(std::span<const double>(s.weights())); }

std::uint64_t ConePartition::locate_levels(std::span<const int> levels) const
{
  if (static_cast<int>(levels.size()) != j_size_) throw ValidationError("locate_levels: level count differs from |J|");
  if (j_size_ == 1) return 0;
  // Barycentric coordinates scaled by sum_i (2 n_i + 1); the steps keep their sum.
  std::vector<std::int64_t> lam;
  for (int n : levels) {
    if (n < 0) throw ValidationError("locate_levels: negative level");
    lam.push_back(2 * static_cast<std::int64_t>(n) + 1);
  }
  int tag = j_size_ - 1;
  std::uint64_t leaf = 0;
  for (int level = 0; level < depth_; ++level) leaf = (leaf << 1) | (bisect_coordinates(lam, tag, j_size_ - 1) ? 1u : 0u);
  return leaf;
}

std::uint64_t ConePartition::locate_quadrant(std::span<const double> point) const
{
  if (static_cast<int>(point.size()) != j_size_) throw ValidationError("locate_quadrant: size differs from |J|");
  std::vector<double> w;
  double total = 0.0;
  for (double p : point) {
    if (!(p > -0.5)) throw ValidationError("locate_quadrant: point outside V + R_+^J");
    w.push_back(p + 0.5);
    total += p + 0.5;
  }
  for (double& v : w) v /= total;
  return locate(w);
}

std::vector<std::vector<double>> ConePartition::cell(std::uint64_t leaf) const
{
  if (leaf >= leaf_count()) throw ValidationError("cell: leaf index out of range");
  auto v = standard_simplex(j_size_);
  if (j_size_ == 1) return v;
  int tag = j_size_ - 1;
  for (int level = depth_ - 1; level >= 0; --level) bisect_vertices(v, tag, j_size_ - 1, (leaf >> level) & 1u);
  return v;
}

double ConePartition::cell_diameter(std::uint64_t leaf) const { return simplex_diameter(cell(leaf)); }

double ConePartition::max_diameter() const
{
  if (j_size_ == 1) return 0.0;
  if (depth_ > 20) return diameter_bound(j_size_, depth_);
  double best = 0.0;
  max_diameter_walk(standard_simplex(j_size_), j_size_ - 1, j_size_ - 1, depth_, best);
  return best;
}

double ConePartition::diameter_bound(int j_size, int depth)
{
  if (j_size < 1 || depth < 0) throw ValidationError("diameter_bound: bad arguments");
  if (j_size == 1) return 0.0;
  const int d = j_size - 1;
  // Worst diameter ratio across one cycle of d bisections, measured on the standard simplex.
  static thread_local std::vector<double> worst(65, 0.0);
  double& c = worst[static_cast<std::size_t>(j_size)];
  if (c == 0.0) {
    double best = 0.0;
    for (int level = 0; level <= std::min(2 * d, 20); ++level) {
      double dn = 0.0;
      max_diameter_walk(standard_simplex(j_size), d, d, level, dn);
      best = std::max(best, dn * std::ldexp(1.0, level / d));
    }
    c = best;
  }
  return c * std::ldexp(1.0, -(depth / d));
}

// -------------------------------------------------------- cone masses

namespace {

bool same_support(const Term& t, CopySet support)
{
  CopySet s;
  for (std::size_t j = 0; j < t.copies.size(); ++j)
    if (t.copies[j].branch.is_landau()) s.insert(static_cast<int>(j));
  return s == support;
}

std::vector<int> levels_on(const Term& t, CopySet support)
{
  std::vector<int> levels;
  for (int j : support.indices()) levels.push_back(t.copies[static_cast<std::size_t>(j)].branch.level());
  return levels;
}

}  // namespace

DisintegrationReport cone_masses(const QuotientEigenfunction& phi, CopySet support, int depth,
                                 const DisintegrationOptions& opt)
{
  if (support.empty()) throw ValidationError("cone_masses: J must be nonempty");
  for (int j : support.indices())
    if (j >= phi.m()) throw ValidationError("cone_masses: J exceeds m");
  const ConePartition partition(support.size(), depth);
  DisintegrationReport report;
  report.support = support;
  report.depth = depth;
  report.function_mass = phi.norm2();
  std::map<std::uint64_t, std::vector<Term>> groups;
  std::map<std::uint64_t, std::set<std::string>> labels;
  for (const auto& t : phi.terms()) {
    if (!same_support(t, support)) continue;
    const auto levels = levels_on(t, support);
    const auto leaf = partition.locate_levels(levels);
    groups[leaf].push_back(t);
    labels[leaf].insert(t.label().to_string());
  }
  for (auto& [leaf, terms] : groups) {
    const QuotientEigenfunction piece(terms);
    ConeCell cell;
    cell.index = leaf;
    cell.vertices = partition.cell(leaf);
    cell.mass = piece.norm2();
    cell.labels.assign(labels[leaf].begin(), labels[leaf].end());
    if (!opt.dictionary.empty() && cell.mass > 0.0) {
      std::vector<double> bary(static_cast<std::size_t>(support.size()), 0.0);
      for (const auto& v : cell.vertices)
        for (std::size_t i = 0; i < bary.size(); ++i) bary[i] += v[i] / static_cast<double>(cell.vertices.size());
      double sum = 0.0;
      for (double b : bary) sum += b;
      for (double& b : bary) b /= sum;
      const SimplexPoint s(support.indices(), bary);
      const auto unit = piece.normalized();
      double worst = 0.0;
      for (double t : opt.times)
        worst = std::max(worst, invariance_defect(unit, s, t, opt.dictionary, opt.quadrature));
      cell.defect = worst;
    }
    report.total_mass += cell.mass;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

QHistogram q_histogram(const std::vector<QuotientEigenfunction>& sequence, const std::vector<int>& ks,
                       CopySet support, int depth)
{
  if (sequence.empty() || sequence.size() != ks.size())
    throw ValidationError("q_histogram: need one k per sequence member");
  QHistogram h;
  h.support = support;
  h.depth = depth;
  h.k = ks;
  for (const auto& phi : sequence) h.reports.push_back(cone_masses(phi, support, depth));
  auto masses = [](const DisintegrationReport& r) {
    std::map<std::uint64_t, double> out;
    for (const auto& c : r.cells) out[c.index] = c.mass;
    return out;
  };
  for (std::size_t i = 1; i < h.reports.size(); ++i) {
    auto a = masses(h.reports[i - 1]);
    auto b = masses(h.reports[i]);
    std::set<std::uint64_t> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    double var = 0.0;
    for (auto k : keys) var += std::abs(b[k] - a[k]);
    h.variation.push_back(var);
  }
  h.final_masses = masses(h.reports.back());
  return h;
}

void write_disintegration_json(std::ostream& os, const DisintegrationReport& report)
{
  JsonWriter w(os);
  w.begin_object();
  w.field("support", report.support.to_string());
  w.field("depth", report.depth);
  w.field("total_mass", report.total_mass);
  w.field("function_mass", report.function_mass);
  w.key("cells").begin_array();
  for (const auto& c : report.cells) {
    w.begin_object();
    w.field("index", static_cast<std::uint64_t>(c.index));
    w.key("simplex_bounds").begin_array();
    for (const auto& v : c.vertices) {
      w.begin_array();
      for (double x : v) w.value(x);
      w.end_array();
    }
    w.end_array();
    w.field("mass", c.mass);
    w.key("defect");
    if (c.defect)
      w.value(*c.defect);
    else
      w.null();
    w.key("labels").begin_array();
    for (const auto& l : c.labels) w.value(l);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

void write_disintegration_csv(std::ostream& os, const DisintegrationReport& report,
                              const std::vector<std::string>& header)
{
  for (const auto& line : header) os << "# " << line << '\n';
  os << "index,mass,defect,simplex_bounds\n";
  for (const auto& c : report.cells) {
    os << c.index << ',' << format_double(c.mass) << ',' << (c.defect ? format_double(*c.defect) : std::string()) << ",\"";
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
      if (i) os << ';';
      for (std::size_t j = 0; j < c.vertices[i].size(); ++j) os << (j ? ":" : "") << format_double(c.vertices[i][j]);
    }
    os << "\"\n";
  }
}

// -------------------------------------------------------------- splitting

SplitResult split_copy_sets(const QuotientEigenfunction& phi, double tau, SplitRule rule)
{
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("split_copy_sets: tau must be in (0, 1)");
  SplitResult out;
  out.tau = tau;
  const double lambda = phi.eigenvalue();
  std::vector<Term> elliptic;
  std::map<CopySet, std::vector<Term>> groups;
  for (const auto& t : phi.terms()) {
    double e = lambda;
    for (const auto& c : t.copies) {
      const auto a = static_cast<double>(c.branch.alpha());
      e += a * a;
    }
    CopySet selected;
    if (e > 0.0) {
      for (std::size_t j = 0; j < t.copies.size(); ++j) {
        const auto a = static_cast<double>(t.copies[j].branch.alpha());
        if (a * a / e >= tau) selected.insert(static_cast<int>(j));
      }
    }
    const bool gated = rule == SplitRule::elliptic_gate && (e == 0.0 || lambda / e >= tau);
    if (gated || selected.empty())
      elliptic.push_back(t);
    else
      groups[selected].push_back(t);
  }
  if (!elliptic.empty()) {
    out.elliptic = QuotientEigenfunction(std::move(elliptic));
    out.elliptic_mass = out.elliptic->norm2();
  }
  for (auto& [set, terms] : groups) {
    QuotientEigenfunction piece(std::move(terms));
    out.masses[set] = piece.norm2();
    out.pieces.emplace(set, std::move(piece));
  }
  return out;
}

double default_tau(int k, double exponent)
{
  if (k < 1) throw ValidationError("default_tau: k must be >= 1");
  return std::pow(static_cast<double>(k), -exponent);
}

}  // namespace heisfan
