#include "heisfan/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "heisfan/error.hpp"

namespace heisfan {

GroupElement LatticeElement::embed() const
{
  return {static_cast<double>(a) * kSqrtTwoPi, static_cast<double>(b) * kSqrtTwoPi,
          static_cast<double>(c) * kTwoPi};
}

GroupElement group_mul(const GroupElement& a, const GroupElement& b)
{
  return {a.x + b.x, a.y + b.y, a.z + b.z - a.x * b.y};
}

GroupElement group_inv(const GroupElement& a)
{
  return {-a.x, -a.y, -a.z - a.x * a.y};
}

// The z-component of the product of two lattice elements is
// 2pi c + 2pi c' - 2pi a b', which stays in 2pi Z.
LatticeElement lattice_mul(const LatticeElement& a, const LatticeElement& b)
{
  return {a.a + b.a, a.b + b.b, a.c + b.c - a.a * b.b};
}

LatticeElement lattice_inv(const LatticeElement& a)
{
  return {-a.a, -a.b, -a.c - a.a * a.b};
}

double max_abs_diff(const GroupElement& a, const GroupElement& b)
{
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

namespace {

// Shift count n with value + n * period in [0, period).
std::int64_t period_shift(double value, double period)
{
  return -static_cast<std::int64_t>(std::floor(value / period));
}

}  // namespace

std::pair<GroupElement, LatticeElement> reduce_to_fundamental(const GroupElement& q)
{
  LatticeElement gamma;
  gamma.a = period_shift(q.x, kSqrtTwoPi);
  gamma.b = period_shift(q.y, kSqrtTwoPi);
  GroupElement p = group_mul(gamma.embed(), q);
  // Rounding can leave a coordinate exactly on the open end of its interval.
  for (int guard = 0; guard < 4 && (p.x < 0.0 || p.x >= kSqrtTwoPi); ++guard) {
    gamma.a += p.x < 0.0 ? 1 : -1;
    p = group_mul(gamma.embed(), q);
  }
  for (int guard = 0; guard < 4 && (p.y < 0.0 || p.y >= kSqrtTwoPi); ++guard) {
    gamma.b += p.y < 0.0 ? 1 : -1;
    p = group_mul(gamma.embed(), q);
  }
  gamma.c = period_shift(p.z, kTwoPi);
  p = group_mul(gamma.embed(), q);
  for (int guard = 0; guard < 4 && (p.z < 0.0 || p.z >= kTwoPi); ++guard) {
    gamma.c += p.z < 0.0 ? 1 : -1;
    p = group_mul(gamma.embed(), q);
  }
  return {p, gamma};
}

ProductPoint::ProductPoint(std::vector<GroupElement> c) : copies(std::move(c))
{
  if (copies.empty()) throw ValidationError("ProductPoint needs at least one copy");
}

ProductPoint ProductPoint::origin(int m)
{
  if (m < 1) throw ValidationError("ProductPoint needs m >= 1");
  return ProductPoint(std::vector<GroupElement>(static_cast<std::size_t>(m)));
}

ProductPoint ProductPoint::reduced() const
{
  ProductPoint out = *this;
  for (auto& c : out.copies) c = reduce_to_fundamental(c).first;
  return out;
}

ProductPoint product_mul(const ProductPoint& a, const ProductPoint& b)
{
  if (a.m() != b.m()) throw ValidationError("product_mul: mismatched number of copies");
  ProductPoint out = a;
  for (std::size_t j = 0; j < a.copies.size(); ++j) out.copies[j] = group_mul(a.copies[j], b.copies[j]);
  return out;
}

CopySet CopySet::of(std::span<const int> indices)
{
  CopySet s;
  for (int j : indices) {
    if (j < 0 || j >= 64) throw ValidationError("copy index out of range");
    s.insert(j);
  }
  return s;
}

CopySet CopySet::full(int m)
{
  if (m < 0 || m > 64) throw ValidationError("CopySet::full: m out of range");
  return CopySet(m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1);
}

int CopySet::size() const { return std::popcount(bits_); }

std::vector<int> CopySet::indices() const
{
  std::vector<int> out;
  for (int j = 0; j < 64; ++j)
    if (contains(j)) out.push_back(j);
  return out;
}

std::string CopySet::to_string() const
{
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int j : indices()) {
    if (!first) os << ',';
    os << j + 1;
    first = false;
  }
  os << '}';
  return os.str();
}

SimplexPoint::SimplexPoint(std::vector<int> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights))
{
  if (support_.empty()) throw ValidationError("SimplexPoint: empty support");
  if (support_.size() != weights_.size())
    throw ValidationError("SimplexPoint: support and weights differ in length");
  if (!std::is_sorted(support_.begin(), support_.end()) ||
      std::adjacent_find(support_.begin(), support_.end()) != support_.end())
    throw ValidationError("SimplexPoint: support must be strictly increasing");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ValidationError("SimplexPoint: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("SimplexPoint: weights must sum to 1");
}

SimplexPoint SimplexPoint::from_levels(std::vector<int> support, std::span<const int> levels)
{
  if (support.size() != levels.size()) throw ValidationError("from_levels: size mismatch");
  double total = 0.0;
  for (int n : levels) {
    if (n < 0) throw ValidationError("from_levels: negative level");
    total += 2.0 * n + 1.0;
  }
  std::vector<double> w;
  w.reserve(levels.size());
  for (int n : levels) w.push_back((2.0 * n + 1.0) / total);
  return SimplexPoint(std::move(support), std::move(w));
}

double SimplexPoint::weight_of(int j) const
{
  auto it = std::lower_bound(support_.begin(), support_.end(), j);
  if (it == support_.end() || *it != j) return 0.0;
  return weights_[static_cast<std::size_t>(it - support_.begin())];
}

CopySet SigmaCovector::support() const
{
  CopySet s;
  for (std::size_t j = 0; j < pz.size(); ++j)
    if (pz[j] != 0.0) s.insert(static_cast<int>(j));
  return s;
}

SigmaCovector SigmaCovector::normalized() const
{
  double sup = 0.0;
  for (double v : pz) sup = std::max(sup, std::abs(v));
  if (sup == 0.0) throw ValidationError("SigmaCovector::normalized: zero fibre coordinate");
  SigmaCovector out = *this;
  for (double& v : out.pz) v /= sup;
  return out;
}

std::optional<SigmaCovector> FullCovector::to_sigma(double tol) const
{
  if (gstar_eval(*this) > tol) return std::nullopt;
  return SigmaCovector{base, pz};
}

ProductPoint flow_translate(const ProductPoint& q, const SimplexPoint& s, double t)
{
  ProductPoint out = q;
  for (std::size_t i = 0; i < s.support().size(); ++i) {
    const int j = s.support()[i];
    if (j >= q.m()) throw ValidationError("flow_translate: simplex support exceeds m");
    out.copies[static_cast<std::size_t>(j)].z += t * s.weights()[i];
  }
  return out.reduced();
}

double rho_eval(const SigmaCovector& p, const SimplexPoint& s)
{
  double total = 0.0;
  for (std::size_t i = 0; i < s.support().size(); ++i) {
    const auto j = static_cast<std::size_t>(s.support()[i]);
    if (j >= p.pz.size()) throw ValidationError("rho_eval: simplex support exceeds covector size");
    total += s.weights()[i] * std::abs(p.pz[j]);
  }
  return total;
}

double gstar_eval(const FullCovector& p)
{
  const std::size_t m = p.base.copies.size();
  if (p.px.size() != m || p.py.size() != m || p.pz.size() != m)
    throw ValidationError("gstar_eval: covector size does not match base point");
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double horizontal = p.py[j] - p.base.copies[j].x * p.pz[j];
    total += p.px[j] * p.px[j] + horizontal * horizontal;
  }
  return total;
}

}  // namespace heisfan
