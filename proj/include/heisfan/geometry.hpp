#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace heisfan {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Period of the x and y coordinates on the quotient.
inline constexpr double kSqrtTwoPi = 2.5066282746310002;

/// Point of the Heisenberg group R^3 with (x,y,z)*(x',y',z') = (x+x', y+y', z+z'-x y').
struct GroupElement
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// Element (a sqrt(2pi), b sqrt(2pi), 2pi c) of the cocompact lattice.
struct LatticeElement
{
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;

  GroupElement embed() const;
  friend bool operator==(const LatticeElement&, const LatticeElement&) = default;
};

GroupElement group_mul(const GroupElement& a, const GroupElement& b);
GroupElement group_inv(const GroupElement& a);
LatticeElement lattice_mul(const LatticeElement& a, const LatticeElement& b);
LatticeElement lattice_inv(const LatticeElement& a);

/// Sup-norm distance between coordinate triples.
double max_abs_diff(const GroupElement& a, const GroupElement& b);

/// Reduces q to the fundamental domain [0,sqrt(2pi))^2 x [0,2pi).
///
/// Returns (gamma * q, gamma). The x coordinate is reduced first (its twist
/// enters z), then y, then z, which makes the reduction idempotent.
std::pair<GroupElement, LatticeElement> reduce_to_fundamental(const GroupElement& q);

/// Point of the m-fold product; copies are indexed from 0.
struct ProductPoint
{
  std::vector<GroupElement> copies;

  ProductPoint() = default;
  explicit ProductPoint(std::vector<GroupElement> c);
  static ProductPoint origin(int m);

  int m() const { return static_cast<int>(copies.size()); }
  ProductPoint reduced() const;
  friend bool operator==(const ProductPoint&, const ProductPoint&) = default;
};

ProductPoint product_mul(const ProductPoint& a, const ProductPoint& b);

/// Set of copy indices (0-based) stored as a bitmask; m <= 64.
class CopySet
{
 public:
  constexpr CopySet() = default;
  constexpr explicit CopySet(std::uint64_t bits) : bits_(bits) {}
  static CopySet of(std::span<const int> indices);
  static CopySet full(int m);

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int j) const { return (bits_ >> j) & 1u; }
  int size() const;
  std::vector<int> indices() const;
  void insert(int j) { bits_ |= (std::uint64_t{1} << j); }

  /// "{1,3}" with 1-based copy numbers, "{}" for the empty set.
  std::string to_string() const;

  friend constexpr auto operator<=>(const CopySet&, const CopySet&) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Point s of the simplex S_J: nonnegative weights indexed by J summing to 1.
class SimplexPoint
{
 public:
  SimplexPoint(std::vector<int> support, std::vector<double> weights);

  /// s_j = (2 n_j + 1) / sum_i (2 n_i + 1).
  static SimplexPoint from_levels(std::vector<int> support, std::span<const int> levels);

  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  int size() const { return static_cast<int>(support_.size()); }
  CopySet copy_set() const { return CopySet::of(support_); }

  /// Weight attached to copy j, zero when j is outside the support.
  double weight_of(int j) const;

 private:
  std::vector<int> support_;
  std::vector<double> weights_;
};

/// Point of the characteristic cone: base point plus the p_z fibre coordinates.
struct SigmaCovector
{
  ProductPoint base;
  std::vector<double> pz;

  /// Copies with nonzero p_z.
  CopySet support() const;
  /// Representative with max_j |p_z_j| = 1 (positive rescaling only).
  SigmaCovector normalized() const;
};

/// General covector over a product point.
struct FullCovector
{
  ProductPoint base;
  std::vector<double> px;
  std::vector<double> py;
  std::vector<double> pz;

  /// Restriction to the characteristic cone when g* vanishes within tol.
  std::optional<SigmaCovector> to_sigma(double tol = 0.0) const;
};

/// Advances z_j by t s_j for j in the support of s, then reduces.
ProductPoint flow_translate(const ProductPoint& q, const SimplexPoint& s, double t);

/// rho_s(p) = sum_j s_j |p_z_j|.
double rho_eval(const SigmaCovector& p, const SimplexPoint& s);

/// Principal symbol of the sub-Laplacian: sum_j p_x_j^2 + (p_y_j - x_j p_z_j)^2.
double gstar_eval(const FullCovector& p);

}  // namespace heisfan
