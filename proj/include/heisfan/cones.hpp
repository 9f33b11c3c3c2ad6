#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heisfan/eigenfunctions.hpp"
#include "heisfan/quadrature.hpp"

namespace heisfan {

/// Nested partition of the quadrant V + R_+^J, V = (-1/2, ..., -1/2), into 2^N
/// positive cones with vertex V.
///
/// A point n of the quadrant is sent to the simplex point s_j = (2 n_j + 1) / sum_i (2 n_i + 1);
/// cones are the preimages of the cells of a recursive bisection of the standard
/// simplex. Each step splits the edge x_0 x_k of the current cell at its midpoint
/// (k is the cell's tag, cycling d, d-1, ..., 1, d, ...), so the diameter halves
/// every d = |J| - 1 levels or so. Points on a splitting face go to the lower child.
/// Leaf indices spell the path MSB first: the parent of leaf l at depth N is l >> 1.
class ConePartition
{
 public:
  ConePartition(int j_size, int depth);

  int j_size() const { return j_size_; }
  int depth() const { return depth_; }
  /// 2^N, or 1 when |J| = 1 (the simplex is a point).
  std::uint64_t leaf_count() const;

  /// Leaf containing the simplex point with these barycentric weights.
  std::uint64_t locate(std::span<const double> weights) const;
  std::uint64_t locate(const SimplexPoint& s) const;
  /// Leaf of the lattice point (n_j), computed in exact integer arithmetic.
  std::uint64_t locate_levels(std::span<const int> levels) const;
  /// Leaf of a quadrant point p (p_j > -1/2), via s = (p - V) / sum (p - V).
  std::uint64_t locate_quadrant(std::span<const double> point) const;

  /// Vertices of the simplex cell of a leaf, in barycentric coordinates.
  std::vector<std::vector<double>> cell(std::uint64_t leaf) const;
  /// Largest Euclidean edge of the cell.
  double cell_diameter(std::uint64_t leaf) const;
  /// d(N): maximum cell diameter over all leaves (exhaustive for N <= 20,
  /// otherwise the bound below).
  double max_diameter() const;
  /// sqrt(2) * 2^{-floor(N / (|J| - 1))} scaled by the worst ratio observed in
  /// one full cycle of bisections; zero when |J| = 1.
  static double diameter_bound(int j_size, int depth);

 private:
  int j_size_;
  int depth_;
};

/// Convenience wrapper matching the construction step.
ConePartition build_partition(int j_size, int depth);

struct ConeCell
{
  std::uint64_t index = 0;
  std::vector<std::vector<double>> vertices;  ///< simplex bounds
  double mass = 0.0;
  std::optional<double> defect;               ///< flow defect of the cell's piece along its barycentre
  std::vector<std::string> labels;            ///< labels landing in the cell
};

/// Per-cone masses of the J-component of one eigenfunction.
struct DisintegrationReport
{
  CopySet support;
  int depth = 0;
  double total_mass = 0.0;       ///< squared norm of the J-component
  double function_mass = 0.0;    ///< squared norm of the whole function
  std::vector<ConeCell> cells;   ///< occupied cells, by index
};

struct DisintegrationOptions
{
  /// When nonempty, each cell's piece gets an invariance defect over these
  /// test functions along the flow of the cell barycentre at the listed times.
  std::vector<TestFunction> dictionary;
  std::vector<double> times;
  QuadratureOptions quadrature;
};

/// Groups phi's terms with Landau set J by the cone of their levels (n_j)_{j in J};
/// masses are exact squared norms of the grouped pieces.
DisintegrationReport cone_masses(const QuotientEigenfunction& phi, CopySet support, int depth,
                                 const DisintegrationOptions& opt = {});

/// Masses of each member of a sequence plus the change between consecutive members.
struct QHistogram
{
  CopySet support;
  int depth = 0;
  std::vector<int> k;
  std::vector<DisintegrationReport> reports;
  std::map<std::uint64_t, double> final_masses;
  /// Sum over cells of |mass_k - mass_{k-1}| between consecutive members.
  std::vector<double> variation;
};

QHistogram q_histogram(const std::vector<QuotientEigenfunction>& sequence, const std::vector<int>& ks,
                       CopySet support, int depth);

void write_disintegration_json(std::ostream& os, const DisintegrationReport& report);
void write_disintegration_csv(std::ostream& os, const DisintegrationReport& report,
                              const std::vector<std::string>& header = {});

// -------------------------------------------------------------- splitting

enum class SplitRule {
  /// Copy set J(tau) = { j : alpha_j^2 / E >= tau }; empty sets go to the elliptic piece.
  ratio,
  /// As above, but any term with lambda / E >= tau goes to the elliptic piece first.
  elliptic_gate,
};

struct SplitResult
{
  double tau = 0.0;
  std::optional<QuotientEigenfunction> elliptic;
  std::map<CopySet, QuotientEigenfunction> pieces;
  double elliptic_mass = 0.0;
  std::map<CopySet, double> masses;
};

/// Partitions phi's terms by the ratio tests against E = lambda + sum_j alpha_j^2.
/// Pieces share phi's eigenvalue, are mutually orthogonal and sum to phi.
SplitResult split_copy_sets(const QuotientEigenfunction& phi, double tau, SplitRule rule = SplitRule::ratio);

/// Threshold schedule tau(k) = k^{-exponent}.
double default_tau(int k, double exponent = 0.25);

}  // namespace heisfan
