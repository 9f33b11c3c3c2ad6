#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heisfan/geometry.hpp"

namespace heisfan {

/// Exact eigenvalue integer_part + 2pi * two_pi_part.
///
/// Because 2pi is irrational, two keys denote the same eigenvalue iff the
/// pairs agree; all equality tests on eigenvalues go through this type.
struct EigenKey
{
  std::int64_t integer_part = 0;
  std::int64_t two_pi_part = 0;

  double value() const;
  EigenKey operator+(const EigenKey& o) const
  {
    return {integer_part + o.integer_part, two_pi_part + o.two_pi_part};
  }
  friend auto operator<=>(const EigenKey&, const EigenKey&) = default;

  /// "7" / "2pi" / "1+2pi" / "3+4*2pi".
  std::string to_string() const;
  /// Inverse of to_string; also accepts "1+2pi" style spellings.
  static EigenKey parse(const std::string& text);
};

/// Strict ordering by numeric value, ties broken by the pair itself.
bool value_less(const EigenKey& a, const EigenKey& b);

/// Spectral label of one copy: Landau(n, alpha) with alpha != 0 or Fourier(k, l).
class BranchLabel
{
 public:
  enum class Kind : std::uint8_t { landau = 0, fourier = 1 };

  static BranchLabel landau(int n, std::int64_t alpha);
  static BranchLabel fourier(std::int64_t k, std::int64_t l);
  /// The constant function, Fourier(0, 0).
  static BranchLabel constant() { return fourier(0, 0); }

  Kind kind() const { return kind_; }
  bool is_landau() const { return kind_ == Kind::landau; }
  int level() const;                 ///< n (Landau only)
  std::int64_t alpha() const;        ///< z-frequency; 0 on the Fourier branch
  std::int64_t k() const;            ///< Fourier only
  std::int64_t l() const;            ///< Fourier only
  std::int64_t odd() const;          ///< 2n+1 on the Landau branch, 0 otherwise

  /// (2n+1)|alpha| or 2pi(k^2+l^2).
  EigenKey key() const;
  double eigenvalue() const { return key().value(); }
  /// Dimension of the label's eigenspace: |alpha| Zak sectors, or 1.
  std::uint64_t weight() const;

  /// "L(n,alpha)" or "F(k,l)".
  std::string to_string() const;
  static BranchLabel parse(const std::string& text);

  friend auto operator<=>(const BranchLabel&, const BranchLabel&) = default;

 private:
  BranchLabel(Kind kind, std::int64_t a, std::int64_t b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_ = Kind::fourier;
  std::int64_t a_ = 0;
  std::int64_t b_ = 0;
};

/// m-fold spectral label: one branch per copy.
class JointLabel
{
 public:
  explicit JointLabel(std::vector<BranchLabel> branches);

  const std::vector<BranchLabel>& branches() const { return branches_; }
  int m() const { return static_cast<int>(branches_.size()); }
  const EigenKey& key() const { return key_; }
  double eigenvalue() const { return key_.value(); }
  /// Copies carrying a Landau branch.
  CopySet landau_copies() const { return support_; }
  /// Product of branch weights.
  std::uint64_t weight() const;

  /// Branch strings joined by '|'.
  std::string to_string() const;
  static JointLabel parse(const std::string& text);

  friend bool operator==(const JointLabel& a, const JointLabel& b) { return a.branches_ == b.branches_; }
  friend auto operator<=>(const JointLabel& a, const JointLabel& b) { return a.branches_ <=> b.branches_; }

 private:
  std::vector<BranchLabel> branches_;
  EigenKey key_;
  CopySet support_;
};

double eigenvalue_of(const JointLabel& label);

template <typename Label>
struct BasicSpectrumEntry
{
  double eigenvalue = 0.0;
  std::uint64_t multiplicity = 0;
  std::vector<Label> labels;
};

/// Eigenvalues up to a cutoff, strictly increasing, with multiplicities.
template <typename Label>
struct BasicSpectrumTable
{
  double cutoff = 0.0;
  std::vector<BasicSpectrumEntry<Label>> entries;

  std::uint64_t total_multiplicity() const
  {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.multiplicity;
    return t;
  }
  std::size_t label_count() const
  {
    std::size_t t = 0;
    for (const auto& e : entries) t += e.labels.size();
    return t;
  }
};

struct SpectrumEntry
{
  EigenKey key;
  double eigenvalue = 0.0;
  std::uint64_t multiplicity = 0;
  std::vector<JointLabel> labels;
};

struct SpectrumTable
{
  double cutoff = 0.0;
  std::vector<SpectrumEntry> entries;

  std::uint64_t total_multiplicity() const;
  std::size_t label_count() const;
  /// Entry with this exact eigenvalue, if present.
  const SpectrumEntry* find(const EigenKey& key) const;
};

struct EnumerationOptions
{
  /// Refuse enumerations producing more joint labels than this.
  std::uint64_t max_labels = 20'000'000;
};

/// Spectrum of the single-copy sub-Laplacian by direct scan over (n, alpha, k, l).
SpectrumTable enumerate_h1(double cutoff);

/// Same table built from divisor sums and sums of two squares.
///
/// Multiplicities come from sum_{d odd, d | N} 2 N/d and Jacobi's r_2 formula;
/// labels are reconstructed from the divisors and square decompositions.
SpectrumTable enumerate_h1_arithmetic(double cutoff);

/// Joint labels of the m-fold product with eigenvalue <= cutoff, streamed in
/// ascending order through a heap over index tuples of the sorted copy labels.
SpectrumTable enumerate_hm(int m, double cutoff, const EnumerationOptions& options = {});

/// Visits joint labels in ascending eigenvalue order without materializing the table.
class JointLabelStream
{
 public:
  JointLabelStream(int m, double cutoff);
  ~JointLabelStream();
  JointLabelStream(JointLabelStream&&) noexcept;
  JointLabelStream& operator=(JointLabelStream&&) noexcept;

  /// Next label, or nullopt once the cutoff is passed.
  std::optional<JointLabel> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Multiplicity and label count per eigenvalue of the m-fold Minkowski sum of
/// single-copy tables; the second route checked against enumerate_hm.
struct SumsetEntry
{
  EigenKey key;
  std::uint64_t multiplicity = 0;
  std::uint64_t label_count = 0;
};
std::vector<SumsetEntry> sumset_multiplicities(int m, double cutoff);

/// Exact number of joint labels at or below the cutoff.
std::uint64_t count_joint_labels(int m, double cutoff);

/// Fraction (with multiplicity) of eigenvalues <= cutoff all of whose labels
/// have every copy on the Landau branch.
double density_fraction(int m, double cutoff);

struct FanPoint
{
  double eigenvalue = 0.0;
  std::vector<std::int64_t> abs_alpha;  ///< |alpha_j| or 0
  std::vector<std::int64_t> odd;        ///< 2 n_j + 1 or 0
};

FanPoint fan_point(const JointLabel& label);
std::vector<FanPoint> fan_points(int m, double cutoff);

/// Restrictions applied when searching for equal eigenvalues.
struct MatchConstraints
{
  /// Allowed Landau-copy sets; empty allows any.
  std::vector<CopySet> allowed_sets;
  /// Fixed Landau level per copy (ignored for Fourier copies); empty = free.
  std::vector<std::optional<int>> levels;

  bool admits(const JointLabel& label) const;
};

struct LabelGroup
{
  EigenKey key;
  std::vector<JointLabel> labels;
};

/// Groups of at least two admissible labels sharing an exact eigenvalue <= cutoff.
std::vector<LabelGroup> match_equal_eigenvalues(int m, const MatchConstraints& constraints,
                                                double cutoff);

/// All m-fold labels with exactly this eigenvalue that satisfy the constraints.
std::vector<JointLabel> labels_with_key(int m, const EigenKey& key,
                                        const MatchConstraints& constraints = {});

/// Integer alpha (signs following the direction) with sum_j odd_j |alpha_j| equal
/// to the target and alpha closest to the ray through the direction.
std::optional<std::vector<std::int64_t>> nearest_alpha_with_eigenvalue(
    const std::vector<std::int64_t>& odd, const std::vector<double>& direction,
    std::int64_t target, int radius = 3);

/// Label of the sub-Laplacian sum_j beta_j (X_j^2 + Y_j^2) on the (2d+1)-dimensional quotient.
struct HtypeLabel
{
  std::int64_t alpha = 0;            ///< 0 selects the Fourier branch
  std::vector<int> levels;           ///< n_j, Landau branch
  std::vector<std::int64_t> k;       ///< Fourier branch
  std::vector<std::int64_t> l;

  std::string to_string() const;
  friend auto operator<=>(const HtypeLabel&, const HtypeLabel&) = default;
};

using HtypeSpectrumTable = BasicSpectrumTable<HtypeLabel>;

/// Landau eigenvalues |alpha| sum_j beta_j (2 n_j + 1), each of multiplicity
/// |alpha|^d, and Fourier eigenvalues 2pi sum_j beta_j (k_j^2 + l_j^2).
/// Eigenvalues closer than 1e-12 (relative) are merged.
HtypeSpectrumTable enumerate_htype(int d, const std::vector<double>& beta, double cutoff);

}  // namespace heisfan
