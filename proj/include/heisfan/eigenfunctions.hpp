#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "heisfan/geometry.hpp"
#include "heisfan/spectrum.hpp"

namespace heisfan {

using Complex = std::complex<double>;

/// One orthonormal basis function of a single-copy eigenspace.
///
/// Landau branch (n, alpha): the Zak sum
///   N e^{i alpha z} sum_{j = sector mod |alpha|} e^{i sqrt(2pi) j y} h_n(sqrt|alpha| (x - sqrt(2pi) j / alpha))
/// with N = |alpha|^{1/4} (2pi)^{-3/4}. The same formula serves both signs of alpha.
/// Fourier branch (k, l): e^{i sqrt(2pi)(k x + l y)} / (2pi).
struct BasisMode
{
  BranchLabel branch = BranchLabel::constant();
  int sector = 0;      ///< in [0, |alpha|); must be 0 on the Fourier branch
  int half_width = 0;  ///< Zak terms within half_width * sqrt(2pi) of x; 0 picks the default

  BasisMode() = default;
  BasisMode(BranchLabel b, int sector_index = 0, int width = 0);
};

/// Default truncation: Gaussian tail of the dropped terms below e^{-50}.
int default_half_width(int n, std::int64_t alpha);

/// Single Zak mode (Landau branch only).
Complex landau_mode_eval(const BasisMode& mode, const GroupElement& q);

/// Value of any basis mode.
Complex mode_eval(const BasisMode& mode, const GroupElement& q);

/// -(X^2 + Y^2) applied to a basis mode, from closed-form derivatives.
Complex mode_minus_delta(const BasisMode& mode, const GroupElement& q);

/// Element of one branch eigenspace: coefficients over its Zak sectors.
struct CopyMode
{
  BranchLabel branch = BranchLabel::constant();
  std::vector<std::pair<int, Complex>> sectors{{0, Complex(1.0, 0.0)}};
  int half_width = 0;

  static CopyMode basis(const BranchLabel& b, int sector = 0);
  static CopyMode from(const BasisMode& mode);

  Complex value(const GroupElement& q) const;
  Complex minus_delta(const GroupElement& q) const;
  /// Sum of |c|^2 over sectors (the basis is orthonormal).
  double norm2() const;
};

/// Exact inner product of two copy functions: zero across branches, the
/// sector-coefficient dot product within one.
Complex copy_inner(const CopyMode& a, const CopyMode& b);

struct Term
{
  Complex coefficient{1.0, 0.0};
  std::vector<CopyMode> copies;

  JointLabel label() const;
};

/// Finite combination of tensor products of copy eigenfunctions, all at one eigenvalue.
class QuotientEigenfunction
{
 public:
  QuotientEigenfunction() = default;
  /// Throws ValidationError when terms disagree on m or on the exact eigenvalue.
  explicit QuotientEigenfunction(std::vector<Term> terms);

  static QuotientEigenfunction single(const std::vector<BasisMode>& modes);
  static QuotientEigenfunction constant(int m);

  int m() const { return m_; }
  const EigenKey& key() const { return key_; }
  double eigenvalue() const { return key_.value(); }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Complex value(const ProductPoint& q) const;
  /// -Delta at q, summing the per-copy closed forms.
  Complex apply_minus_delta(const ProductPoint& q) const;

  /// Squared L^2 norm from exact orthonormality of the basis.
  double norm2() const;
  QuotientEigenfunction normalized() const;
  QuotientEigenfunction scaled(Complex factor) const;

 private:
  int m_ = 0;
  EigenKey key_;
  std::vector<Term> terms_;
};

Complex inner_product(const QuotientEigenfunction& a, const QuotientEigenfunction& b);

/// Unit-norm copy of phi; throws ValidationError on the zero function.
QuotientEigenfunction normalize(const QuotientEigenfunction& phi);

Complex apply_minus_delta(const QuotientEigenfunction& phi, const ProductPoint& q);

/// Sector coefficients of the coherent state of level n and frequency alpha
/// centred at (x0, y0): Gaussian weights e^{-(sqrt(2pi) j - alpha x0)^2 / (2 |alpha| w^2)}
/// with phases e^{-i sqrt(2pi) j y0}, folded onto the |alpha| sectors and normalized.
/// Its density concentrates on a disc of radius ~ w / sqrt|alpha| around the centre.
std::vector<std::pair<int, Complex>> localized_state(int n, std::int64_t alpha, double x0, double y0,
                                                     double width = 1.0);

/// CopyMode wrapping localized_state.
CopyMode localized_copy(int n, std::int64_t alpha, double x0, double y0, double width = 1.0);

// ------------------------------------------------------------------ grids

enum class Coord { x = 0, y = 1, z = 2 };

/// Coordinate of one copy, e.g. "x1".
struct AxisSelector
{
  int copy = 0;
  Coord coord = Coord::x;

  std::string name() const;
  double period() const;
  static AxisSelector parse(const std::string& text);
};

struct GridAxis
{
  AxisSelector selector;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Periodic trapezoid nodes on [0, period).
GridAxis periodic_axis(const AxisSelector& selector, int points);

/// Values on a tensor grid; the last axis varies fastest.
struct GridField
{
  std::vector<GridAxis> axes;
  std::vector<Complex> values;

  std::size_t size() const { return values.size(); }
  std::vector<std::size_t> shape() const;
  /// Quadrature of the stored values.
  Complex integrate() const;
  /// Quadrature of the constant 1 over the grid.
  double volume() const;
};

/// Samples phi on the selected axes with all other coordinates taken from base.
GridField sample_field(const QuotientEigenfunction& phi, const ProductPoint& base,
                       const std::vector<AxisSelector>& axes, int points_per_axis);

/// CSV `coord_1,...,coord_d,re,im,abs2`, preceded by the given '#' header lines.
void write_grid_csv(std::ostream& os, const GridField& field, const std::vector<std::string>& header = {});

/// JSON manifest: axes, labels, eigenvalue, norm, and the sampled values.
void write_grid_json(std::ostream& os, const GridField& field, const QuotientEigenfunction& phi);

}  // namespace heisfan
