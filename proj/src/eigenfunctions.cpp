#include "heisfan/eigenfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "heisfan/error.hpp"
#include "heisfan/hermite.hpp"
#include "heisfan/json_writer.hpp"
#include "heisfan/parallel.hpp"

namespace heisfan {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t b)
{
  const std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

double landau_normalizer(std::int64_t alpha)
{
  return std::pow(static_cast<double>(std::abs(alpha)), 0.25) * std::pow(kTwoPi, -0.75);
}

void check_sector(const BranchLabel& b, int sector)
{
  if (b.is_landau()) {
    if (sector < 0 || sector >= std::abs(b.alpha()))
      throw ValidationError("Zak sector " + std::to_string(sector) + " outside [0, |alpha|) for " + b.to_string());
  } else if (sector != 0) {
    throw ValidationError("Fourier modes have a single sector");
  }
}

struct ModeValue
{
  Complex value;
  Complex minus_delta;
};

// Zak sum with sector coefficients coef[j mod |alpha|]. When only one sector is
// populated the loop strides over that residue class alone.
ModeValue zak_sum(int n, std::int64_t alpha, int half_width, const std::vector<Complex>& coef, int only_sector,
                  const GroupElement& q, bool want_delta)
{
  const std::int64_t a = std::abs(alpha);
  const double da = static_cast<double>(a);
  const double sa = std::sqrt(da);
  const int width = half_width > 0 ? half_width : default_half_width(n, alpha);
  const double t = static_cast<double>(alpha) * q.x / kSqrtTwoPi;
  const double span = static_cast<double>(width) * da;
  const auto j_lo = static_cast<std::int64_t>(std::ceil(t - span));
  const auto j_hi = static_cast<std::int64_t>(std::floor(t + span));
  std::int64_t j_start = j_lo;
  std::int64_t stride = 1;
  if (only_sector >= 0) {
    j_start = j_lo + floor_mod(only_sector - j_lo, a);
    stride = a;
  }
  const HermiteEvaluator& h = default_hermite();
  Complex value{0.0, 0.0};
  Complex delta{0.0, 0.0};
  for (std::int64_t j = j_start; j <= j_hi; j += stride) {
    const Complex c = coef[static_cast<std::size_t>(floor_mod(j, a))];
    if (c == Complex(0.0, 0.0)) continue;
    const double dj = static_cast<double>(j);
    const double centre = kSqrtTwoPi * dj / static_cast<double>(alpha);
    const double u = sa * (q.x - centre);
    const Complex phase = c * std::polar(1.0, kSqrtTwoPi * dj * q.y);
    if (want_delta) {
      const auto jet = h.jet(n, u);
      // X^2 -> |alpha| h''(u); Y^2 -> -(sqrt(2pi) j - alpha x)^2 h(u).
      const double shear = kSqrtTwoPi * dj - static_cast<double>(alpha) * q.x;
      value += phase * jet.value;
      delta += phase * (-da * jet.d2 + shear * shear * jet.value);
    } else {
      value += phase * h.value(n, u);
    }
  }
  const Complex front = landau_normalizer(alpha) * std::polar(1.0, static_cast<double>(alpha) * q.z);
  return {front * value, front * delta};
}

ModeValue fourier_value(const BranchLabel& b, const GroupElement& q)
{
  const double kd = static_cast<double>(b.k());
  const double ld = static_cast<double>(b.l());
  const Complex v = std::polar(1.0 / kTwoPi, kSqrtTwoPi * (kd * q.x + ld * q.y));
  return {v, kTwoPi * (kd * kd + ld * ld) * v};
}

ModeValue copy_eval(const CopyMode& mode, const GroupElement& q, bool want_delta)
{
  const auto& b = mode.branch;
  if (!b.is_landau()) {
    Complex c{0.0, 0.0};
    for (const auto& [sector, coef] : mode.sectors) c += coef;
    const auto v = fourier_value(b, q);
    return {c * v.value, c * v.minus_delta};
  }
  const auto a = static_cast<std::size_t>(std::abs(b.alpha()));
  std::vector<Complex> coef(a, Complex(0.0, 0.0));
  for (const auto& [sector, c] : mode.sectors) coef[static_cast<std::size_t>(sector)] += c;
  const int only = mode.sectors.size() == 1 ? mode.sectors.front().first : -1;
  return zak_sum(b.level(), b.alpha(), mode.half_width, coef, only, q, want_delta);
}

void canonicalize(CopyMode& mode)
{
  for (const auto& [sector, c] : mode.sectors) check_sector(mode.branch, sector);
  std::sort(mode.sectors.begin(), mode.sectors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, Complex>> merged;
  for (const auto& s : mode.sectors) {
    if (!merged.empty() && merged.back().first == s.first)
      merged.back().second += s.second;
    else
      merged.push_back(s);
  }
  mode.sectors = std::move(merged);
}

}  // namespace

// ------------------------------------------------------------- BasisMode

BasisMode::BasisMode(BranchLabel b, int sector_index, int width) : branch(b), sector(sector_index), half_width(width)
{
  check_sector(branch, sector);
  if (width < 0) throw ValidationError("half_width must be nonnegative");
}

int default_half_width(int n, std::int64_t alpha)
{
  const double reach = std::sqrt(2.0 * n + 1.0) + 10.0;
  const double w = std::ceil(reach / std::sqrt(kTwoPi * static_cast<double>(std::abs(alpha))));
  return std::max(1, static_cast<int>(w));
}

Complex landau_mode_eval(const BasisMode& mode, const GroupElement& q)
{
  if (!mode.branch.is_landau()) throw ValidationError("landau_mode_eval: Fourier mode");
  return copy_eval(CopyMode::from(mode), q, false).value;
}

Complex mode_eval(const BasisMode& mode, const GroupElement& q) { return copy_eval(CopyMode::from(mode), q, false).value; }

Complex mode_minus_delta(const BasisMode& mode, const GroupElement& q)
{
  return copy_eval(CopyMode::from(mode), q, true).minus_delta;
}

// -------------------------------------------------------------- CopyMode

CopyMode CopyMode::basis(const BranchLabel& b, int sector)
{
  check_sector(b, sector);
  CopyMode m;
  m.branch = b;
  m.sectors = {{sector, Complex(1.0, 0.0)}};
  return m;
}

CopyMode CopyMode::from(const BasisMode& mode)
{
  CopyMode m = basis(mode.branch, mode.sector);
  m.half_width = mode.half_width;
  return m;
}

Complex CopyMode::value(const GroupElement& q) const { return copy_eval(*this, q, false).value; }

Complex CopyMode::minus_delta(const GroupElement& q) const { return copy_eval(*this, q, true).minus_delta; }

double CopyMode::norm2() const
{
  return std::real(copy_inner(*this, *this));
}

Complex copy_inner(const CopyMode& a, const CopyMode& b)
{
  if (a.branch != b.branch) return {0.0, 0.0};
  auto sorted = [](const CopyMode& m) {
    return std::adjacent_find(m.sectors.begin(), m.sectors.end(),
                              [](const auto& x, const auto& y) { return x.first >= y.first; }) == m.sectors.end();
  };
  if (!sorted(a) || !sorted(b)) {
    CopyMode ca = a;
    CopyMode cb = b;
    canonicalize(ca);
    canonicalize(cb);
    return copy_inner(ca, cb);
  }
  Complex total{0.0, 0.0};
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.sectors.size() && j < b.sectors.size()) {
    if (a.sectors[i].first < b.sectors[j].first) {
      ++i;
    } else if (b.sectors[j].first < a.sectors[i].first) {
      ++j;
    } else {
      total += a.sectors[i].second * std::conj(b.sectors[j].second);
      ++i;
      ++j;
    }
  }
  return total;
}

JointLabel Term::label() const
{
  std::vector<BranchLabel> branches;
  branches.reserve(copies.size());
  for (const auto& c : copies) branches.push_back(c.branch);
  return JointLabel(std::move(branches));
}

// ------------------------------------------------- QuotientEigenfunction

QuotientEigenfunction::QuotientEigenfunction(std::vector<Term> terms) : terms_(std::move(terms))
{
  if (terms_.empty()) throw ValidationError("QuotientEigenfunction needs at least one term");
  m_ = static_cast<int>(terms_.front().copies.size());
  if (m_ < 1) throw ValidationError("QuotientEigenfunction: term without copies");
  key_ = terms_.front().label().key();
  for (auto& t : terms_) {
    if (static_cast<int>(t.copies.size()) != m_) throw ValidationError("QuotientEigenfunction: terms differ in m");
    for (auto& c : t.copies) canonicalize(c);
    const EigenKey k = t.label().key();
    if (k != key_)
      throw ValidationError("QuotientEigenfunction: eigenvalues differ (" + key_.to_string() + " vs " +
                            k.to_string() + ")");
  }
}

QuotientEigenfunction QuotientEigenfunction::single(const std::vector<BasisMode>& modes)
{
  Term t;
  for (const auto& mode : modes) t.copies.push_back(CopyMode::from(mode));
  return QuotientEigenfunction({t});
}

QuotientEigenfunction QuotientEigenfunction::constant(int m)
{
  if (m < 1) throw ValidationError("constant: m must be >= 1");
  Term t;
  t.copies.assign(static_cast<std::size_t>(m), CopyMode::basis(BranchLabel::constant()));
  // The normalized constant on one copy is 1/(2pi); the product of m of them has unit norm.
  return QuotientEigenfunction({t});
}

Complex QuotientEigenfunction::value(const ProductPoint& q) const
{
  if (q.m() != m_) throw ValidationError("value: point has the wrong number of copies");
  Complex total{0.0, 0.0};
  for (const auto& t : terms_) {
    Complex prod = t.coefficient;
    for (int j = 0; j < m_ && prod != Complex(0.0, 0.0); ++j)
      prod *= t.copies[static_cast<std::size_t>(j)].value(q.copies[static_cast<std::size_t>(j)]);
    total += prod;
  }
  return total;
}

Complex QuotientEigenfunction::apply_minus_delta(const ProductPoint& q) const
{
  if (q.m() != m_) throw ValidationError("apply_minus_delta: point has the wrong number of copies");
  Complex total{0.0, 0.0};
  std::vector<ModeValue> parts(static_cast<std::size_t>(m_));
  for (const auto& t : terms_) {
    for (int j = 0; j < m_; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      parts[uj] = copy_eval(t.copies[uj], q.copies[uj], true);
    }
    // Leibniz over copies: -Delta(prod f_j) = sum_j (-Delta_j f_j) prod_{i != j} f_i.
    Complex sum{0.0, 0.0};
    for (int j = 0; j < m_; ++j) {
      Complex prod = parts[static_cast<std::size_t>(j)].minus_delta;
      for (int i = 0; i < m_; ++i)
        if (i != j) prod *= parts[static_cast<std::size_t>(i)].value;
      sum += prod;
    }
    total += t.coefficient * sum;
  }
  return total;
}

Complex inner_product(const QuotientEigenfunction& a, const QuotientEigenfunction& b)
{
  if (a.m() != b.m()) throw ValidationError("inner_product: different m");
  Complex total{0.0, 0.0};
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      Complex prod = s.coefficient * std::conj(t.coefficient);
      for (std::size_t j = 0; j < s.copies.size() && prod != Complex(0.0, 0.0); ++j)
        prod *= copy_inner(s.copies[j], t.copies[j]);
      total += prod;
    }
  return total;
}

double QuotientEigenfunction::norm2() const { return std::real(inner_product(*this, *this)); }

QuotientEigenfunction QuotientEigenfunction::scaled(Complex factor) const
{
  QuotientEigenfunction out = *this;
  for (auto& t : out.terms_) t.coefficient *= factor;
  return out;
}

QuotientEigenfunction QuotientEigenfunction::normalized() const
{
  const double n2 = norm2();
  if (!(n2 > 0.0)) throw ValidationError("normalize: zero function");
  return scaled(1.0 / std::sqrt(n2));
}

QuotientEigenfunction normalize(const QuotientEigenfunction& phi) { return phi.normalized(); }

Complex apply_minus_delta(const QuotientEigenfunction& phi, const ProductPoint& q)
{
  return phi.apply_minus_delta(q);
}

// ------------------------------------------------------ localized states

std::vector<std::pair<int, Complex>> localized_state(int n, std::int64_t alpha, double x0, double y0, double width)
{
  if (alpha == 0) throw ValidationError("localized_state: alpha must be nonzero");
  if (n < 0) throw ValidationError("localized_state: negative level");
  if (!(width > 0.0)) throw ValidationError("localized_state: width must be positive");
  const std::int64_t a = std::abs(alpha);
  const double da = static_cast<double>(a);
  // Weights below e^{-60} are dropped.
  const double reach = width * std::sqrt(120.0 / da) + kSqrtTwoPi;
  const double t = static_cast<double>(alpha) * x0 / kSqrtTwoPi;
  const double span = reach * da / kSqrtTwoPi;
  const auto j_lo = static_cast<std::int64_t>(std::floor(t - span));
  const auto j_hi = static_cast<std::int64_t>(std::ceil(t + span));
  std::vector<Complex> folded(static_cast<std::size_t>(a), Complex(0.0, 0.0));
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    const double dj = static_cast<double>(j);
    const double offset = kSqrtTwoPi * dj - static_cast<double>(alpha) * x0;
    const double w = std::exp(-offset * offset / (2.0 * da * width * width));
    folded[static_cast<std::size_t>(floor_mod(j, a))] += std::polar(w, -kSqrtTwoPi * dj * y0);
  }
  double total = 0.0;
  std::size_t peak = 0;
  for (std::size_t k = 0; k < folded.size(); ++k) {
    total += std::norm(folded[k]);
    if (std::abs(folded[k]) > std::abs(folded[peak])) peak = k;
  }
  if (!(total > 0.0)) throw ValidationError("localized_state: empty state");
  // Fix the global phase: largest coefficient real and positive.
  const Complex unit = std::conj(folded[peak]) / (std::abs(folded[peak]) * std::sqrt(total));
  std::vector<std::pair<int, Complex>> out;
  const double keep = 1e-18 * std::abs(folded[peak]);
  for (std::size_t k = 0; k < folded.size(); ++k)
    if (std::abs(folded[k]) > keep) out.emplace_back(static_cast<int>(k), folded[k] * unit);
  (void)n;  // the sector weights do not depend on the level
  return out;
}

CopyMode localized_copy(int n, std::int64_t alpha, double x0, double y0, double width)
{
  CopyMode m;
  m.branch = BranchLabel::landau(n, alpha);
  m.sectors = localized_state(n, alpha, x0, y0, width);
  return m;
}

// ------------------------------------------------------------------ grids

std::string AxisSelector::name() const
{
  static const char* names[] = {"x", "y", "z"};
  return names[static_cast<int>(coord)] + std::to_string(copy + 1);
}

double AxisSelector::period() const { return coord == Coord::z ? kTwoPi : kSqrtTwoPi; }

AxisSelector AxisSelector::parse(const std::string& text)
{
  if (text.size() < 2 || (text[0] != 'x' && text[0] != 'y' && text[0] != 'z'))
    throw ValidationError("axis must look like x1, y2 or z1, got '" + text + "'");
  AxisSelector s;
  s.coord = text[0] == 'x' ? Coord::x : (text[0] == 'y' ? Coord::y : Coord::z);
  std::size_t used = 0;
  int copy = 0;
  try {
    copy = std::stoi(text.substr(1), &used);
  } catch (const std::exception&) {
    throw ValidationError("axis must look like x1, y2 or z1, got '" + text + "'");
  }
  if (used != text.size() - 1 || copy < 1) throw ValidationError("bad axis copy index in '" + text + "'");
  s.copy = copy - 1;
  return s;
}

GridAxis periodic_axis(const AxisSelector& selector, int points)
{
  if (points < 1) throw ValidationError("grid resolution must be positive");
  GridAxis axis;
  axis.selector = selector;
  const double h = selector.period() / points;
  for (int i = 0; i < points; ++i) {
    axis.nodes.push_back(h * i);
    axis.weights.push_back(h);
  }
  return axis;
}

std::vector<std::size_t> GridField::shape() const
{
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.nodes.size());
  return s;
}

namespace {

// Multi-index of flat position i (last axis fastest).
void unflatten(std::size_t i, const std::vector<std::size_t>& shape, std::vector<std::size_t>& idx)
{
  idx.resize(shape.size());
  for (std::size_t d = shape.size(); d-- > 0;) {
    idx[d] = i % shape[d];
    i /= shape[d];
  }
}

}  // namespace

Complex GridField::integrate() const
{
  const auto s = shape();
  std::vector<std::size_t> idx;
  Complex total{0.0, 0.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    unflatten(i, s, idx);
    double w = 1.0;
    for (std::size_t d = 0; d < axes.size(); ++d) w *= axes[d].weights[idx[d]];
    total += w * values[i];
  }
  return total;
}

double GridField::volume() const
{
  double v = 1.0;
  for (const auto& a : axes) {
    double s = 0.0;
    for (double w : a.weights) s += w;
    v *= s;
  }
  return v;
}

GridField sample_field(const QuotientEigenfunction& phi, const ProductPoint& base,
                       const std::vector<AxisSelector>& axes, int points_per_axis)
{
  if (base.m() != phi.m()) throw ValidationError("sample_field: base point has the wrong number of copies");
  GridField field;
  for (const auto& a : axes) {
    if (a.copy < 0 || a.copy >= phi.m()) throw ValidationError("sample_field: axis copy out of range");
    field.axes.push_back(periodic_axis(a, points_per_axis));
  }
  std::size_t total = 1;
  for (const auto& a : field.axes) total *= a.nodes.size();
  field.values.assign(total, Complex(0.0, 0.0));
  const auto shape = field.shape();
  parallel_for(total, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < end; ++i) {
      unflatten(i, shape, idx);
      ProductPoint q = base;
      for (std::size_t d = 0; d < field.axes.size(); ++d) {
        auto& g = q.copies[static_cast<std::size_t>(field.axes[d].selector.copy)];
        const double v = field.axes[d].nodes[idx[d]];
        switch (field.axes[d].selector.coord) {
          case Coord::x: g.x = v; break;
          case Coord::y: g.y = v; break;
          case Coord::z: g.z = v; break;
        }
      }
      field.values[i] = phi.value(q);
    }
  });
  return field;
}

void write_grid_csv(std::ostream& os, const GridField& field, const std::vector<std::string>& header)
{
  for (const auto& line : header) os << "# " << line << '\n';
  for (const auto& a : field.axes) os << a.selector.name() << ',';
  os << "re,im,abs2\n";
  const auto shape = field.shape();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    unflatten(i, shape, idx);
    for (std::size_t d = 0; d < field.axes.size(); ++d) os << format_double(field.axes[d].nodes[idx[d]]) << ',';
    const Complex v = field.values[i];
    os << format_double(v.real()) << ',' << format_double(v.imag()) << ',' << format_double(std::norm(v)) << '\n';
  }
}

void write_grid_json(std::ostream& os, const GridField& field, const QuotientEigenfunction& phi)
{
  JsonWriter w(os);
  w.begin_object();
  w.field("eigenvalue", phi.eigenvalue());
  w.field("eigenvalue_exact", phi.key().to_string());
  w.field("norm", std::sqrt(phi.norm2()));
  w.key("labels").begin_array();
  for (const auto& t : phi.terms()) w.value(t.label().to_string());
  w.end_array();
  w.key("axes").begin_array();
  for (const auto& a : field.axes) {
    w.begin_object();
    w.field("name", a.selector.name());
    w.field("period", a.selector.period());
    w.field("points", static_cast<std::int64_t>(a.nodes.size()));
    w.end_object();
  }
  w.end_array();
  std::vector<double> re;
  std::vector<double> im;
  for (const auto& v : field.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  w.array("re", re);
  w.array("im", im);
  w.end_object();
}

}  // namespace heisfan
