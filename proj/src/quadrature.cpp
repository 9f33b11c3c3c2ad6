#include "heisfan/quadrature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "heisfan/error.hpp"
#include "heisfan/hermite.hpp"

namespace heisfan {

// --------------------------------------------------------- Gauss-Legendre

namespace {

GaussLegendre compute_gauss_legendre(int n)
{
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(n));
  gl.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[static_cast<std::size_t>(i)] = -x;
    gl.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    gl.weights[static_cast<std::size_t>(i)] = w;
    gl.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n)
{
  if (n < 1 || n > 256) throw ValidationError("gauss_legendre: node count must be in [1, 256]");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

// ------------------------------------------------------------ TestFunction

TestFunction::TestFunction(std::string name, int m, std::vector<Monomial> monomials)
    : name_(std::move(name)), m_(m), monomials_(std::move(monomials))
{
  if (m < 1) throw ValidationError("TestFunction: m must be >= 1");
  for (const auto& mono : monomials_)
    if (static_cast<int>(mono.freq.size()) != m) throw ValidationError("TestFunction: monomial has wrong copy count");
  if (sup_bound() > 1.0 + 1e-12) throw ValidationError("TestFunction: weights must satisfy sum |w| <= 1");
}

TestFunction TestFunction::constant(int m)
{
  return TestFunction("1", m, {Monomial{Complex(1.0, 0.0), std::vector<Frequency>(static_cast<std::size_t>(m))}});
}

TestFunction TestFunction::plane_wave(int m, const std::vector<Frequency>& freq, std::string name)
{
  return TestFunction(name.empty() ? "exp" : std::move(name), m, {Monomial{Complex(1.0, 0.0), freq}});
}

namespace {

std::vector<Frequency> negated(const std::vector<Frequency>& f)
{
  std::vector<Frequency> out = f;
  for (auto& v : out) v = {-v.px, -v.py, -v.pz};
  return out;
}

}  // namespace

TestFunction TestFunction::cosine(int m, const std::vector<Frequency>& freq, std::string name)
{
  return TestFunction(name.empty() ? "cos" : std::move(name), m,
                      {Monomial{Complex(0.5, 0.0), freq}, Monomial{Complex(0.5, 0.0), negated(freq)}});
}

TestFunction TestFunction::sine(int m, const std::vector<Frequency>& freq, std::string name)
{
  return TestFunction(name.empty() ? "sin" : std::move(name), m,
                      {Monomial{Complex(0.0, -0.5), freq}, Monomial{Complex(0.0, 0.5), negated(freq)}});
}

TestFunction TestFunction::product(const TestFunction& a, const TestFunction& b)
{
  if (a.m() != b.m()) throw ValidationError("TestFunction::product: different m");
  std::vector<Monomial> out;
  for (const auto& x : a.monomials_)
    for (const auto& y : b.monomials_) {
      Monomial mono;
      mono.weight = x.weight * y.weight;
      for (std::size_t j = 0; j < x.freq.size(); ++j)
        mono.freq.push_back({x.freq[j].px + y.freq[j].px, x.freq[j].py + y.freq[j].py, x.freq[j].pz + y.freq[j].pz});
      out.push_back(std::move(mono));
    }
  return TestFunction(a.name() + "*" + b.name(), a.m(), std::move(out));
}

TestFunction TestFunction::after_flow(const SimplexPoint& s, double t) const
{
  TestFunction out = *this;
  for (auto& mono : out.monomials_) {
    double phase = 0.0;
    for (std::size_t i = 0; i < s.support().size(); ++i) {
      const auto j = static_cast<std::size_t>(s.support()[i]);
      if (j >= mono.freq.size()) throw ValidationError("after_flow: simplex support exceeds m");
      phase += s.weights()[i] * mono.freq[j].pz;
    }
    mono.weight *= std::polar(1.0, phase * t);
  }
  return out;
}

double TestFunction::sup_bound() const
{
  double total = 0.0;
  for (const auto& mono : monomials_) total += std::abs(mono.weight);
  return total;
}

Complex TestFunction::eval(const ProductPoint& q) const
{
  if (q.m() != m_) throw ValidationError("TestFunction::eval: wrong copy count");
  Complex total{0.0, 0.0};
  for (const auto& mono : monomials_) {
    double phase = 0.0;
    for (std::size_t j = 0; j < mono.freq.size(); ++j) {
      const auto& f = mono.freq[j];
      const auto& g = q.copies[j];
      phase += kSqrtTwoPi * (f.px * g.x + f.py * g.y) + f.pz * g.z;
    }
    total += mono.weight * std::polar(1.0, phase);
  }
  return total;
}

namespace {

// linear := term (('+'|'-') term)*, term := [integer] ('x'|'y'|'z') copy
std::vector<Frequency> parse_linear(const std::string& s, int m, const std::string& whole)
{
  std::vector<Frequency> freq(static_cast<std::size_t>(m));
  std::size_t i = 0;
  auto fail = [&] { throw ValidationError("cannot parse test function '" + whole + "'"); };
  if (s.empty()) fail();
  while (i < s.size()) {
    int sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    }
    int coeff = 1;
    if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      coeff = std::stoi(s.substr(i, j - i));
      i = j;
      if (i < s.size() && s[i] == '*') ++i;
    }
    if (i >= s.size() || (s[i] != 'x' && s[i] != 'y' && s[i] != 'z')) fail();
    const char var = s[i++];
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) fail();
    const int copy = std::stoi(s.substr(i, j - i));
    i = j;
    if (copy < 1 || copy > m) throw ValidationError("test function '" + whole + "' refers to a missing copy");
    auto& f = freq[static_cast<std::size_t>(copy - 1)];
    (var == 'x' ? f.px : var == 'y' ? f.py : f.pz) += sign * coeff;
  }
  return freq;
}

}  // namespace

TestFunction parse_test_function(const std::string& text, int m)
{
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ValidationError("empty test function");
  // Split on '*' at depth zero.
  std::vector<std::string> factors;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '*' && depth == 0) {
      factors.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  factors.push_back(cur);
  TestFunction result = TestFunction::constant(m);
  bool first = true;
  for (const auto& f : factors) {
    TestFunction factor;
    if (f == "1") {
      factor = TestFunction::constant(m);
    } else {
      const auto open = f.find('(');
      if (open == std::string::npos || f.back() != ')')
        throw ValidationError("cannot parse test function '" + text + "'");
      const std::string head = f.substr(0, open);
      const auto freq = parse_linear(f.substr(open + 1, f.size() - open - 2), m, text);
      if (head == "cos")
        factor = TestFunction::cosine(m, freq, f);
      else if (head == "sin")
        factor = TestFunction::sine(m, freq, f);
      else if (head == "exp")
        factor = TestFunction::plane_wave(m, freq, f);
      else
        throw ValidationError("unknown test function '" + head + "' in '" + text + "'");
    }
    result = first ? factor : TestFunction::product(result, factor);
    first = false;
  }
  return TestFunction(s, m, result.monomials());
}

// --------------------------------------------------------- copy overlaps

void y_coefficients(const CopyMode& f, double x, std::vector<std::pair<std::int64_t, Complex>>& out)
{
  out.clear();
  const auto& b = f.branch;
  if (!b.is_landau()) {
    Complex c{0.0, 0.0};
    for (const auto& [sector, coef] : f.sectors) c += coef;
    out.emplace_back(b.l(), c * std::polar(1.0 / kTwoPi, kSqrtTwoPi * static_cast<double>(b.k()) * x));
    return;
  }
  const std::int64_t alpha = b.alpha();
  const std::int64_t a = std::abs(alpha);
  const double da = static_cast<double>(a);
  const double sa = std::sqrt(da);
  const int n = b.level();
  const int width = f.half_width > 0 ? f.half_width : default_half_width(n, alpha);
  std::vector<Complex> coef(static_cast<std::size_t>(a), Complex(0.0, 0.0));
  for (const auto& [sector, c] : f.sectors) coef[static_cast<std::size_t>(sector)] += c;
  const double norm = std::pow(da, 0.25) * std::pow(kTwoPi, -0.75);
  const double t = static_cast<double>(alpha) * x / kSqrtTwoPi;
  const double span = static_cast<double>(width) * da;
  const auto j_lo = static_cast<std::int64_t>(std::ceil(t - span));
  const auto j_hi = static_cast<std::int64_t>(std::floor(t + span));
  const HermiteEvaluator& h = default_hermite();
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    std::int64_t r = j % a;
    if (r < 0) r += a;
    const Complex c = coef[static_cast<std::size_t>(r)];
    if (c == Complex(0.0, 0.0)) continue;
    const double u = sa * (x - kSqrtTwoPi * static_cast<double>(j) / static_cast<double>(alpha));
    out.emplace_back(j, norm * c * h.value(n, u));
  }
}

int default_panels(const CopyMode& f, const CopyMode& g, int px)
{
  auto scale = [](const CopyMode& c) {
    if (c.branch.is_landau()) {
      const double a = static_cast<double>(std::abs(c.branch.alpha()));
      return std::sqrt(a) * (std::sqrt(2.0 * c.branch.level() + 1.0) + 1.0);
    }
    return kSqrtTwoPi * static_cast<double>(std::abs(c.branch.k()));
  };
  const double rate = scale(f) + scale(g) + kSqrtTwoPi * std::abs(px);
  return 1 + static_cast<int>(std::ceil(kSqrtTwoPi * rate / 4.0));
}

Integral copy_overlap(const CopyMode& f, const CopyMode& g, const Frequency& freq, const QuadratureOptions& opt)
{
  Integral out;
  if (freq.pz + f.branch.alpha() - g.branch.alpha() != 0) return out;  // z-orthogonality
  if (freq.zero()) {
    out.value = copy_inner(f, g);
    return out;
  }
  if (!f.branch.is_landau() && !g.branch.is_landau()) {
    // Plane waves: the x integral is exact too.
    if (g.branch.k() - f.branch.k() != freq.px || g.branch.l() - f.branch.l() != freq.py) return out;
    Complex cf{0.0, 0.0};
    Complex cg{0.0, 0.0};
    for (const auto& s : f.sectors) cf += s.second;
    for (const auto& s : g.sectors) cg += s.second;
    out.value = cf * std::conj(cg);
    return out;
  }
  std::vector<std::pair<std::int64_t, Complex>> fc;
  std::vector<std::pair<std::int64_t, Complex>> gc;
  auto integrand = [&](double x) {
    y_coefficients(f, x, fc);
    y_coefficients(g, x, gc);
    Complex sum{0.0, 0.0};
    // Both lists are sorted by j; match g's index j + p_y.
    std::size_t k = 0;
    for (const auto& [j, fv] : fc) {
      const std::int64_t target = j + freq.py;
      while (k < gc.size() && gc[k].first < target) ++k;
      if (k < gc.size() && gc[k].first == target) sum += fv * std::conj(gc[k].second);
    }
    return std::polar(1.0, kSqrtTwoPi * freq.px * x) * sum;
  };
  const int panels = default_panels(f, g, freq.px) * std::max(1, opt.panel_scale);
  const Complex coarse = integrate_x(integrand, panels, opt.nodes_per_panel);
  const Complex fine = integrate_x(integrand, 2 * panels, opt.nodes_per_panel);
  const double factor = kTwoPi * kSqrtTwoPi;  // z and y integrals
  out.value = factor * fine;
  out.error = factor * std::abs(fine - coarse);
  out.converged = out.error <= opt.richardson_tol;
  return out;
}

Integral integrate_product(const QuotientEigenfunction& phi, const QuotientEigenfunction& psi, const TestFunction& a,
                           const QuadratureOptions& opt)
{
  if (phi.m() != psi.m() || phi.m() != a.m()) throw ValidationError("integrate_product: copy counts differ");
  Integral out;
  const auto m = static_cast<std::size_t>(phi.m());
  for (const auto& mono : a.monomials()) {
    for (const auto& s : phi.terms())
      for (const auto& t : psi.terms()) {
        Complex prod = mono.weight * s.coefficient * std::conj(t.coefficient);
        double err = 0.0;
        for (std::size_t j = 0; j < m && prod != Complex(0.0, 0.0); ++j) {
          const Integral part = copy_overlap(s.copies[j], t.copies[j], mono.freq[j], opt);
          err = err * std::abs(part.value) + std::abs(prod) * part.error;
          prod *= part.value;
          out.converged = out.converged && part.converged;
        }
        out.value += prod;
        out.error += err;
      }
  }
  if (out.error > opt.richardson_tol) out.converged = false;
  return out;
}

}  // namespace heisfan
