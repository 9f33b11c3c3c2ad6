#include "heisfan/quantum_limits.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "heisfan/error.hpp"
#include "heisfan/json_writer.hpp"
#include "heisfan/parallel.hpp"

namespace heisfan {

Integral pair_checked(const QuotientEigenfunction& phi, const TestFunction& a, const QuadratureOptions& opt)
{
  return integrate_product(phi, phi, a, opt);
}

double pair(const QuotientEigenfunction& phi, const TestFunction& a, const QuadratureOptions& opt)
{
  return std::real(pair_checked(phi, a, opt).value);
}

Complex joint_pairing(const QuotientEigenfunction& phi, const QuotientEigenfunction& psi, const TestFunction& a,
                      const QuadratureOptions& opt)
{
  return integrate_product(phi, psi, a, opt).value;
}

// ------------------------------------------------------------- marginals

namespace {

// ∫_0^{sqrt(2pi)} f(x, y, 0) conj(g(x, y, 0)) dx.
Complex x_integral_at(const CopyMode& f, const CopyMode& g, double y, const QuadratureOptions& opt)
{
  const int panels = 2 * default_panels(f, g, 0) * std::max(1, opt.panel_scale);
  return integrate_x(
      [&](double x) {
        const GroupElement q{x, y, 0.0};
        return f.value(q) * std::conj(g.value(q));
      },
      panels, opt.nodes_per_panel);
}

// sqrt(2pi) sum_j F_j(x) conj(G_j(x)) = ∫_0^{sqrt(2pi)} f(x, y, 0) conj(g(x, y, 0)) dy.
Complex y_integral_at(const CopyMode& f, const CopyMode& g, double x)
{
  std::vector<std::pair<std::int64_t, Complex>> fc;
  std::vector<std::pair<std::int64_t, Complex>> gc;
  y_coefficients(f, x, fc);
  y_coefficients(g, x, gc);
  Complex sum{0.0, 0.0};
  std::size_t k = 0;
  for (const auto& [j, fv] : fc) {
    while (k < gc.size() && gc[k].first < j) ++k;
    if (k < gc.size() && gc[k].first == j) sum += fv * std::conj(gc[k].second);
  }
  return kSqrtTwoPi * sum;
}

struct CopyAxes
{
  int x = -1;  // position in the output grid, or -1 when not selected
  int y = -1;
  int z = -1;
  bool any() const { return x >= 0 || y >= 0 || z >= 0; }
};

// Integral of f conj(g) over the unselected coordinates of one copy, at the
// selected coordinate values.
Complex copy_partial(const CopyMode& f, const CopyMode& g, const CopyAxes& sel, double x, double y, double z,
                     const QuadratureOptions& opt)
{
  const std::int64_t df = f.branch.alpha() - g.branch.alpha();
  if (sel.z < 0) {
    if (df != 0) return {0.0, 0.0};
    if (sel.x >= 0 && sel.y >= 0) return kTwoPi * f.value({x, y, 0.0}) * std::conj(g.value({x, y, 0.0}));
    if (sel.x >= 0) return kTwoPi * y_integral_at(f, g, x);
    return kTwoPi * x_integral_at(f, g, y, opt);
  }
  const Complex phase = std::polar(1.0, static_cast<double>(df) * z);
  if (sel.x >= 0) return phase * y_integral_at(f, g, x);
  if (sel.y >= 0) return phase * x_integral_at(f, g, y, opt);
  // Only z selected: the full (x, y) overlap.
  if (df == 0) return phase * copy_inner(f, g) / kTwoPi;
  return phase * copy_overlap(f, g, {0, 0, static_cast<int>(-df)}, opt).value / kTwoPi;
}

}  // namespace

GridField base_marginal(const QuotientEigenfunction& phi, const std::vector<AxisSelector>& axes, int resolution,
                        const QuadratureOptions& opt)
{
  if (axes.empty() || axes.size() > 2) throw ValidationError("base_marginal: select one or two axes");
  if (resolution < 1) throw ValidationError("base_marginal: resolution must be positive");
  const auto m = static_cast<std::size_t>(phi.m());
  std::vector<CopyAxes> sel(m);
  GridField field;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& a = axes[d];
    if (a.copy < 0 || a.copy >= phi.m()) throw ValidationError("base_marginal: axis copy out of range");
    auto& s = sel[static_cast<std::size_t>(a.copy)];
    int& slot = a.coord == Coord::x ? s.x : (a.coord == Coord::y ? s.y : s.z);
    if (slot >= 0) throw ValidationError("base_marginal: axis selected twice");
    slot = static_cast<int>(d);
    field.axes.push_back(periodic_axis(a, resolution));
  }
  const double norm2 = phi.norm2();
  if (!(norm2 > 0.0)) throw ValidationError("base_marginal: zero function");

  // Term pairs with their exact factor from the unselected copies.
  struct PairFactor
  {
    std::size_t s;
    std::size_t t;
    Complex factor;
  };
  std::vector<PairFactor> pairs;
  const auto& terms = phi.terms();
  for (std::size_t s = 0; s < terms.size(); ++s)
    for (std::size_t t = 0; t < terms.size(); ++t) {
      Complex f = terms[s].coefficient * std::conj(terms[t].coefficient);
      for (std::size_t j = 0; j < m && f != Complex(0.0, 0.0); ++j)
        if (!sel[j].any()) f *= copy_inner(terms[s].copies[j], terms[t].copies[j]);
      // Selected copies with mismatched z-frequency and no z axis vanish.
      for (std::size_t j = 0; j < m && f != Complex(0.0, 0.0); ++j)
        if (sel[j].any() && sel[j].z < 0 && terms[s].copies[j].branch.alpha() != terms[t].copies[j].branch.alpha())
          f = 0.0;
      if (f != Complex(0.0, 0.0)) pairs.push_back({s, t, f});
    }

  std::size_t total = 1;
  for (const auto& a : field.axes) total *= a.nodes.size();
  field.values.assign(total, Complex(0.0, 0.0));
  const std::size_t inner = field.axes.size() == 2 ? field.axes[1].nodes.size() : 1;
  parallel_for(total, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t idx[2] = {i / inner, i % inner};
      double coord[2] = {0.0, 0.0};
      for (std::size_t d = 0; d < field.axes.size(); ++d) coord[d] = field.axes[d].nodes[idx[d]];
      Complex v{0.0, 0.0};
      for (const auto& p : pairs) {
        Complex prod = p.factor;
        for (std::size_t j = 0; j < m && prod != Complex(0.0, 0.0); ++j) {
          const auto& s = sel[j];
          if (!s.any()) continue;
          const double x = s.x >= 0 ? coord[s.x] : 0.0;
          const double y = s.y >= 0 ? coord[s.y] : 0.0;
          const double z = s.z >= 0 ? coord[s.z] : 0.0;
          prod *= copy_partial(terms[p.s].copies[j], terms[p.t].copies[j], s, x, y, z, opt);
        }
        v += prod;
      }
      field.values[i] = Complex(v.real() / norm2, 0.0);
    }
  });
  return field;
}

// ------------------------------------------------------ z frequencies

std::vector<FrequencyMass> z_frequency_distribution(const QuotientEigenfunction& phi, int copy)
{
  if (copy < 0 || copy >= phi.m()) throw ValidationError("z_frequency_distribution: copy out of range");
  const auto j = static_cast<std::size_t>(copy);
  std::map<std::int64_t, double> mass;
  const auto& terms = phi.terms();
  for (const auto& s : terms)
    for (const auto& t : terms) {
      const std::int64_t a = s.copies[j].branch.alpha();
      if (a != t.copies[j].branch.alpha()) continue;
      Complex prod = s.coefficient * std::conj(t.coefficient);
      for (std::size_t i = 0; i < s.copies.size() && prod != Complex(0.0, 0.0); ++i)
        prod *= copy_inner(s.copies[i], t.copies[i]);
      mass[a] += prod.real();
    }
  double total = 0.0;
  for (const auto& [a, v] : mass) total += v;
  if (!(total > 0.0)) throw ValidationError("z_frequency_distribution: zero function");
  std::vector<FrequencyMass> out;
  for (const auto& [a, v] : mass)
    if (v != 0.0) out.push_back({a, v / total});
  return out;
}

DirectionEstimate empirical_direction(const QuotientEigenfunction& phi)
{
  DirectionEstimate d;
  double top = 0.0;
  for (int j = 0; j < phi.m(); ++j) {
    double mean = 0.0;
    for (const auto& fm : z_frequency_distribution(phi, j)) mean += fm.mass * static_cast<double>(std::abs(fm.alpha));
    d.mean_abs_alpha.push_back(mean);
    top = std::max(top, mean);
  }
  for (double v : d.mean_abs_alpha) d.direction.push_back(top > 0.0 ? v / top : 0.0);
  return d;
}

double invariance_defect(const QuotientEigenfunction& phi, const SimplexPoint& s, double t,
                         const std::vector<TestFunction>& dictionary, const QuadratureOptions& opt)
{
  double worst = 0.0;
  for (const auto& a : dictionary) {
    // Both pairings share every overlap except for the phases, so compare termwise.
    const Complex before = integrate_product(phi, phi, a, opt).value;
    const Complex after = integrate_product(phi, phi, a.after_flow(s, t), opt).value;
    worst = std::max(worst, std::abs(std::real(after) - std::real(before)));
  }
  return worst;
}

std::vector<TestFunction> standard_dictionary(int m)
{
  std::vector<std::string> names;
  for (int j = 1; j <= m; ++j) {
    const std::string c = std::to_string(j);
    for (const std::string& v : {"x" + c, "y" + c, "z" + c}) {
      names.push_back("cos(" + v + ")");
      names.push_back("sin(" + v + ")");
    }
    names.push_back("cos(x" + c + "+y" + c + ")");
  }
  for (int i = 1; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      const std::string a = std::to_string(i);
      const std::string b = std::to_string(j);
      names.push_back("cos(z" + a + "-z" + b + ")");
      names.push_back("sin(z" + a + "-z" + b + ")");
      names.push_back("cos(z" + a + "+z" + b + ")");
    }
  std::vector<TestFunction> out;
  out.push_back(TestFunction::constant(m));
  for (const auto& n : names) out.push_back(parse_test_function(n, m));
  return out;
}

// ------------------------------------------------------------ predictions

PredictionKind parse_prediction_kind(const std::string& text)
{
  if (text == "concentration") return PredictionKind::concentration;
  if (text == "uniform-z") return PredictionKind::uniform_z;
  if (text == "uniform-xy") return PredictionKind::uniform_xy;
  if (text == "line-z") return PredictionKind::line_z;
  if (text == "flow-invariance") return PredictionKind::flow_invariance;
  if (text == "pairing") return PredictionKind::pairing;
  throw ValidationError("unknown prediction kind '" + text + "'");
}

std::string to_string(PredictionKind kind)
{
  switch (kind) {
    case PredictionKind::concentration: return "concentration";
    case PredictionKind::uniform_z: return "uniform-z";
    case PredictionKind::uniform_xy: return "uniform-xy";
    case PredictionKind::line_z: return "line-z";
    case PredictionKind::flow_invariance: return "flow-invariance";
    case PredictionKind::pairing: return "pairing";
  }
  return "unknown";
}

namespace {

int copy_at(const Prediction& p, std::size_t i)
{
  if (i >= p.copies.size()) throw ValidationError("prediction '" + p.name + "' needs more copies listed");
  return p.copies[i];
}

double periodic_gap(double a, double b, double period)
{
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace

double measure_prediction(const QuotientEigenfunction& phi, const Prediction& p, const QuadratureOptions& opt)
{
  switch (p.kind) {
    case PredictionKind::concentration: {
      const int j = copy_at(p, 0);
      const auto g = base_marginal(phi, {{j, Coord::x}, {j, Coord::y}}, p.resolution, opt);
      const std::size_t n = g.axes[1].nodes.size();
      double outside = 0.0;
      for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double dx = periodic_gap(g.axes[0].nodes[i / n], p.x0, kSqrtTwoPi);
        const double dy = periodic_gap(g.axes[1].nodes[i % n], p.y0, kSqrtTwoPi);
        if (dx * dx + dy * dy > p.radius * p.radius)
          outside += g.axes[0].weights[i / n] * g.axes[1].weights[i % n] * g.values[i].real();
      }
      return std::max(0.0, outside);
    }
    case PredictionKind::uniform_z:
    case PredictionKind::uniform_xy: {
      const int j = copy_at(p, 0);
      const auto g = p.kind == PredictionKind::uniform_z
                         ? base_marginal(phi, {{j, Coord::z}}, p.resolution, opt)
                         : base_marginal(phi, {{j, Coord::x}, {j, Coord::y}}, p.resolution, opt);
      double worst = 0.0;
      for (const auto& v : g.values) worst = std::max(worst, std::abs(v.real() - 1.0 / kTwoPi));
      return worst;
    }
    case PredictionKind::line_z: {
      const auto g = base_marginal(phi, {{copy_at(p, 0), Coord::z}, {copy_at(p, 1), Coord::z}}, p.resolution, opt);
      const std::size_t n = g.axes[0].nodes.size();
      double worst = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          const Complex here = g.values[a * n + b];
          const Complex shifted = g.values[((a + 1) % n) * n + (b + 1) % n];
          worst = std::max(worst, std::abs(here - shifted));
        }
      return worst;
    }
    case PredictionKind::flow_invariance: {
      const SimplexPoint s(p.flow_support, p.flow_weights);
      const auto dict = p.test_function.empty() ? standard_dictionary(phi.m())
                                                : std::vector<TestFunction>{parse_test_function(p.test_function, phi.m())};
      double worst = 0.0;
      for (double t : p.times) worst = std::max(worst, invariance_defect(phi, s, t, dict, opt));
      return worst;
    }
    case PredictionKind::pairing:
      return std::abs(pair(phi, parse_test_function(p.test_function, phi.m()), opt) - p.expected);
  }
  return 0.0;
}

bool EmpiricalReport::all_pass() const
{
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

std::string flow_key(const SimplexPoint& s, double t)
{
  std::ostringstream os;
  os << "s=";
  for (std::size_t i = 0; i < s.support().size(); ++i)
    os << (i ? ":" : "") << 'z' << s.support()[i] + 1 << '@' << format_double(s.weights()[i]);
  os << ";t=" << format_double(t);
  return os.str();
}

}  // namespace

EmpiricalReport convergence_report(const std::string& sequence, const SequenceBuilder& builder,
                                   const std::vector<int>& ks, const std::vector<Prediction>& predictions,
                                   const std::vector<TestFunction>& dictionary,
                                   const std::vector<std::pair<SimplexPoint, double>>& flows,
                                   const QuadratureOptions& opt)
{
  if (ks.empty()) throw ValidationError("convergence_report: empty k ladder");
  EmpiricalReport r;
  r.sequence = sequence;
  r.k = ks;
  for (int k : ks) {
    const QuotientEigenfunction phi = builder(k).normalized();
    r.eigenvalue.push_back(phi.eigenvalue());
    for (const auto& a : dictionary) {
      const Integral v = pair_checked(phi, a, opt);
      r.quadrature_converged = r.quadrature_converged && v.converged;
      r.pairings[a.name()].push_back(v.value.real());
    }
    for (const auto& [s, t] : flows) r.defects[flow_key(s, t)].push_back(invariance_defect(phi, s, t, dictionary, opt));
    for (const auto& p : predictions) r.measurements[p.name].push_back(measure_prediction(phi, p, opt));
  }
  for (const auto& p : predictions) {
    const auto& series = r.measurements[p.name];
    Verdict v;
    v.name = p.name;
    v.value = series.back();
    v.tolerance = p.tol;
    v.pass = v.value <= p.tol;
    if (!v.pass) v.detail = "final value above tolerance";
    if (p.require_decrease) {
      for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i] < series[i - 1])) {
          v.pass = false;
          v.detail = "not decreasing at k = " + std::to_string(ks[i]);
          break;
        }
    }
    r.verdicts.push_back(v);
  }
  return r;
}

void write_report_json(std::ostream& os, const EmpiricalReport& report)
{
  JsonWriter w(os);
  w.begin_object();
  w.field("sequence", report.sequence);
  w.key("k").begin_array();
  for (int k : report.k) w.value(k);
  w.end_array();
  w.array("eigenvalue", report.eigenvalue);
  auto table = [&](const char* name, const std::map<std::string, std::vector<double>>& t) {
    w.key(name).begin_object();
    for (const auto& [k, v] : t) w.array(k, v);
    w.end_object();
  };
  table("pairings", report.pairings);
  table("measurements", report.measurements);
  table("defects", report.defects);
  w.key("verdicts").begin_object();
  for (const auto& v : report.verdicts) {
    w.key(v.name).begin_object();
    w.field("pass", v.pass);
    w.field("value", v.value);
    w.field("tolerance", v.tolerance);
    if (!v.detail.empty()) w.field("detail", v.detail);
    w.end_object();
  }
  w.end_object();
  w.field("quadrature_converged", report.quadrature_converged);
  w.field("all_pass", report.all_pass());
  w.end_object();
}

void write_report_csv(std::ostream& os, const EmpiricalReport& report, const std::vector<std::string>& header)
{
  for (const auto& line : header) os << "# " << line << '\n';
  os << "k,kind,name,value\n";
  for (std::size_t i = 0; i < report.k.size(); ++i) {
    const int k = report.k[i];
    os << k << ",eigenvalue,," << format_double(report.eigenvalue[i]) << '\n';
    for (const auto& [name, v] : report.pairings) os << k << ",pairing,\"" << name << "\"," << format_double(v[i]) << '\n';
    for (const auto& [name, v] : report.measurements)
      os << k << ",measurement,\"" << name << "\"," << format_double(v[i]) << '\n';
    for (const auto& [name, v] : report.defects) os << k << ",defect,\"" << name << "\"," << format_double(v[i]) << '\n';
  }
  const int last = report.k.back();
  for (const auto& v : report.verdicts) os << last << ",verdict,\"" << v.name << "\"," << (v.pass ? 1 : 0) << '\n';
}

}  // namespace heisfan
