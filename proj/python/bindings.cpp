#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "heisfan/config.hpp"
#include "heisfan/cones.hpp"
#include "heisfan/error.hpp"
#include "heisfan/parallel.hpp"
#include "heisfan/quantum_limits.hpp"
#include "heisfan/sequences.hpp"
#include "heisfan/spectrum.hpp"
#include "heisfan/spectrum_io.hpp"
#include "heisfan/version.hpp"

namespace py = pybind11;
using namespace heisfan;

namespace {

ProductPoint point_from(const std::vector<std::array<double, 3>>& copies)
{
  std::vector<GroupElement> g;
  for (const auto& c : copies) g.push_back({c[0], c[1], c[2]});
  return ProductPoint(std::move(g));
}

/// Evaluates f at each row of an (N, 3m) array.
template <typename F>
py::array_t<std::complex<double>> map_points(py::array_t<double, py::array::c_style | py::array::forcecast> pts, int m,
                                             F&& f)
{
  if (pts.ndim() != 2 || pts.shape(1) != 3 * m) throw ValidationError("points must have shape (N, 3m)");
  const auto n = pts.shape(0);
  py::array_t<std::complex<double>> out(n);
  auto in = pts.unchecked<2>();
  auto res = out.mutable_unchecked<1>();
  ProductPoint q = ProductPoint::origin(m);
  for (py::ssize_t i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) q.copies[static_cast<std::size_t>(j)] = {in(i, 3 * j), in(i, 3 * j + 1), in(i, 3 * j + 2)};
    res(i) = f(q);
  }
  return out;
}

QuotientEigenfunction basis_function(const std::string& label, std::vector<int> sectors)
{
  const JointLabel l = JointLabel::parse(label);
  if (sectors.empty()) sectors.assign(static_cast<std::size_t>(l.m()), 0);
  if (static_cast<int>(sectors.size()) != l.m()) throw ValidationError("one sector per copy");
  std::vector<BasisMode> modes;
  for (int j = 0; j < l.m(); ++j) modes.emplace_back(l.branches()[static_cast<std::size_t>(j)], sectors[static_cast<std::size_t>(j)]);
  return QuotientEigenfunction::single(modes);
}

py::dict spectrum_dict(const SpectrumTable& t)
{
  py::list entries;
  for (const auto& e : t.entries) {
    py::list labels;
    for (const auto& l : e.labels) labels.append(l.to_string());
    py::dict d;
    d["eigenvalue"] = e.eigenvalue;
    d["exact"] = e.key.to_string();
    d["multiplicity"] = e.multiplicity;
    d["labels"] = labels;
    entries.append(d);
  }
  py::dict out;
  out["cutoff"] = t.cutoff;
  out["entries"] = entries;
  return out;
}

py::dict report_dict(const EmpiricalReport& r)
{
  py::dict verdicts;
  for (const auto& v : r.verdicts) {
    py::dict d;
    d["pass"] = v.pass;
    d["value"] = v.value;
    d["tolerance"] = v.tolerance;
    d["detail"] = v.detail;
    verdicts[py::str(v.name)] = d;
  }
  py::dict out;
  out["sequence"] = r.sequence;
  out["k"] = r.k;
  out["eigenvalue"] = r.eigenvalue;
  out["pairings"] = r.pairings;
  out["measurements"] = r.measurements;
  out["defects"] = r.defects;
  out["verdicts"] = verdicts;
  out["quadrature_converged"] = r.quadrature_converged;
  out["all_pass"] = r.all_pass();
  return out;
}

SequenceBuilder sequence_builder(const std::string& preset)
{
  for (const auto& name : converse_preset_names())
    if (name == preset && name != "localized") {
      const auto target = converse_preset(preset);
      return [target](int k) { return seq_converse(target, k); };
    }
  const auto seq = tensor_preset(preset);
  return [seq](int k) { return seq_tensor(seq, k); };
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Spectra, eigenfunctions and quantum-limit diagnostics on Heisenberg nilmanifold products";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_RuntimeError);

  m.def("set_threads", &set_thread_count, py::arg("n"), "Worker count for parallel loops; 0 = all cores.");

  // geometry
  m.def(
      "group_mul",
      [](std::array<double, 3> a, std::array<double, 3> b) {
        const auto r = group_mul({a[0], a[1], a[2]}, {b[0], b[1], b[2]});
        return std::array<double, 3>{r.x, r.y, r.z};
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "reduce_to_fundamental",
      [](std::array<double, 3> q) {
        const auto [p, g] = reduce_to_fundamental({q[0], q[1], q[2]});
        return py::make_tuple(std::array<double, 3>{p.x, p.y, p.z}, std::array<std::int64_t, 3>{g.a, g.b, g.c});
      },
      py::arg("q"), "Returns (reduced point, lattice element (a, b, c)).");

  // spectrum
  py::class_<EigenKey>(m, "EigenKey")
      .def(py::init([](std::int64_t i, std::int64_t t) { return EigenKey{i, t}; }), py::arg("integer_part") = 0,
           py::arg("two_pi_part") = 0)
      .def_static("parse", &EigenKey::parse)
      .def_readonly("integer_part", &EigenKey::integer_part)
      .def_readonly("two_pi_part", &EigenKey::two_pi_part)
      .def_property_readonly("value", &EigenKey::value)
      .def("__str__", &EigenKey::to_string)
      .def("__repr__", [](const EigenKey& k) { return "EigenKey('" + k.to_string() + "')"; })
      .def("__eq__", [](const EigenKey& a, const EigenKey& b) { return a == b; })
      .def("__hash__", [](const EigenKey& k) { return py::hash(py::make_tuple(k.integer_part, k.two_pi_part)); });

  m.def("label_eigenvalue", [](const std::string& label) { return JointLabel::parse(label).key().to_string(); },
        py::arg("label"), "Exact eigenvalue of a joint label such as 'L(0,3)|F(1,0)'.");
  m.def("label_weight", [](const std::string& label) { return JointLabel::parse(label).weight(); }, py::arg("label"));

  m.def(
      "enumerate_spectrum",
      [](int copies, double cutoff, const std::string& method, std::uint64_t max_labels) {
        if (method == "arithmetic") {
          if (copies != 1) throw ValidationError("method 'arithmetic' is available for m = 1 only");
          return spectrum_dict(enumerate_h1_arithmetic(cutoff));
        }
        if (copies == 1) return spectrum_dict(enumerate_h1(cutoff));
        EnumerationOptions opt;
        opt.max_labels = max_labels;
        return spectrum_dict(enumerate_hm(copies, cutoff, opt));
      },
      py::arg("m"), py::arg("cutoff"), py::arg("method") = "direct", py::arg("max_labels") = 20'000'000ULL,
      "Eigenvalues up to the cutoff as a dict {cutoff, entries: [{eigenvalue, exact, multiplicity, labels}]}.");
  m.def(
      "sumset_multiplicities",
      [](int copies, double cutoff) {
        std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>> out;
        for (const auto& e : sumset_multiplicities(copies, cutoff))
          out.emplace_back(e.key.to_string(), e.multiplicity, e.label_count);
        return out;
      },
      py::arg("m"), py::arg("cutoff"));
  m.def("count_joint_labels", &count_joint_labels, py::arg("m"), py::arg("cutoff"));
  m.def("density_fraction", &density_fraction, py::arg("m"), py::arg("cutoff"));
  m.def(
      "fan_points",
      [](int copies, double cutoff) {
        std::vector<std::tuple<double, std::vector<std::int64_t>, std::vector<std::int64_t>>> out;
        for (const auto& p : fan_points(copies, cutoff)) out.emplace_back(p.eigenvalue, p.abs_alpha, p.odd);
        return out;
      },
      py::arg("m"), py::arg("cutoff"), "List of (eigenvalue, |alpha_j|, 2n_j+1) per joint label.");
  m.def(
      "labels_with_eigenvalue",
      [](int copies, const std::string& key) {
        std::vector<std::string> out;
        for (const auto& l : labels_with_key(copies, EigenKey::parse(key))) out.push_back(l.to_string());
        return out;
      },
      py::arg("m"), py::arg("exact"));
  m.def(
      "enumerate_htype",
      [](int d, const std::vector<double>& beta, double cutoff) {
        std::vector<std::tuple<double, std::uint64_t, std::vector<std::string>>> out;
        for (const auto& e : enumerate_htype(d, beta, cutoff).entries) {
          std::vector<std::string> labels;
          for (const auto& l : e.labels) labels.push_back(l.to_string());
          out.emplace_back(e.eigenvalue, e.multiplicity, labels);
        }
        return out;
      },
      py::arg("d"), py::arg("beta"), py::arg("cutoff"));

  // eigenfunctions
  py::class_<QuotientEigenfunction>(m, "Eigenfunction")
      .def_property_readonly("m", &QuotientEigenfunction::m)
      .def_property_readonly("eigenvalue", &QuotientEigenfunction::eigenvalue)
      .def_property_readonly("exact", [](const QuotientEigenfunction& f) { return f.key().to_string(); })
      .def_property_readonly("labels",
                             [](const QuotientEigenfunction& f) {
                               std::vector<std::string> out;
                               for (const auto& t : f.terms()) out.push_back(t.label().to_string());
                               return out;
                             })
      .def("norm2", &QuotientEigenfunction::norm2)
      .def("normalized", &QuotientEigenfunction::normalized)
      .def("scaled", &QuotientEigenfunction::scaled)
      .def(
          "__call__",
          [](const QuotientEigenfunction& f, py::array_t<double, py::array::c_style | py::array::forcecast> pts) {
            return map_points(pts, f.m(), [&](const ProductPoint& q) { return f.value(q); });
          },
          py::arg("points"), "Values at rows (x1, y1, z1, ..., xm, ym, zm).")
      .def(
          "minus_delta",
          [](const QuotientEigenfunction& f, py::array_t<double, py::array::c_style | py::array::forcecast> pts) {
            return map_points(pts, f.m(), [&](const ProductPoint& q) { return f.apply_minus_delta(q); });
          },
          py::arg("points"))
      .def("__add__", [](const QuotientEigenfunction& a, const QuotientEigenfunction& b) {
        auto terms = a.terms();
        terms.insert(terms.end(), b.terms().begin(), b.terms().end());
        return QuotientEigenfunction(std::move(terms));
      });

  m.def("basis_function", &basis_function, py::arg("label"), py::arg("sectors") = std::vector<int>{},
        "Basis eigenfunction of a joint label with one Zak sector per copy.");
  m.def("constant_function", &QuotientEigenfunction::constant, py::arg("m"));
  m.def("inner_product", &inner_product, py::arg("a"), py::arg("b"));
  m.def(
      "localized_state",
      [](int n, std::int64_t alpha, double x0, double y0, double width) {
        Term t;
        t.copies.push_back(localized_copy(n, alpha, x0, y0, width));
        return QuotientEigenfunction({t});
      },
      py::arg("n"), py::arg("alpha"), py::arg("x0") = 0.0, py::arg("y0") = 0.0, py::arg("width") = 1.0,
      "Single-copy coherent state of level n and frequency alpha centred at (x0, y0).");

  // sequences
  m.def("sequence_member", [](const std::string& preset, int k) { return sequence_builder(preset)(k); },
        py::arg("preset"), py::arg("k"),
        "k-th member of a named sequence: localized, diagonal-single, ratio-1-2, diagonal, two-s.");

  // quantum limits
  m.def(
      "pair",
      [](const QuotientEigenfunction& f, const std::string& a) { return pair(f, parse_test_function(a, f.m())); },
      py::arg("phi"), py::arg("test_function"), "Integral of a |phi|^2, e.g. test_function='cos(z1-z2)'.");
  m.def(
      "joint_pairing",
      [](const QuotientEigenfunction& f, const QuotientEigenfunction& g, const std::string& a) {
        return joint_pairing(f, g, parse_test_function(a, f.m()));
      },
      py::arg("phi"), py::arg("psi"), py::arg("test_function") = "1");
  m.def(
      "base_marginal",
      [](const QuotientEigenfunction& f, const std::vector<std::string>& axes, int resolution) {
        std::vector<AxisSelector> sel;
        for (const auto& a : axes) sel.push_back(AxisSelector::parse(a));
        const auto g = base_marginal(f, sel, resolution);
        std::vector<py::ssize_t> shape;
        for (auto s : g.shape()) shape.push_back(static_cast<py::ssize_t>(s));
        py::array_t<double> values(shape);
        double* p = values.mutable_data();
        for (std::size_t i = 0; i < g.values.size(); ++i) p[i] = g.values[i].real();
        py::list nodes;
        for (const auto& ax : g.axes) nodes.append(ax.nodes);
        return py::make_tuple(nodes, values);
      },
      py::arg("phi"), py::arg("axes"), py::arg("resolution") = 96, "Returns (axis nodes, density array).");
  m.def(
      "z_frequency_distribution",
      [](const QuotientEigenfunction& f, int copy) {
        std::vector<std::pair<std::int64_t, double>> out;
        for (const auto& e : z_frequency_distribution(f, copy)) out.emplace_back(e.alpha, e.mass);
        return out;
      },
      py::arg("phi"), py::arg("copy"));
  m.def(
      "invariance_defect",
      [](const QuotientEigenfunction& f, const std::vector<double>& flow, double t,
         const std::vector<std::string>& dictionary) {
        std::vector<int> support;
        std::vector<double> weights;
        for (std::size_t j = 0; j < flow.size(); ++j)
          if (flow[j] > 0.0) {
            support.push_back(static_cast<int>(j));
            weights.push_back(flow[j]);
          }
        std::vector<TestFunction> dict;
        for (const auto& a : dictionary) dict.push_back(parse_test_function(a, f.m()));
        if (dict.empty()) dict = standard_dictionary(f.m());
        return invariance_defect(f, SimplexPoint(support, weights), t, dict);
      },
      py::arg("phi"), py::arg("flow"), py::arg("t"), py::arg("dictionary") = std::vector<std::string>{},
      "flow gives one weight per copy; an empty dictionary uses the standard one.");
  m.def(
      "measure_prediction",
      [](const QuotientEigenfunction& f, const std::string& spec) {
        return measure_prediction(f, parse_prediction(spec, f.m()));
      },
      py::arg("phi"), py::arg("prediction"), "Measures e.g. 'concentration:1:0.1' or 'line-z:1,2:1e-8'.");
  m.def(
      "convergence_report",
      [](const std::string& preset, const std::vector<int>& ks, const std::vector<std::string>& predictions) {
        const auto build = sequence_builder(preset);
        const int copies = build(ks.empty() ? 1 : ks.front()).m();
        std::vector<Prediction> preds;
        for (const auto& p : predictions) preds.push_back(parse_prediction(p, copies));
        return report_dict(convergence_report(preset, build, ks, preds, standard_dictionary(copies)));
      },
      py::arg("preset"), py::arg("k"), py::arg("predictions"));

  // cones and splitting
  py::class_<ConePartition>(m, "ConePartition")
      .def(py::init<int, int>(), py::arg("j_size"), py::arg("depth"))
      .def_property_readonly("leaf_count", &ConePartition::leaf_count)
      .def("locate", [](const ConePartition& p, const std::vector<double>& w) { return p.locate(w); }, py::arg("weights"))
      .def("locate_levels", [](const ConePartition& p, const std::vector<int>& n) { return p.locate_levels(n); },
           py::arg("levels"))
      .def("cell", &ConePartition::cell, py::arg("leaf"))
      .def("max_diameter", &ConePartition::max_diameter);
  m.def(
      "cone_masses",
      [](const QuotientEigenfunction& f, const std::vector<int>& support, int depth) {
        const auto r = cone_masses(f, CopySet::of(support), depth);
        std::map<std::uint64_t, double> masses;
        for (const auto& c : r.cells) masses[c.index] = c.mass;
        return py::make_tuple(r.total_mass, masses);
      },
      py::arg("phi"), py::arg("support"), py::arg("depth"),
      "Returns (mass of the J-component, {leaf: mass}); support is 0-based.");
  m.def(
      "split",
      [](const QuotientEigenfunction& f, double tau, const std::string& rule) {
        const auto r = split_copy_sets(f, tau, rule == "elliptic-gate" ? SplitRule::elliptic_gate : SplitRule::ratio);
        py::dict out;
        if (r.elliptic) out["elliptic"] = *r.elliptic;
        for (const auto& [set, piece] : r.pieces) out[py::str(set.to_string())] = piece;
        return out;
      },
      py::arg("phi"), py::arg("tau"), py::arg("rule") = "ratio",
      "Pieces keyed by copy set ('{1}', '{1,2}', ...) plus 'elliptic' when present.");

  // config
  m.def(
      "normalize_config",
      [](const std::string& text) { return serialize_config(parse_config(text)); }, py::arg("text"),
      "Parses INI text and returns the fully resolved serialization.");
}
