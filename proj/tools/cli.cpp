#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "heisfan/config.hpp"
#include "heisfan/cones.hpp"
#include "heisfan/error.hpp"
#include "heisfan/json_writer.hpp"
#include "heisfan/parallel.hpp"
#include "heisfan/sequences.hpp"
#include "heisfan/spectrum_io.hpp"
#include "heisfan/version.hpp"

namespace heisfan::cli {

namespace {

/// Raised when a run completes but a declared prediction or check failed.
struct Unverified
{
  std::string what;
};

struct Context
{
  ExperimentConfig cfg;
  std::set<std::string> explicit_keys;  ///< keys set by the config file or a flag
  std::ostream& out;
  std::ostream& err;
};

// ------------------------------------------------------------------ output

std::string resolved_format(const ExperimentConfig& cfg, const char* fallback)
{
  if (!cfg.format.empty()) return cfg.format;
  const std::filesystem::path p(cfg.out);
  if (p.extension() == ".json") return "json";
  if (p.extension() == ".csv") return "csv";
  return fallback;
}

/// Adds the resolved config as the first member of a JSON object document.
std::string with_config(const std::string& document, const ExperimentConfig& cfg)
{
  const auto brace = document.find('{');
  if (brace == std::string::npos) return document;
  std::ostringstream raw;
  write_config_json(raw, cfg);
  std::string conf = raw.str();
  while (!conf.empty() && conf.back() == '\n') conf.pop_back();
  for (std::size_t at = conf.find('\n'); at != std::string::npos; at = conf.find('\n', at + 3)) conf.insert(at + 1, "  ");
  const bool empty_object = document.find_first_not_of(" \n", brace + 1) == document.find('}', brace);
  return document.substr(0, brace + 1) + "\n  \"config\": " + conf + (empty_object ? "" : ",") +
         document.substr(brace + 1);
}

using CsvBody = std::function<void(std::ostream&, const std::vector<std::string>& header)>;
using JsonBody = std::function<void(std::ostream&)>;

void emit(Context& ctx, const CsvBody& csv, const JsonBody& json)
{
  std::ostringstream buf;
  if (ctx.cfg.format == "json") {
    std::ostringstream doc;
    json(doc);
    buf << with_config(doc.str(), ctx.cfg);
    if (buf.str().empty() || buf.str().back() != '\n') buf << '\n';
  } else {
    csv(buf, header_lines(ctx.cfg));
  }
  if (ctx.cfg.out == "-") {
    ctx.out << buf.str();
    ctx.out.flush();
    return;
  }
  const std::filesystem::path path(ctx.cfg.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + ctx.cfg.out + "'");
  file << buf.str();
}

void write_header(std::ostream& os, const std::vector<std::string>& header)
{
  for (const auto& line : header) os << "# " << line << '\n';
}

void fix_format(Context& ctx, const char* fallback) { ctx.cfg.format = resolved_format(ctx.cfg, fallback); }

bool is_explicit(const Context& ctx, const char* key) { return ctx.explicit_keys.count(key) > 0; }

// ------------------------------------------------------------- sequences

struct SequenceSpec
{
  std::string name;
  int m = 1;
  SequenceBuilder build;
  std::vector<int> support;               ///< 0-based J of the whole sequence
  std::vector<std::string> predictions;   ///< defaults in prediction syntax
};

std::vector<int> zero_based(const std::vector<int>& one_based)
{
  std::vector<int> out;
  for (int j : one_based) out.push_back(j - 1);
  return out;
}

AlphaScale scale_of(const std::string& s) { return s == "square" ? AlphaScale::square : AlphaScale::linear; }

std::string scale_name(AlphaScale s) { return s == AlphaScale::square ? "square" : "linear"; }

/// `weight:J:levels:direction[:shift]` entries joined by ';'.
ConverseTarget parse_mixture(const std::string& text, int m, AlphaScale scale)
{
  ConverseTarget t;
  t.m = m;
  t.scale = scale;
  for (const auto& entry : split_list(text, ';')) {
    const auto parts = split_list(entry, ':');
    if (parts.size() != 4 && parts.size() != 5)
      throw ValidationError("mixture entry '" + entry + "' needs weight:J:levels:direction[:shift]");
    ConverseComponent c;
    c.weight = parse_number(parts[0]);
    for (int j : parse_integers(parts[1])) {
      if (j < 1 || j > m) throw ValidationError("mixture entry '" + entry + "': copy out of range");
      c.support.push_back(j - 1);
    }
    c.levels = parse_integers(parts[2]);
    ConversePoint p;
    p.direction = parse_numbers(parts[3]);
    p.beta = 1.0;
    if (parts.size() == 5)
      for (int v : parse_integers(parts[4])) p.alpha_shift.push_back(v);
    c.points.push_back(p);
    t.components.push_back(c);
  }
  if (t.components.empty()) throw ValidationError("mixture is empty");
  return t;
}

std::vector<int> converse_support(const ConverseTarget& t)
{
  std::set<int> s;
  for (const auto& c : t.components) s.insert(c.support.begin(), c.support.end());
  return {s.begin(), s.end()};
}

void resolve_m(Context& ctx, int m, const std::string& what)
{
  if (is_explicit(ctx, "m") && ctx.cfg.m != m)
    throw ValidationError(what + " has m = " + std::to_string(m) + " but m = " + std::to_string(ctx.cfg.m) + " was requested");
  ctx.cfg.m = m;
}

SequenceSpec resolve_sequence(Context& ctx)
{
  auto& cfg = ctx.cfg;
  const bool has_mixture = !cfg.mixture.empty();
  const bool converse_preset_name = cfg.preset == "diagonal" || cfg.preset == "two-s";
  if (has_mixture && !cfg.preset.empty()) throw ValidationError("give either a preset or a mixture, not both");
  if (cfg.kind.empty()) cfg.kind = (has_mixture || converse_preset_name) ? "converse" : "tensor";

  SequenceSpec spec;
  if (cfg.kind == "converse") {
    ConverseTarget target;
    if (has_mixture) {
      target = parse_mixture(cfg.mixture, cfg.m, scale_of(cfg.scale));
      spec.name = "mixture";
    } else {
      if (cfg.preset.empty()) throw ValidationError("converse sequences need a preset or a mixture");
      target = converse_preset(cfg.preset);
      spec.name = cfg.preset;
      if (is_explicit(ctx, "scale")) target.scale = scale_of(cfg.scale);
      cfg.scale = scale_name(target.scale);
    }
    resolve_m(ctx, target.m, "sequence '" + spec.name + "'");
    target.validate();
    spec.m = target.m;
    spec.support = converse_support(target);
    spec.build = [target](int k) { return seq_converse(target, k); };
    for (int j : spec.support) spec.predictions.push_back("uniform-z:" + std::to_string(j + 1) + ":1e-10");
    if (cfg.preset == "diagonal") {
      spec.predictions.push_back("line-z:1,2:1e-8");
      spec.predictions.push_back("flow-invariance:1,2:1e-8:s=0.5,0.5:t=pi/4,pi/2,pi");
    }
    return spec;
  }

  TensorSequence seq;
  if (!cfg.preset.empty()) {
    seq = tensor_preset(cfg.preset);
    spec.name = cfg.preset;
    resolve_m(ctx, seq.m, "preset '" + cfg.preset + "'");
  } else {
    if (cfg.support.empty()) throw ValidationError("tensor sequences need a preset or a support");
    seq.m = cfg.m;
    spec.name = "tensor";
  }
  if (is_explicit(ctx, "support") || cfg.preset.empty()) seq.support = zero_based(cfg.support);
  if (is_explicit(ctx, "levels") || cfg.preset.empty()) seq.levels = cfg.levels;
  if (is_explicit(ctx, "direction") || cfg.preset.empty()) seq.direction = cfg.direction;
  if (is_explicit(ctx, "scale") || cfg.preset.empty()) seq.scale = scale_of(cfg.scale);
  if (seq.levels.empty()) seq.levels.assign(seq.support.size(), 0);
  if (seq.direction.empty()) seq.direction.assign(seq.support.size(), 1.0);
  seq.x0 = cfg.x0;
  seq.y0 = cfg.y0;
  seq.validate();
  cfg.support.clear();
  for (int j : seq.support) cfg.support.push_back(j + 1);
  cfg.levels = seq.levels;
  cfg.direction = seq.direction;
  cfg.scale = scale_name(seq.scale);

  spec.m = seq.m;
  spec.support = seq.support;
  spec.build = [seq](int k) { return seq_tensor(seq, k); };
  for (int j : seq.support) {
    const std::string c = std::to_string(j + 1);
    if (seq.scale == AlphaScale::square && seq.localized)
      spec.predictions.push_back("concentration:" + c + ":0.1:decrease:at=" + format_double(seq.x0) + "," +
                                 format_double(seq.y0) + ":radius=" + format_double(cfg.radius) +
                                 ":res=" + std::to_string(cfg.resolution));
    spec.predictions.push_back("uniform-z:" + c + ":1e-10");
  }
  return spec;
}

std::string joined(const std::vector<std::string>& items, const char* sep)
{
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

std::vector<TestFunction> dictionary_of(const ExperimentConfig& cfg)
{
  if (cfg.dictionary.empty()) return standard_dictionary(cfg.m);
  std::vector<TestFunction> out;
  for (const auto& f : split_list(cfg.dictionary, ';')) out.push_back(parse_test_function(f, cfg.m));
  return out;
}

std::optional<SimplexPoint> flow_of(const ExperimentConfig& cfg)
{
  if (cfg.flow.empty()) return std::nullopt;
  if (static_cast<int>(cfg.flow.size()) != cfg.m) throw ValidationError("flow needs one weight per copy");
  std::vector<int> support;
  std::vector<double> weights;
  for (int j = 0; j < cfg.m; ++j)
    if (cfg.flow[static_cast<std::size_t>(j)] > 0.0) {
      support.push_back(j);
      weights.push_back(cfg.flow[static_cast<std::size_t>(j)]);
    }
  if (support.empty()) throw ValidationError("flow weights are all zero");
  return SimplexPoint(support, weights);
}

// ---------------------------------------------------------------- commands

void cmd_spectrum(Context& ctx)
{
  auto& cfg = ctx.cfg;
  fix_format(ctx, "csv");
  if (cfg.method == "sumset") {
    const auto rows = sumset_multiplicities(cfg.m, cfg.lambda);
    emit(
        ctx,
        [&](std::ostream& os, const std::vector<std::string>& header) {
          write_header(os, header);
          os << "eigenvalue,exact,multiplicity,label_count\n";
          for (const auto& r : rows)
            os << format_double(r.key.value()) << ',' << r.key.to_string() << ',' << r.multiplicity << ','
               << r.label_count << '\n';
        },
        [&](std::ostream& os) {
          JsonWriter w(os);
          w.begin_object();
          w.field("cutoff", cfg.lambda);
          w.key("entries").begin_array();
          for (const auto& r : rows) {
            w.begin_object();
            w.field("eigenvalue", r.key.value());
            w.field("exact", r.key.to_string());
            w.field("multiplicity", r.multiplicity);
            w.field("label_count", r.label_count);
            w.end_object();
          }
          w.end_array();
          w.end_object();
        });
    return;
  }
  SpectrumTable table;
  if (cfg.method == "arithmetic") {
    if (cfg.m != 1) throw ValidationError("method 'arithmetic' is available for m = 1 only");
    table = enumerate_h1_arithmetic(cfg.lambda);
  } else if (cfg.m == 1) {
    table = enumerate_h1(cfg.lambda);
  } else {
    EnumerationOptions opt;
    opt.max_labels = cfg.max_labels;
    table = enumerate_hm(cfg.m, cfg.lambda, opt);
  }
  emit(
      ctx, [&](std::ostream& os, const std::vector<std::string>& header) { write_spectrum_csv(os, table, header); },
      [&](std::ostream& os) { write_spectrum_json(os, table); });
}

void cmd_fan(Context& ctx)
{
  auto& cfg = ctx.cfg;
  fix_format(ctx, "csv");
  const auto count = count_joint_labels(cfg.m, cfg.lambda);
  if (count > cfg.max_labels)
    throw CapacityError("fan would list " + std::to_string(count) + " labels, above max_labels = " +
                        std::to_string(cfg.max_labels));
  emit(
      ctx, [&](std::ostream& os, const std::vector<std::string>& header) { write_fan_csv(os, cfg.m, cfg.lambda, header); },
      [&](std::ostream& os) {
        JsonWriter w(os);
        w.begin_object();
        w.field("m", cfg.m);
        w.field("cutoff", cfg.lambda);
        w.key("points").begin_array();
        for (const auto& p : fan_points(cfg.m, cfg.lambda)) {
          w.begin_object();
          w.field("eigenvalue", p.eigenvalue);
          w.array("abs_alpha", p.abs_alpha);
          w.array("odd", p.odd);
          w.end_object();
        }
        w.end_array();
        w.end_object();
      });
}

void cmd_htype(Context& ctx)
{
  auto& cfg = ctx.cfg;
  fix_format(ctx, "csv");
  if (cfg.beta.size() == 1 && cfg.d > 1) cfg.beta.assign(static_cast<std::size_t>(cfg.d), cfg.beta.front());
  const auto table = enumerate_htype(cfg.d, cfg.beta, cfg.lambda);
  emit(
      ctx, [&](std::ostream& os, const std::vector<std::string>& header) { write_htype_csv(os, table, header); },
      [&](std::ostream& os) { write_htype_json(os, table, cfg.d, cfg.beta); });
}

ProductPoint base_point(const ExperimentConfig& cfg)
{
  ProductPoint base = ProductPoint::origin(cfg.m);
  if (cfg.at.empty()) return base;
  const auto copies = split_list(cfg.at, ';');
  if (static_cast<int>(copies.size()) != cfg.m) throw ValidationError("at needs one x,y,z triple per copy");
  for (int j = 0; j < cfg.m; ++j) {
    const auto xyz = parse_numbers(copies[static_cast<std::size_t>(j)]);
    if (xyz.size() != 3) throw ValidationError("at needs x,y,z for every copy");
    base.copies[static_cast<std::size_t>(j)] = {xyz[0], xyz[1], xyz[2]};
  }
  return base;
}

void cmd_eigen_eval(Context& ctx)
{
  auto& cfg = ctx.cfg;
  fix_format(ctx, "csv");
  if (cfg.label.empty()) throw ValidationError("eigen-eval needs --label, e.g. L(0,3)|F(1,0)");
  const JointLabel label = JointLabel::parse(cfg.label);
  resolve_m(ctx, label.m(), "label '" + cfg.label + "'");
  if (cfg.sectors.empty()) cfg.sectors.assign(static_cast<std::size_t>(cfg.m), 0);
  if (static_cast<int>(cfg.sectors.size()) != cfg.m) throw ValidationError("sectors needs one entry per copy");
  if (cfg.axes.empty()) cfg.axes = {"x1", "y1"};
  std::vector<BasisMode> modes;
  for (int j = 0; j < cfg.m; ++j)
    modes.emplace_back(label.branches()[static_cast<std::size_t>(j)], cfg.sectors[static_cast<std::size_t>(j)]);
  const auto phi = QuotientEigenfunction::single(modes);
  std::vector<AxisSelector> axes;
  for (const auto& a : cfg.axes) {
    axes.push_back(AxisSelector::parse(a));
    if (axes.back().copy >= cfg.m) throw ValidationError("axis '" + a + "' names a copy beyond m");
  }
  const ProductPoint base = base_point(cfg);
  const auto field = sample_field(phi, base, axes, cfg.resolution);

  double sup = 0.0;
  for (const auto& v : field.values) sup = std::max(sup, std::abs(v));
  const auto residual_field = [&] {
    GridField r = field;
    parallel_for(r.values.size(), [&](std::size_t b, std::size_t e) {
      std::vector<std::size_t> idx(axes.size());
      for (std::size_t i = b; i < e; ++i) {
        ProductPoint q = base;
        std::size_t rest = i;
        for (std::size_t a = axes.size(); a-- > 0;) {
          const std::size_t n = field.axes[a].nodes.size();
          const double c = field.axes[a].nodes[rest % n];
          rest /= n;
          auto& g = q.copies[static_cast<std::size_t>(axes[a].copy)];
          (axes[a].coord == Coord::x ? g.x : axes[a].coord == Coord::y ? g.y : g.z) = c;
        }
        r.values[i] = phi.apply_minus_delta(q) - phi.eigenvalue() * phi.value(q);
      }
    });
    return r;
  }();
  double residual = 0.0;
  for (const auto& v : residual_field.values) residual = std::max(residual, std::abs(v));
  ctx.err << "eigen-eval: eigenvalue " << format_double(phi.eigenvalue()) << ", relative residual "
          << format_double(sup > 0.0 ? residual / sup : residual) << '\n';
  emit(
      ctx, [&](std::ostream& os, const std::vector<std::string>& header) { write_grid_csv(os, field, header); },
      [&](std::ostream& os) { write_grid_json(os, field, phi); });
}

void cmd_ql_converge(Context& ctx)
{
  auto& cfg = ctx.cfg;
  const SequenceSpec spec = resolve_sequence(ctx);
  fix_format(ctx, "json");
  if (cfg.predictions.empty()) cfg.predictions = joined(spec.predictions, ";");
  const auto predictions = parse_predictions(cfg.predictions, cfg.m);
  const auto dictionary = dictionary_of(cfg);
  std::vector<std::pair<SimplexPoint, double>> flows;
  if (const auto s = flow_of(cfg))
    for (double t : cfg.times) flows.emplace_back(*s, t);
  const auto report = convergence_report(spec.name, spec.build, cfg.k, predictions, dictionary, flows, cfg.quadrature());
  emit(
      ctx, [&](std::ostream& os, const std::vector<std::string>& header) { write_report_csv(os, report, header); },
      [&](std::ostream& os) { write_report_json(os, report); });
  if (!report.quadrature_converged) ctx.err << "ql-converge: warning: quadrature error estimate above tolerance\n";
  for (const auto& v : report.verdicts)
    ctx.err << (v.pass ? "pass  " : "FAIL  ") << v.name << "  value " << format_double(v.value)
            << (v.detail.empty() ? "" : "  (" + v.detail + ")") << '\n';
  if (!report.all_pass()) throw Unverified{"a declared prediction failed"};
}

void cmd_ql_invariance(Context& ctx)
{
  auto& cfg = ctx.cfg;
  const SequenceSpec spec = resolve_sequence(ctx);
  fix_format(ctx, "csv");
  const auto s = flow_of(cfg);
  if (!s) throw ValidationError("ql-invariance needs --flow with one weight per copy");
  if (cfg.times.empty()) throw ValidationError("ql-invariance needs --times");
  const auto dictionary = dictionary_of(cfg);
  const auto opt = cfg.quadrature();

  struct Row
  {
    int k;
    double eigenvalue;
    double t;
    double defect;
    std::string worst;
  };
  std::vector<Row> rows;
  double final_defect = 0.0;
  for (int k : cfg.k) {
    const auto phi = spec.build(k).normalized();
    double per_k = 0.0;
    for (double t : cfg.times) {
      Row r{k, phi.eigenvalue(), t, 0.0, {}};
      for (const auto& a : dictionary) {
        const double d = invariance_defect(phi, *s, t, {a}, opt);
        if (d > r.defect || r.worst.empty()) {
          r.defect = std::max(d, r.defect);
          r.worst = a.name();
        }
      }
      per_k = std::max(per_k, r.defect);
      rows.push_back(r);
    }
    final_defect = per_k;
  }
  std::vector<std::string> failures;
  if (cfg.expect_below && !(final_defect < *cfg.expect_below))
    failures.push_back("final defect " + format_double(final_defect) + " not below " + format_double(*cfg.expect_below));
  if (cfg.expect_above && !(final_defect > *cfg.expect_above))
    failures.push_back("final defect " + format_double(final_defect) + " not above " + format_double(*cfg.expect_above));

  emit(
      ctx,
      [&](std::ostream& os, const std::vector<std::string>& header) {
        write_header(os, header);
        os << "k,eigenvalue,t,defect,worst_function\n";
        for (const auto& r : rows)
          os << r.k << ',' << format_double(r.eigenvalue) << ',' << format_double(r.t) << ','
             << format_double(r.defect) << ",\"" << r.worst << "\"\n";
      },
      [&](std::ostream& os) {
        JsonWriter w(os);
        w.begin_object();
        w.field("sequence", spec.name);
        w.array("flow", cfg.flow);
        w.array("times", cfg.times);
        w.key("rows").begin_array();
        for (const auto& r : rows) {
          w.begin_object();
          w.field("k", r.k);
          w.field("eigenvalue", r.eigenvalue);
          w.field("t", r.t);
          w.field("defect", r.defect);
          w.field("worst_function", r.worst);
          w.end_object();
        }
        w.end_array();
        w.field("final_defect", final_defect);
        w.field("pass", failures.empty());
        w.end_object();
      });
  ctx.err << "ql-invariance: final defect " << format_double(final_defect) << '\n';
  if (!failures.empty()) throw Unverified{joined(failures, "; ")};
}

void cmd_disintegrate(Context& ctx)
{
  auto& cfg = ctx.cfg;
  const SequenceSpec spec = resolve_sequence(ctx);
  fix_format(ctx, "csv");
  const CopySet support = CopySet::of(spec.support);
  std::vector<QuotientEigenfunction> members;
  for (int k : cfg.k) members.push_back(spec.build(k).normalized());
  QHistogram hist = q_histogram(members, cfg.k, support, cfg.depth);
  if (!cfg.times.empty()) {
    DisintegrationOptions opt;
    opt.dictionary = dictionary_of(cfg);
    opt.times = cfg.times;
    opt.quadrature = cfg.quadrature();
    hist.reports.back() = cone_masses(members.back(), support, cfg.depth, opt);
  }
  emit(
      ctx,
      [&](std::ostream& os, const std::vector<std::string>& header) {
        write_header(os, header);
        os << "k,index,mass,defect,simplex_bounds\n";
        for (std::size_t i = 0; i < hist.reports.size(); ++i) {
          std::ostringstream body;
          write_disintegration_csv(body, hist.reports[i]);
          std::istringstream lines(body.str());
          std::string line;
          std::getline(lines, line);  // column names
          while (std::getline(lines, line)) os << hist.k[i] << ',' << line << '\n';
        }
      },
      [&](std::ostream& os) {
        JsonWriter w(os);
        w.begin_object();
        w.field("sequence", spec.name);
        w.field("support", support.to_string());
        w.field("depth", cfg.depth);
        w.array("k", hist.k);
        w.array("variation", hist.variation);
        w.key("reports").begin_array();
        for (const auto& r : hist.reports) {
          std::ostringstream one;
          write_disintegration_json(one, r);
          w.raw(one.str());
        }
        w.end_array();
        w.end_object();
      });
}

void cmd_split(Context& ctx)
{
  auto& cfg = ctx.cfg;
  fix_format(ctx, "csv");
  if (cfg.lambda_pair.empty()) throw ValidationError("split needs --lambda-pair, e.g. 1+2pi");
  const EigenKey key = EigenKey::parse(cfg.lambda_pair);
  cfg.lambda_pair = key.to_string();
  std::vector<JointLabel> labels;
  if (!cfg.label.empty()) {
    for (const auto& text : split_list(cfg.label, ';')) {
      labels.push_back(JointLabel::parse(text));
      if (labels.back().m() != cfg.m) throw ValidationError("label '" + text + "' does not have m copies");
      if (!(labels.back().key() == key)) throw ValidationError("label '" + text + "' is not at the requested eigenvalue");
    }
  } else {
    labels = labels_with_key(cfg.m, key);
  }
  if (labels.empty())
    throw ValidationError("no " + std::to_string(cfg.m) + "-copy labels with eigenvalue " + key.to_string());
  std::vector<Term> terms;
  for (const auto& l : labels) {
    Term t;
    for (const auto& b : l.branches()) t.copies.push_back(CopyMode::basis(b));
    terms.push_back(std::move(t));
  }
  const auto phi = QuotientEigenfunction(std::move(terms)).normalized();
  const auto result =
      split_copy_sets(phi, cfg.tau, cfg.split_rule == "elliptic-gate" ? SplitRule::elliptic_gate : SplitRule::ratio);

  struct Piece
  {
    std::string name;
    const QuotientEigenfunction* f;
  };
  std::vector<Piece> pieces;
  if (result.elliptic) pieces.push_back({"elliptic", &*result.elliptic});
  for (const auto& [set, f] : result.pieces) pieces.push_back({set.to_string(), &f});

  double worst_overlap = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    mass += pieces[i].f->norm2();
    for (std::size_t j = i + 1; j < pieces.size(); ++j)
      worst_overlap = std::max(worst_overlap, std::abs(inner_product(*pieces[i].f, *pieces[j].f)));
  }
  const double mass_gap = std::abs(mass - phi.norm2());

  auto labels_of = [](const QuotientEigenfunction& f) {
    std::vector<std::string> out;
    for (const auto& t : f.terms()) out.push_back(t.label().to_string());
    return out;
  };
  emit(
      ctx,
      [&](std::ostream& os, const std::vector<std::string>& header) {
        write_header(os, header);
        os << "piece,mass,terms,labels\n";
        for (const auto& p : pieces)
          os << '"' << p.name << "\"," << format_double(p.f->norm2()) << ',' << p.f->terms().size() << ",\""
             << joined(labels_of(*p.f), ";") << "\"\n";
        os << "# max |<piece_i, piece_j>| = " << format_double(worst_overlap) << '\n';
        os << "# |sum of masses - 1| = " << format_double(mass_gap) << '\n';
      },
      [&](std::ostream& os) {
        JsonWriter w(os);
        w.begin_object();
        w.field("eigenvalue", key.value());
        w.field("exact", key.to_string());
        w.field("tau", cfg.tau);
        w.key("pieces").begin_array();
        for (const auto& p : pieces) {
          w.begin_object();
          w.field("piece", p.name);
          w.field("mass", p.f->norm2());
          w.array("labels", labels_of(*p.f));
          w.end_object();
        }
        w.end_array();
        w.field("max_overlap", worst_overlap);
        w.field("mass_gap", mass_gap);
        w.end_object();
      });
  ctx.err << "split: " << pieces.size() << " pieces, max overlap " << format_double(worst_overlap) << ", mass gap "
          << format_double(mass_gap) << '\n';
  if (worst_overlap > cfg.orthogonality || mass_gap > cfg.orthogonality)
    throw Unverified{"pieces are not orthogonal or do not carry the full mass"};
}

// ----------------------------------------------------------------- wiring

struct Command
{
  const char* name;
  const char* help;
  std::vector<const char*> keys;
  std::function<void(Context&)> run;
  std::function<void(ExperimentConfig&)> defaults;
};

const std::vector<const char*> kSequenceKeys{"preset", "m",  "kind",    "support", "levels", "direction",
                                             "scale",  "x0", "y0",      "mixture", "k"};
const std::vector<const char*> kQuadratureKeys{"richardson", "nodes_per_panel", "panel_scale"};

std::vector<const char*> concat(std::initializer_list<std::vector<const char*>> parts)
{
  std::vector<const char*> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

const std::vector<Command>& commands()
{
  static const std::vector<Command> table{
      {"spectrum", "Eigenvalues up to lambda with multiplicities and labels",
       {"m", "lambda", "method", "max_labels"}, cmd_spectrum, {}},
      {"fan", "Joint spectrum points (eigenvalue, |alpha_j|, 2n_j+1) up to lambda",
       {"m", "lambda", "max_labels"}, cmd_fan, {}},
      {"htype-spectrum", "Spectrum of an H-type quotient with frequencies beta",
       {"d", "beta", "lambda"}, cmd_htype, {}},
      {"eigen-eval", "Sample a basis eigenfunction on a grid",
       {"m", "label", "sectors", "axes", "resolution", "at"}, cmd_eigen_eval, {}},
      {"ql-converge", "Run pairings and predictions along a sequence",
       concat({kSequenceKeys, {"predictions", "dictionary", "radius", "resolution", "flow", "times"}, kQuadratureKeys}),
       cmd_ql_converge, [](ExperimentConfig& c) { c.preset = "localized"; }},
      {"ql-invariance", "Flow invariance defects along a sequence",
       concat({kSequenceKeys, {"flow", "times", "dictionary", "expect_below", "expect_above"}, kQuadratureKeys}),
       cmd_ql_invariance,
       [](ExperimentConfig& c) {
         c.preset = "diagonal";
         c.m = 2;
         c.flow = {0.5, 0.5};
         c.times = {std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi};
         c.k = {3, 6, 12};
       }},
      {"disintegrate", "Per-cone masses of the J-component along a sequence",
       concat({kSequenceKeys, {"depth", "dictionary", "times"}, kQuadratureKeys}), cmd_disintegrate,
       [](ExperimentConfig& c) {
         c.preset = "two-s";
         c.m = 2;
       }},
      {"split", "Split the equal-weight eigenfunction at an exact eigenvalue into pieces",
       {"m", "lambda_pair", "label", "tau", "split_rule", "orthogonality"}, cmd_split,
       [](ExperimentConfig& c) { c.m = 2; }},
  };
  return table;
}

const Command& command_named(const std::string& name)
{
  for (const auto& c : commands())
    if (name == c.name) return c;
  throw ValidationError("unknown command '" + name + "'");
}

std::string flag_of(const char* key)
{
  std::string f = std::string("--") + key;
  for (auto& ch : f)
    if (ch == '_') ch = '-';
  return f;
}

/// Defaults, then the command's defaults, then the config file, then flags.
void resolve_config(Context& ctx, const std::string& command, const std::string& config_path,
                    const std::map<std::string, std::string>& flags)
{
  ctx.cfg = ExperimentConfig{};
  const Command& c = command_named(command);
  if (c.defaults) c.defaults(ctx.cfg);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot read config file '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    for (const auto& key : parse_config(text.str(), ctx.cfg)) ctx.explicit_keys.insert(key);
  }
  for (const auto& [key, value] : flags) {
    set_config_value(ctx.cfg, key, value);
    ctx.explicit_keys.insert(key);
  }
  ctx.cfg.command = command;
  if (!ctx.explicit_keys.count("threads"))
    if (const char* env = std::getenv("HEISFAN_THREADS")) set_config_value(ctx.cfg, "threads", env);
  validate_config(ctx.cfg);
  set_thread_count(ctx.cfg.threads);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"heisfan: spectra, eigenfunctions and quantum-limit diagnostics on Heisenberg quotients"};
  app.set_version_flag("--version", std::string("heisfan ") + kVersion);
  app.require_subcommand(1);

  struct Bound
  {
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Bound>> bound;

  auto add_common = [](Bound& b) {
    b.sub->add_option("--config", b.config, "INI file with [run] [spectrum] [sequence] [analysis] [tolerances]");
    for (const char* key : {"out", "format", "threads"})
      b.options[key] = b.sub->add_option(flag_of(key), b.values[key], std::string("config key ") + key);
  };
  for (const auto& c : commands()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(c.name, c.help);
    add_common(*b);
    for (const char* key : c.keys)
      b->options[key] = b->sub->add_option(flag_of(key), b->values[key], std::string("config key ") + key);
    bound.push_back(std::move(b));
  }
  auto run_bound = std::make_unique<Bound>();
  run_bound->sub = app.add_subcommand("run", "Run the command named in a config file");
  add_common(*run_bound);
  run_bound->sub->get_option("--config")->required();
  bound.push_back(std::move(run_bound));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInvalid;
  }

  for (const auto& b : bound) {
    if (!b->sub->parsed()) continue;
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : b->options)
      if (opt->count() > 0) flags[key] = b->values[key];
    Context ctx{{}, {}, out, err};
    try {
      std::string command = b->sub->get_name();
      if (command == "run") {
        command = load_config(b->config).command;
        if (command.empty() || command == "run") throw ValidationError("config file names no command");
      }
      resolve_config(ctx, command, b->config, flags);
      command_named(command).run(ctx);
      return kSuccess;
    } catch (const Unverified& u) {
      err << "heisfan: verification failed: " << u.what << '\n';
      return kUnverified;
    } catch (const ValidationError& e) {
      err << "heisfan: invalid input: " << e.what() << '\n';
      return kInvalid;
    } catch (const CapacityError& e) {
      err << "heisfan: capacity exceeded: " << e.what() << '\n';
      return kInvalid;
    } catch (const AlignmentError& e) {
      err << "heisfan: alignment failed: " << e.what() << '\n';
      return kInvalid;
    } catch (const std::exception& e) {
      err << "heisfan: internal error: " << e.what() << '\n';
      return kInternal;
    }
  }
  return kInternal;
}

}  // namespace heisfan::cli
