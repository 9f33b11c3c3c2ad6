#include "heisfan/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "heisfan/error.hpp"
#include "heisfan/json_writer.hpp"
#include "heisfan/version.hpp"

namespace heisfan {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected)
{
  throw ValidationError("config key '" + key + "': cannot read '" + value + "' as " + expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text)
{
  const std::string t = trim(text);
  T v{};
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) bad_value(key, text, "an integer");
  return v;
}

/// Plain numbers plus the forms pi, 2pi, 3*pi, pi/4 and 3pi/4.
double parse_real(const std::string& key, const std::string& text)
{
  std::string t = trim(text);
  const auto pi_at = t.find("pi");
  if (pi_at != std::string::npos && t.find("pi", pi_at + 2) == std::string::npos) {
    std::string head = t.substr(0, pi_at);
    std::string tail = t.substr(pi_at + 2);
    if (!head.empty() && head.back() == '*') head.pop_back();
    double factor = 1.0;
    if (head == "-")
      factor = -1.0;
    else if (!head.empty())
      factor = parse_real(key, head);
    double divisor = 1.0;
    if (!tail.empty()) {
      if (tail.front() != '/') bad_value(key, text, "a number");
      divisor = parse_real(key, tail.substr(1));
    }
    return factor * std::numbers::pi / divisor;
  }
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) bad_value(key, text, "a number");
  return v;
}

std::optional<double> parse_optional_real(const std::string& key, const std::string& text)
{
  if (trim(text).empty()) return std::nullopt;
  return parse_real(key, text);
}

template <typename T, typename Format>
std::string join(const std::vector<T>& v, Format fmt)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text)
{
  std::vector<int> out;
  for (const auto& piece : split_list(text, ',')) out.push_back(parse_integer<int>(key, piece));
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text)
{
  std::vector<double> out;
  for (const auto& piece : split_list(text, ',')) out.push_back(parse_real(key, piece));
  return out;
}

struct Field
{
  ConfigKey where;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <typename T>
Field text_field(const char* section, const char* key, T ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return c.*member; },
          [member](ExperimentConfig& c, const std::string& v) { c.*member = trim(v); }};
}

Field int_field(const char* section, const char* key, int ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_integer<int>(key, v); }};
}

Field real_field(const char* section, const char* key, double ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return format_double(c.*member); },
          [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_real(key, v); }};
}

Field optional_field(const char* section, const char* key, std::optional<double> ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return c.*member ? format_double(*(c.*member)) : std::string(); },
          [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_optional_real(key, v); }};
}

Field int_list_field(const char* section, const char* key, std::vector<int> ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return join(c.*member, [](int v) { return std::to_string(v); }); },
          [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_int_list(key, v); }};
}

Field real_list_field(const char* section, const char* key, std::vector<double> ExperimentConfig::*member)
{
  return {{section, key},
          [member](const ExperimentConfig& c) { return join(c.*member, [](double v) { return format_double(v); }); },
          [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_real_list(key, v); }};
}

const std::vector<Field>& fields()
{
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(text_field("run", "command", &ExperimentConfig::command));
    f.push_back(text_field("run", "out", &ExperimentConfig::out));
    f.push_back(text_field("run", "format", &ExperimentConfig::format));
    f.push_back(int_field("run", "threads", &ExperimentConfig::threads));

    f.push_back(int_field("spectrum", "m", &ExperimentConfig::m));
    f.push_back(real_field("spectrum", "lambda", &ExperimentConfig::lambda));
    f.push_back(text_field("spectrum", "method", &ExperimentConfig::method));
    f.push_back({{"spectrum", "max_labels"},
                 [](const ExperimentConfig& c) { return std::to_string(c.max_labels); },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.max_labels = parse_integer<std::uint64_t>("max_labels", v);
                 }});
    f.push_back(int_field("spectrum", "d", &ExperimentConfig::d));
    f.push_back(real_list_field("spectrum", "beta", &ExperimentConfig::beta));
    f.push_back(text_field("spectrum", "label", &ExperimentConfig::label));
    f.push_back(int_list_field("spectrum", "sectors", &ExperimentConfig::sectors));
    f.push_back(text_field("spectrum", "lambda_pair", &ExperimentConfig::lambda_pair));

    f.push_back(text_field("sequence", "preset", &ExperimentConfig::preset));
    f.push_back(text_field("sequence", "kind", &ExperimentConfig::kind));
    f.push_back(int_list_field("sequence", "support", &ExperimentConfig::support));
    f.push_back(int_list_field("sequence", "levels", &ExperimentConfig::levels));
    f.push_back(real_list_field("sequence", "direction", &ExperimentConfig::direction));
    f.push_back(text_field("sequence", "scale", &ExperimentConfig::scale));
    f.push_back(real_field("sequence", "x0", &ExperimentConfig::x0));
    f.push_back(real_field("sequence", "y0", &ExperimentConfig::y0));
    f.push_back(text_field("sequence", "mixture", &ExperimentConfig::mixture));
    f.push_back({{"sequence", "k"},
                 [](const ExperimentConfig& c) { return format_k_ladder(c.k); },
                 [](ExperimentConfig& c, const std::string& v) { c.k = parse_k_ladder(v); }});

    f.push_back(int_field("analysis", "depth", &ExperimentConfig::depth));
    f.push_back(real_field("analysis", "tau", &ExperimentConfig::tau));
    f.push_back(text_field("analysis", "split_rule", &ExperimentConfig::split_rule));
    f.push_back({{"analysis", "axes"},
                 [](const ExperimentConfig& c) { return join(c.axes, [](const std::string& s) { return s; }); },
                 [](ExperimentConfig& c, const std::string& v) { c.axes = split_list(v, ','); }});
    f.push_back(int_field("analysis", "resolution", &ExperimentConfig::resolution));
    f.push_back(real_field("analysis", "radius", &ExperimentConfig::radius));
    f.push_back(real_list_field("analysis", "flow", &ExperimentConfig::flow));
    f.push_back(real_list_field("analysis", "times", &ExperimentConfig::times));
    f.push_back(text_field("analysis", "at", &ExperimentConfig::at));
    f.push_back(text_field("analysis", "dictionary", &ExperimentConfig::dictionary));
    f.push_back(text_field("analysis", "predictions", &ExperimentConfig::predictions));
    f.push_back(optional_field("analysis", "expect_below", &ExperimentConfig::expect_below));
    f.push_back(optional_field("analysis", "expect_above", &ExperimentConfig::expect_above));

    f.push_back(real_field("tolerances", "richardson", &ExperimentConfig::richardson));
    f.push_back(int_field("tolerances", "nodes_per_panel", &ExperimentConfig::nodes_per_panel));
    f.push_back(int_field("tolerances", "panel_scale", &ExperimentConfig::panel_scale));
    f.push_back(real_field("tolerances", "orthogonality", &ExperimentConfig::orthogonality));
    return f;
  }();
  return table;
}

const Field& field_for(const std::string& key)
{
  for (const auto& f : fields())
    if (f.where.key == key) return f;
  throw ValidationError("unknown config key '" + key + "'");
}

}  // namespace

QuadratureOptions ExperimentConfig::quadrature() const
{
  QuadratureOptions q;
  q.nodes_per_panel = nodes_per_panel;
  q.richardson_tol = richardson;
  q.panel_scale = panel_scale;
  return q;
}

void validate_config(const ExperimentConfig& c)
{
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  auto one_of = [&](const std::string& v, std::initializer_list<const char*> allowed, const char* key) {
    for (const char* a : allowed)
      if (v == a) return;
    throw ValidationError(std::string(key) + ": unsupported value '" + v + "'");
  };
  one_of(c.format, {"", "csv", "json"}, "format");
  require(c.threads >= 0, "threads must be >= 0");
  require(c.m >= 1 && c.m <= 64, "m must be in [1, 64]");
  require(std::isfinite(c.lambda) && c.lambda >= 0.0, "lambda must be finite and >= 0");
  one_of(c.method, {"direct", "arithmetic", "sumset"}, "method");
  require(c.max_labels >= 1, "max_labels must be >= 1");
  require(c.d >= 1 && c.d <= 16, "d must be in [1, 16]");
  for (double b : c.beta) require(std::isfinite(b) && b > 0.0, "beta entries must be positive");
  for (int s : c.sectors) require(s >= 0, "sectors must be >= 0");
  one_of(c.kind, {"", "tensor", "converse"}, "kind");
  for (int j : c.support) require(j >= 1 && j <= c.m, "support entries must be copies in [1, m]");
  for (int n : c.levels) require(n >= 0, "levels must be >= 0");
  for (double p : c.direction) require(std::isfinite(p) && p != 0.0, "direction entries must be nonzero");
  one_of(c.scale, {"linear", "square"}, "scale");
  require(std::isfinite(c.x0) && std::isfinite(c.y0), "x0, y0 must be finite");
  require(!c.k.empty(), "k ladder is empty");
  for (int k : c.k) require(k >= 1, "k ladder entries must be >= 1");
  require(c.depth >= 0 && c.depth <= 32, "depth must be in [0, 32]");
  require(c.tau > 0.0 && c.tau < 1.0, "tau must be in (0, 1)");
  one_of(c.split_rule, {"ratio", "elliptic-gate"}, "split_rule");
  require(c.axes.size() <= 2, "at most two axes");
  require(c.resolution >= 2 && c.resolution <= 4096, "resolution must be in [2, 4096]");
  require(std::isfinite(c.radius) && c.radius > 0.0, "radius must be positive");
  for (double s : c.flow) require(std::isfinite(s) && s >= 0.0, "flow weights must be >= 0");
  for (double t : c.times) require(std::isfinite(t), "times must be finite");
  require(c.richardson > 0.0, "richardson must be positive");
  require(c.nodes_per_panel >= 2 && c.nodes_per_panel <= 64, "nodes_per_panel must be in [2, 64]");
  require(c.panel_scale >= 1 && c.panel_scale <= 64, "panel_scale must be in [1, 64]");
  require(c.orthogonality > 0.0, "orthogonality must be positive");
}

const std::vector<ConfigKey>& config_keys()
{
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.where);
    return k;
  }();
  return keys;
}

double parse_number(const std::string& text) { return parse_real("value", text); }
std::vector<double> parse_numbers(const std::string& text) { return parse_real_list("list", text); }
std::vector<int> parse_integers(const std::string& text) { return parse_int_list("list", text); }

std::vector<std::string> split_list(const std::string& text, char sep)
{
  std::vector<std::string> out;
  std::string piece;
  std::istringstream is(text);
  while (std::getline(is, piece, sep)) {
    piece = trim(piece);
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

std::vector<std::string> parse_config(const std::string& text, ExperimentConfig& cfg)
{
  std::vector<std::string> assigned;
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ValidationError("config: key '" + section + "' outside any section");
    for (const auto& [key, node] : body) {
      const Field& f = field_for(key);
      if (f.where.section != section)
        throw ValidationError("config: key '" + key + "' belongs in [" + f.where.section + "], not [" + section + "]");
      f.set(cfg, node.data());
      assigned.push_back(key);
    }
  }
  return assigned;
}

ExperimentConfig parse_config(const std::string& text)
{
  ExperimentConfig cfg;
  parse_config(text, cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg, bool for_header)
{
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (for_header && f.where.key == "threads") continue;
    if (f.where.section != section) {
      if (!section.empty()) os << '\n';
      section = f.where.section;
      os << '[' << section << "]\n";
    }
    const std::string value = f.get(cfg);
    os << f.where.key << (value.empty() ? " =" : " = ") << value << '\n';
  }
  return os.str();
}

std::string config_value(const ExperimentConfig& cfg, const std::string& key) { return field_for(key).get(cfg); }

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
  field_for(key).set(cfg, value);
}

std::vector<std::string> header_lines(const ExperimentConfig& cfg)
{
  std::vector<std::string> lines{std::string("heisfan ") + kVersion};
  std::istringstream is(serialize_config(cfg, true));
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

void write_config_json(std::ostream& os, const ExperimentConfig& cfg, int indent)
{
  JsonWriter w(os, indent);
  w.begin_object();
  std::string section;
  for (const auto& f : fields()) {
    if (f.where.key == "threads") continue;
    if (f.where.section != section) {
      if (!section.empty()) w.end_object();
      section = f.where.section;
      w.key(section).begin_object();
    }
    w.field(f.where.key, f.get(cfg));
  }
  if (!section.empty()) w.end_object();
  w.end_object();
}

std::vector<int> parse_k_ladder(const std::string& text)
{
  std::vector<int> out;
  for (const auto& piece : split_list(text, ',')) {
    const auto dots = piece.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_integer<int>("k", piece));
      continue;
    }
    const int lo = parse_integer<int>("k", piece.substr(0, dots));
    std::string rest = piece.substr(dots + 2);
    int step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = parse_integer<int>("k", rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const int hi = parse_integer<int>("k", rest);
    if (step < 1 || hi < lo) throw ValidationError("k ladder '" + piece + "' is empty");
    for (int k = lo; k <= hi; k += step) out.push_back(k);
  }
  if (out.empty()) throw ValidationError("k ladder is empty");
  for (int k : out)
    if (k < 1) throw ValidationError("k ladder entries must be >= 1");
  return out;
}

std::string format_k_ladder(const std::vector<int>& ks)
{
  if (ks.size() >= 3) {
    const int step = ks[1] - ks[0];
    bool arithmetic = step >= 1;
    for (std::size_t i = 2; i < ks.size() && arithmetic; ++i) arithmetic = ks[i] - ks[i - 1] == step;
    if (arithmetic) {
      std::string s = std::to_string(ks.front()) + ".." + std::to_string(ks.back());
      if (step != 1) s += ":" + std::to_string(step);
      return s;
    }
  }
  return join(ks, [](int v) { return std::to_string(v); });
}

Prediction parse_prediction(const std::string& text, int m)
{
  const auto parts = split_list(text, ':');
  if (parts.size() < 3) throw ValidationError("prediction '" + text + "' needs kind:copies:tol");
  Prediction p;
  p.name = trim(text);
  p.kind = parse_prediction_kind(parts[0]);
  for (int c : parse_int_list("copies", parts[1])) {
    if (c < 1 || c > m) throw ValidationError("prediction '" + text + "': copy out of range");
    p.copies.push_back(c - 1);
  }
  p.tol = parse_real("tol", parts[2]);
  for (std::size_t i = 3; i < parts.size(); ++i) {
    const auto& opt = parts[i];
    const auto eq = opt.find('=');
    const std::string name = trim(opt.substr(0, eq));
    const std::string value = eq == std::string::npos ? std::string() : trim(opt.substr(eq + 1));
    if (name == "decrease") {
      p.require_decrease = true;
    } else if (name == "s") {
      const auto w = parse_real_list("s", value);
      if (static_cast<int>(w.size()) != m) throw ValidationError("prediction '" + text + "': s needs one weight per copy");
      for (int j = 0; j < m; ++j)
        if (w[static_cast<std::size_t>(j)] != 0.0) {
          p.flow_support.push_back(j);
          p.flow_weights.push_back(w[static_cast<std::size_t>(j)]);
        }
    } else if (name == "t") {
      p.times = parse_real_list("t", value);
    } else if (name == "f") {
      p.test_function = value;
    } else if (name == "expected") {
      p.expected = parse_real("expected", value);
    } else if (name == "radius") {
      p.radius = parse_real("radius", value);
    } else if (name == "at") {
      const auto xy = parse_real_list("at", value);
      if (xy.size() != 2) throw ValidationError("prediction '" + text + "': at needs x,y");
      p.x0 = xy[0];
      p.y0 = xy[1];
    } else if (name == "res") {
      p.resolution = parse_integer<int>("res", value);
    } else {
      throw ValidationError("prediction '" + text + "': unknown option '" + name + "'");
    }
  }
  if (!(p.tol >= 0.0)) throw ValidationError("prediction '" + text + "': negative tolerance");
  if (p.resolution < 2) throw ValidationError("prediction '" + text + "': resolution must be >= 2");
  if (p.kind == PredictionKind::flow_invariance && (p.flow_support.empty() || p.times.empty()))
    throw ValidationError("prediction '" + text + "': flow-invariance needs s= and t=");
  if (p.kind == PredictionKind::pairing && p.test_function.empty())
    throw ValidationError("prediction '" + text + "': pairing needs f=");
  if (p.kind == PredictionKind::line_z && p.copies.size() != 2)
    throw ValidationError("prediction '" + text + "': line-z needs two copies");
  return p;
}

std::vector<Prediction> parse_predictions(const std::string& text, int m)
{
  std::vector<Prediction> out;
  for (const auto& piece : split_list(text, ';')) out.push_back(parse_prediction(piece, m));
  return out;
}

}  // namespace heisfan
