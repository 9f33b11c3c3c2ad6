#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heisfan/quantum_limits.hpp"

namespace heisfan {

/// Resolved settings of one CLI run.
///
/// Stored on disk as a flat INI file with the sections [run], [spectrum],
/// [sequence], [analysis] and [tolerances]. Unset optionals are written as
/// empty values, so parse(serialize(c)) == c for every config.
struct ExperimentConfig
{
  // [run]
  std::string command;
  std::string out = "-";
  std::string format;   ///< csv or json; empty picks from the extension of out
  int threads = 0;      ///< 0 = hardware concurrency; never written to output headers

  // [spectrum]
  int m = 1;
  double lambda = 100.0;
  std::string method = "direct";      ///< direct | arithmetic | sumset
  std::uint64_t max_labels = 20'000'000;
  int d = 1;                          ///< H-type dimension parameter
  std::vector<double> beta{1.0};
  std::string label;                  ///< joint label for eigen-eval, e.g. L(0,3)|F(1,0)
  std::vector<int> sectors;           ///< Zak sector per copy (default 0)
  std::string lambda_pair;            ///< exact eigenvalue for split, e.g. 1+2pi

  // [sequence]
  std::string preset;
  std::string kind;                   ///< tensor | converse; empty follows the preset
  std::vector<int> support;           ///< 1-based copies of J
  std::vector<int> levels;
  std::vector<double> direction;
  std::string scale = "linear";       ///< linear | square
  double x0 = 0.0;
  double y0 = 0.0;
  std::string mixture;                ///< weight:J:levels:direction[:shift] entries joined by ';'
  std::vector<int> k{3, 4, 5, 6, 7, 8, 9, 10};

  // [analysis]
  int depth = 6;
  double tau = 0.1;
  std::string split_rule = "ratio";   ///< ratio | elliptic-gate
  std::vector<std::string> axes;      ///< e.g. x1,y1
  int resolution = 96;
  double radius = 0.4;
  std::vector<double> flow;           ///< s weight per copy (zeros leave the support)
  std::vector<double> times;
  std::string at;                     ///< base point "x,y,z;x,y,z" for eigen-eval
  std::string dictionary;             ///< test functions joined by ';'; empty = standard dictionary
  std::string predictions;            ///< prediction specs joined by ';'; empty = preset defaults
  std::optional<double> expect_below; ///< ql-invariance: final defect must stay below
  std::optional<double> expect_above; ///< ql-invariance: final defect must exceed

  // [tolerances]
  double richardson = 1e-6;
  int nodes_per_panel = 16;
  int panel_scale = 1;
  double orthogonality = 1e-10;

  QuadratureOptions quadrature() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Range checks on every field that does not depend on the command.
void validate_config(const ExperimentConfig& cfg);

/// Every (section, key) pair in file order.
struct ConfigKey
{
  std::string section;
  std::string key;
};
const std::vector<ConfigKey>& config_keys();

/// Reads key = value text into cfg; keys absent from the text keep their values.
/// Returns the keys the text assigned.
std::vector<std::string> parse_config(const std::string& text, ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// INI text of the whole config (threads included unless for_header).
std::string serialize_config(const ExperimentConfig& cfg, bool for_header = false);

/// Value of one key as it would be serialized.
std::string config_value(const ExperimentConfig& cfg, const std::string& key);
/// Assigns one key from its text form; throws ValidationError on bad values or unknown keys.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Output header: the tool version line followed by the resolved config.
std::vector<std::string> header_lines(const ExperimentConfig& cfg);
/// The resolved config as a JSON object of sections.
void write_config_json(std::ostream& os, const ExperimentConfig& cfg, int indent = 2);

/// Parses "3..10", "3,5,8" or "3..9:2" into the ladder; rejects empty or non-positive values.
std::vector<int> parse_k_ladder(const std::string& text);
/// Shortest text form that parses back to the same ladder.
std::string format_k_ladder(const std::vector<int>& ks);

/// Parses `kind:copies:tol[:option...]` where copies are 1-based and options are
/// `decrease`, `s=w1,w2,...`, `t=t1,t2,...`, `f=<test function>`, `expected=v`,
/// `radius=r`, `at=x,y` and `res=n`.
Prediction parse_prediction(const std::string& text, int m);
std::vector<Prediction> parse_predictions(const std::string& text, int m);

/// Splits on a separator and trims whitespace; empty pieces are dropped.
std::vector<std::string> split_list(const std::string& text, char sep);

/// Number in plain form or as a multiple of pi ("pi/4", "3pi/2", "2*pi").
double parse_number(const std::string& text);
/// Comma-separated lists of the above, or of integers.
std::vector<double> parse_numbers(const std::string& text);
std::vector<int> parse_integers(const std::string& text);

}  // namespace heisfan
