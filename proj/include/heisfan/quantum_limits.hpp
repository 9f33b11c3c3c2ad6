#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heisfan/quadrature.hpp"

namespace heisfan {

/// ∫ a |phi|^2 over the fundamental domain (real part; the dictionary is real).
double pair(const QuotientEigenfunction& phi, const TestFunction& a, const QuadratureOptions& opt = {});

/// Same, with the quadrature error estimate and convergence flag.
Integral pair_checked(const QuotientEigenfunction& phi, const TestFunction& a, const QuadratureOptions& opt = {});

/// ∫ a phi conj(psi).
Complex joint_pairing(const QuotientEigenfunction& phi, const QuotientEigenfunction& psi, const TestFunction& a,
                      const QuadratureOptions& opt = {});

/// Density of |phi|^2 on one or two coordinates, normalized to unit mass.
///
/// Copies without a selected axis are integrated out exactly; selected copies
/// are reduced in y by frequency matching and in x by Gauss-Legendre.
GridField base_marginal(const QuotientEigenfunction& phi, const std::vector<AxisSelector>& axes, int resolution,
                        const QuadratureOptions& opt = {});

struct FrequencyMass
{
  std::int64_t alpha = 0;
  double mass = 0.0;
};

/// Share of ‖phi‖^2 carried by each z-frequency of one copy (exact, from the labels).
std::vector<FrequencyMass> z_frequency_distribution(const QuotientEigenfunction& phi, int copy);

/// Mean |alpha_j| per copy under the z-frequency distribution, divided by its maximum.
struct DirectionEstimate
{
  std::vector<double> mean_abs_alpha;
  std::vector<double> direction;  ///< mean_abs_alpha / max
};
DirectionEstimate empirical_direction(const QuotientEigenfunction& phi);

/// max over the dictionary of |pair(phi, a∘flow(s, t)) - pair(phi, a)|.
double invariance_defect(const QuotientEigenfunction& phi, const SimplexPoint& s, double t,
                         const std::vector<TestFunction>& dictionary, const QuadratureOptions& opt = {});

/// Dictionary of low-frequency cos/sin functions for each copy and the
/// cos(z_i - z_j), cos(z_i + z_j) couplings.
std::vector<TestFunction> standard_dictionary(int m);

// ------------------------------------------------------------ predictions

enum class PredictionKind {
  concentration,   ///< (x,y) mass outside a disc around a point stays below tol (and decreases)
  uniform_z,       ///< z-marginal equals 1/(2pi) within tol
  uniform_xy,      ///< (x,y)-marginal equals 1/(2pi) within tol
  line_z,          ///< (z_i, z_j)-marginal is a function of z_i - z_j within tol
  flow_invariance, ///< invariance defect along s below tol for the listed times
  pairing,         ///< pair(phi, a) equals a value within tol
};

struct Prediction
{
  std::string name;
  PredictionKind kind = PredictionKind::uniform_z;
  std::vector<int> copies;              ///< copies the check looks at (0-based)
  double x0 = 0.0;
  double y0 = 0.0;
  double radius = 0.4;
  bool require_decrease = false;        ///< concentration only
  std::vector<int> flow_support;        ///< flow_invariance
  std::vector<double> flow_weights;
  std::vector<double> times;
  std::string test_function;            ///< pairing
  double expected = 0.0;
  double tol = 1e-8;
  int resolution = 96;
};

PredictionKind parse_prediction_kind(const std::string& text);
std::string to_string(PredictionKind kind);

struct Verdict
{
  std::string name;
  bool pass = false;
  double value = 0.0;       ///< measurement at the last k
  double tolerance = 0.0;
  std::string detail;
};

struct EmpiricalReport
{
  std::string sequence;
  std::vector<int> k;
  std::vector<double> eigenvalue;
  std::map<std::string, std::vector<double>> pairings;      ///< test function -> value per k
  std::map<std::string, std::vector<double>> measurements;  ///< prediction -> value per k
  std::map<std::string, std::vector<double>> defects;       ///< "s=...,t=..." -> value per k
  std::vector<Verdict> verdicts;
  bool quadrature_converged = true;

  bool all_pass() const;
};

/// Measures one prediction on one eigenfunction.
double measure_prediction(const QuotientEigenfunction& phi, const Prediction& p, const QuadratureOptions& opt = {});

using SequenceBuilder = std::function<QuotientEigenfunction(int k)>;

/// Runs the dictionary pairings, the flow defects and every prediction over the k ladder.
EmpiricalReport convergence_report(const std::string& sequence, const SequenceBuilder& builder,
                                   const std::vector<int>& ks, const std::vector<Prediction>& predictions,
                                   const std::vector<TestFunction>& dictionary,
                                   const std::vector<std::pair<SimplexPoint, double>>& flows = {},
                                   const QuadratureOptions& opt = {});

void write_report_json(std::ostream& os, const EmpiricalReport& report);
/// Flat CSV `k,kind,name,value` after the header lines.
void write_report_csv(std::ostream& os, const EmpiricalReport& report, const std::vector<std::string>& header = {});

}  // namespace heisfan
