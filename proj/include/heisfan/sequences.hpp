#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heisfan/eigenfunctions.hpp"

namespace heisfan {

enum class AlphaScale { linear, square };

/// Tensor sequence: a coherent Landau state on each copy of J, constants elsewhere.
struct TensorSequence
{
  int m = 1;
  std::vector<int> support;        ///< J, 0-based and increasing
  std::vector<int> levels;         ///< n_j for j in J
  std::vector<double> direction;   ///< p_z ratios on J (signs carried into alpha)
  AlphaScale scale = AlphaScale::linear;
  double x0 = 0.0;                 ///< centre of every coherent state
  double y0 = 0.0;
  bool localized = true;           ///< false: Zak sector 0 instead of a coherent state

  void validate() const;
};

/// alpha_j = round(scale(k) p_j / min_i |p_i|) with the sign of p_j; scale(k) = k or k^2.
std::vector<std::int64_t> sequence_alpha(const TensorSequence& seq, int k);

/// The k-th member: eigenvalue sum_j (2 n_j + 1) |alpha_j|.
QuotientEigenfunction seq_tensor(const TensorSequence& seq, int k);

/// One (q, p, beta) entry of a mixture component.
struct ConversePoint
{
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> direction;            ///< p_z ratios on the component's J
  double beta = 1.0;
  std::vector<std::int64_t> alpha_shift;    ///< added to the natural alpha (may be empty)
};

struct ConverseComponent
{
  std::vector<int> support;   ///< J, 0-based
  std::vector<int> levels;    ///< n_j on J; fixes the simplex point s
  double weight = 1.0;
  std::vector<ConversePoint> points;
};

struct ConverseTarget
{
  int m = 1;
  std::vector<ConverseComponent> components;
  AlphaScale scale = AlphaScale::linear;
  int search_radius = 3;      ///< alpha search box around the natural ray
  int max_eigen_steps = 256;  ///< how far above the largest natural eigenvalue to look

  void validate() const;
};

/// Integer alpha and the common eigenvalue chosen for every point of the target.
struct ConverseAlignment
{
  std::int64_t eigenvalue = 0;
  std::vector<std::vector<std::vector<std::int64_t>>> alpha;  ///< [component][point][copy in J]
};

/// Lifts every point to a common eigenvalue. Points whose natural eigenvalue
/// already equals the largest one keep their alpha; the rest move to the nearest
/// alpha on the same eigenvalue. Throws AlignmentError when nothing is found.
ConverseAlignment align_converse(const ConverseTarget& target, int k);

/// Mixture of coherent tensor states with coefficients sqrt(weight * beta), all
/// at one eigenvalue.
QuotientEigenfunction seq_converse(const ConverseTarget& target, int k);

/// Named targets used by the CLI and the tests:
///   "diagonal"  m=2, n=(0,0), alpha=(k,k) and (k-1,k+1), halves each;
///   "two-s"     m=2, s=(1/2,1/2) weight 0.36 and s=(1/4,3/4) weight 0.64, p=(1:1);
///   "localized" m=1, n=0, one point at the origin.
ConverseTarget converse_preset(const std::string& name);
std::vector<std::string> converse_preset_names();

/// Named tensor sequences: "localized" (m=1, alpha=k^2), "diagonal-single" (m=2, alpha=(k,k)),
/// "ratio-1-2" (m=2, alpha=(k,2k)).
TensorSequence tensor_preset(const std::string& name);

}  // namespace heisfan
