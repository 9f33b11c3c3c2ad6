#include "heisfan/hermite.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "heisfan/error.hpp"

namespace heisfan {

namespace {

constexpr double kRescaleAbove = 1e150;
constexpr double kRescaleBy = 1e-150;
const double kLogRescale = std::log(kRescaleAbove);

}  // namespace

HermiteEvaluator::HermiteEvaluator(int max_degree) : max_degree_(max_degree)
{
  if (max_degree < 0) throw ValidationError("HermiteEvaluator: negative degree bound");
  // Two extra degrees feed the derivative formulas at the top degree.
  const int top = max_degree + 2;
  up_.resize(static_cast<std::size_t>(top) + 1);
  down_.resize(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) {
    up_[static_cast<std::size_t>(k)] = std::sqrt(2.0 / (k + 1.0));
    down_[static_cast<std::size_t>(k)] = std::sqrt(k / (k + 1.0));
  }
}

void HermiteEvaluator::check(int n) const
{
  if (n < 0 || n > max_degree_)
    throw ValidationError("Hermite degree " + std::to_string(n) + " outside [0, " + std::to_string(max_degree_) +
                          "]");
}

void HermiteEvaluator::values(int top, double x, std::vector<double>& out) const
{
  if (top < 0 || top > max_degree_ + 2) throw ValidationError("Hermite degree overflow");
  out.assign(static_cast<std::size_t>(top) + 1, 0.0);
  // p_k = h_k e^{x^2/2} * e^{-shift}; the shift absorbs growth of the polynomial part.
  const double gauss_log = -0.5 * x * x;
  double shift = 0.0;
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  out[0] = cur * std::exp(gauss_log);
  for (int k = 0; k < top; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double next = up_[uk] * x * cur - down_[uk] * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleBy;
      prev *= kRescaleBy;
      shift += kLogRescale;
    }
    out[uk + 1] = cur * std::exp(gauss_log + shift);
  }
}

double HermiteEvaluator::value(int n, double x) const
{
  check(n);
  std::vector<double> v;
  values(n, x, v);
  return v.back();
}

HermiteEvaluator::Jet HermiteEvaluator::jet(int n, double x) const
{
  check(n);
  std::vector<double> v;
  values(n + 2, x, v);
  const auto un = static_cast<std::size_t>(n);
  const double dn = n;
  const double below1 = n >= 1 ? v[un - 1] : 0.0;
  const double below2 = n >= 2 ? v[un - 2] : 0.0;
  Jet j;
  j.value = v[un];
  j.d1 = std::sqrt(dn / 2.0) * below1 - std::sqrt((dn + 1.0) / 2.0) * v[un + 1];
  // Ladder relation applied twice.
  j.d2 = 0.5 * std::sqrt(dn * (dn - 1.0)) * below2 - 0.5 * (2.0 * dn + 1.0) * v[un] +
         0.5 * std::sqrt((dn + 1.0) * (dn + 2.0)) * v[un + 2];
  return j;
}

const HermiteEvaluator& default_hermite()
{
  static const HermiteEvaluator evaluator(512);
  return evaluator;
}

double hermite(int n, double x) { return default_hermite().value(n, x); }

}  // namespace heisfan
