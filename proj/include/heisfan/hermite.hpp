#pragma once

#include <vector>

namespace heisfan {

/// L^2(R)-orthonormal Hermite functions h_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)).
///
/// Values come from the normalized three-term recurrence run on the polynomial
/// factor with an exponent carried separately, so the Gaussian never underflows
/// before the polynomial has been formed.
class HermiteEvaluator
{
 public:
  explicit HermiteEvaluator(int max_degree = 128);

  int max_degree() const { return max_degree_; }

  double value(int n, double x) const;

  struct Jet
  {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };
  /// h_n and its first two derivatives from the ladder relations
  /// h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}.
  Jet jet(int n, double x) const;

  /// h_0(x), ..., h_top(x) into out (resized to top+1).
  void values(int top, double x, std::vector<double>& out) const;

 private:
  void check(int n) const;

  int max_degree_;
  std::vector<double> up_;    // sqrt(2/(k+1))
  std::vector<double> down_;  // sqrt(k/(k+1))
};

/// Shared evaluator with the default degree bound.
const HermiteEvaluator& default_hermite();

/// h_n(x) through default_hermite().
double hermite(int n, double x);

}  // namespace heisfan
