#include "heisfan/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heisfan/error.hpp"

namespace heisfan {

namespace {

void validate_support(int m, const std::vector<int>& support, std::size_t levels, std::size_t direction,
                      const char* what)
{
  if (m < 1 || m > 64) throw ValidationError(std::string(what) + ": m must be in [1, 64]");
  if (support.empty()) throw ValidationError(std::string(what) + ": J must be nonempty");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= m) throw ValidationError(std::string(what) + ": J exceeds m");
    if (i && support[i] <= support[i - 1]) throw ValidationError(std::string(what) + ": J must be increasing");
  }
  if (levels != support.size()) throw ValidationError(std::string(what) + ": one level per copy of J");
  if (direction != support.size()) throw ValidationError(std::string(what) + ": one direction entry per copy of J");
}

double scale_of(AlphaScale scale, int k)
{
  const double dk = k;
  return scale == AlphaScale::square ? dk * dk : dk;
}

std::vector<std::int64_t> natural_alpha(const std::vector<double>& direction, AlphaScale scale, int k)
{
  double smallest = std::abs(direction.front());
  for (double p : direction) smallest = std::min(smallest, std::abs(p));
  std::vector<std::int64_t> alpha;
  for (double p : direction) {
    auto a = static_cast<std::int64_t>(std::llround(scale_of(scale, k) * std::abs(p) / smallest));
    a = std::max<std::int64_t>(a, 1);
    alpha.push_back(p < 0 ? -a : a);
  }
  return alpha;
}

std::int64_t eigenvalue_of_alpha(const std::vector<int>& levels, const std::vector<std::int64_t>& alpha)
{
  std::int64_t e = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) e += (2 * levels[i] + 1) * std::abs(alpha[i]);
  return e;
}

Term tensor_term(int m, const std::vector<int>& support, const std::vector<int>& levels,
                 const std::vector<std::int64_t>& alpha, double x0, double y0, bool localized, Complex coefficient)
{
  Term t;
  t.coefficient = coefficient;
  t.copies.assign(static_cast<std::size_t>(m), CopyMode::basis(BranchLabel::constant()));
  for (std::size_t i = 0; i < support.size(); ++i) {
    auto& c = t.copies[static_cast<std::size_t>(support[i])];
    c = localized ? localized_copy(levels[i], alpha[i], x0, y0) : CopyMode::basis(BranchLabel::landau(levels[i], alpha[i]));
  }
  return t;
}

void check_k(int k)
{
  if (k < 1) throw ValidationError("sequence index k must be >= 1");
}

}  // namespace

void TensorSequence::validate() const
{
  validate_support(m, support, levels.size(), direction.size(), "TensorSequence");
  for (int n : levels)
    if (n < 0) throw ValidationError("TensorSequence: negative level");
  for (double p : direction)
    if (p == 0.0 || !std::isfinite(p)) throw ValidationError("TensorSequence: direction must be nonzero on J");
}

std::vector<std::int64_t> sequence_alpha(const TensorSequence& seq, int k)
{
  seq.validate();
  check_k(k);
  return natural_alpha(seq.direction, seq.scale, k);
}

QuotientEigenfunction seq_tensor(const TensorSequence& seq, int k)
{
  const auto alpha = sequence_alpha(seq, k);
  return QuotientEigenfunction(
      {tensor_term(seq.m, seq.support, seq.levels, alpha, seq.x0, seq.y0, seq.localized, Complex(1.0, 0.0))});
}

void ConverseTarget::validate() const
{
  if (components.empty()) throw ValidationError("ConverseTarget: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.points.empty()) throw ValidationError("ConverseTarget: component without points");
    validate_support(m, c.support, c.levels.size(), c.support.size(), "ConverseTarget");
    for (int n : c.levels)
      if (n < 0) throw ValidationError("ConverseTarget: negative level");
    if (!(c.weight >= 0.0)) throw ValidationError("ConverseTarget: negative weight");
    for (const auto& p : c.points) {
      if (p.direction.size() != c.support.size())
        throw ValidationError("ConverseTarget: point direction must have one entry per copy of J");
      for (double v : p.direction)
        if (v == 0.0 || !std::isfinite(v)) throw ValidationError("ConverseTarget: direction must be nonzero on J");
      if (!p.alpha_shift.empty() && p.alpha_shift.size() != c.support.size())
        throw ValidationError("ConverseTarget: alpha_shift must have one entry per copy of J");
      if (!(p.beta >= 0.0)) throw ValidationError("ConverseTarget: negative beta");
      total += c.weight * p.beta;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "ConverseTarget: weights times betas sum to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
  if (search_radius < 0 || max_eigen_steps < 0) throw ValidationError("ConverseTarget: negative search bounds");
}

ConverseAlignment align_converse(const ConverseTarget& target, int k)
{
  target.validate();
  check_k(k);
  ConverseAlignment out;
  std::int64_t top = 0;
  std::vector<std::vector<std::vector<std::int64_t>>> natural;
  for (const auto& c : target.components) {
    auto& per_point = natural.emplace_back();
    for (const auto& p : c.points) {
      auto alpha = natural_alpha(p.direction, target.scale, k);
      for (std::size_t i = 0; i < p.alpha_shift.size(); ++i) {
        const std::int64_t shifted = alpha[i] + p.alpha_shift[i];
        if (shifted == 0) throw ValidationError("ConverseTarget: alpha_shift produces alpha = 0");
        alpha[i] = shifted;
      }
      top = std::max(top, eigenvalue_of_alpha(c.levels, alpha));
      per_point.push_back(std::move(alpha));
    }
  }
  for (int step = 0; step <= target.max_eigen_steps; ++step) {
    const std::int64_t e = top + step;
    bool ok = true;
    auto chosen = natural;
    for (std::size_t ci = 0; ci < target.components.size() && ok; ++ci) {
      const auto& c = target.components[ci];
      std::vector<std::int64_t> odd;
      for (int n : c.levels) odd.push_back(2 * n + 1);
      for (std::size_t pi = 0; pi < c.points.size() && ok; ++pi) {
        auto& alpha = chosen[ci][pi];
        if (eigenvalue_of_alpha(c.levels, alpha) == e) continue;
        auto found = nearest_alpha_with_eigenvalue(odd, c.points[pi].direction, e, target.search_radius);
        if (!found) {
          ok = false;
          break;
        }
        alpha = *found;
      }
    }
    if (ok) {
      out.eigenvalue = e;
      out.alpha = std::move(chosen);
      return out;
    }
  }
  std::ostringstream os;
  os << "no common eigenvalue found in [" << top << ", " << top + target.max_eigen_steps << "] for k = " << k;
  throw AlignmentError(os.str());
}

QuotientEigenfunction seq_converse(const ConverseTarget& target, int k)
{
  const auto alignment = align_converse(target, k);
  std::vector<Term> terms;
  for (std::size_t ci = 0; ci < target.components.size(); ++ci) {
    const auto& c = target.components[ci];
    for (std::size_t pi = 0; pi < c.points.size(); ++pi) {
      const auto& p = c.points[pi];
      const double coef = std::sqrt(c.weight * p.beta);
      if (coef == 0.0) continue;
      terms.push_back(tensor_term(target.m, c.support, c.levels, alignment.alpha[ci][pi], p.x0, p.y0, true,
                                  Complex(coef, 0.0)));
    }
  }
  return QuotientEigenfunction(std::move(terms));
}

ConverseTarget converse_preset(const std::string& name)
{
  ConverseTarget t;
  if (name == "diagonal") {
    t.m = 2;
    ConverseComponent c;
    c.support = {0, 1};
    c.levels = {0, 0};
    c.weight = 1.0;
    c.points.push_back({0.0, 0.0, {1.0, 1.0}, 0.5, {}});
    c.points.push_back({0.0, 0.0, {1.0, 1.0}, 0.5, {-1, 1}});
    t.components.push_back(c);
    return t;
  }
  if (name == "two-s") {
    t.m = 2;
    ConverseComponent even;
    even.support = {0, 1};
    even.levels = {0, 0};
    even.weight = 0.36;
    even.points.push_back({0.0, 0.0, {1.0, 1.0}, 1.0, {}});
    ConverseComponent skew;
    skew.support = {0, 1};
    skew.levels = {0, 1};
    skew.weight = 0.64;
    skew.points.push_back({0.0, 0.0, {1.0, 1.0}, 1.0, {}});
    t.components = {even, skew};
    return t;
  }
  if (name == "localized") {
    t.m = 1;
    t.scale = AlphaScale::square;
    ConverseComponent c;
    c.support = {0};
    c.levels = {0};
    c.points.push_back({0.0, 0.0, {1.0}, 1.0, {}});
    t.components.push_back(c);
    return t;
  }
  throw ValidationError("unknown preset '" + name + "'");
}

std::vector<std::string> converse_preset_names() { return {"diagonal", "localized", "two-s"}; }

TensorSequence tensor_preset(const std::string& name)
{
  TensorSequence s;
  if (name == "localized") {
    s.m = 1;
    s.support = {0};
    s.levels = {0};
    s.direction = {1.0};
    s.scale = AlphaScale::square;
  } else if (name == "diagonal-single") {
    s.m = 2;
    s.support = {0, 1};
    s.levels = {0, 0};
    s.direction = {1.0, 1.0};
  } else if (name == "ratio-1-2") {
    s.m = 2;
    s.support = {0, 1};
    s.levels = {0, 0};
    s.direction = {1.0, 2.0};
  } else {
    throw ValidationError("unknown tensor preset '" + name + "'");
  }
  return s;
}

}  // namespace heisfan
