#include "heisfan/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "heisfan/error.hpp"

namespace heisfan {

// ---------------------------------------------------------------- EigenKey

double EigenKey::value() const
{
  return static_cast<double>(integer_part) + kTwoPi * static_cast<double>(two_pi_part);
}

std::string EigenKey::to_string() const
{
  std::ostringstream os;
  if (two_pi_part == 0) {
    os << integer_part;
    return os.str();
  }
  if (integer_part != 0) os << integer_part << '+';
  if (two_pi_part != 1) os << two_pi_part << '*';
  os << "2pi";
  return os.str();
}

EigenKey EigenKey::parse(const std::string& text)
{
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty()) throw ValidationError("empty eigenvalue key");
  auto parse_int = [&](const std::string& part) -> std::int64_t {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(part, &used);
    } catch (const std::exception&) {
      throw ValidationError("malformed eigenvalue key '" + text + "'");
    }
    if (used != part.size()) throw ValidationError("malformed eigenvalue key '" + text + "'");
    return v;
  };
  EigenKey key;
  const auto pi_pos = s.find("2pi");
  if (pi_pos == std::string::npos) {
    key.integer_part = parse_int(s);
    return key;
  }
  if (pi_pos + 3 != s.size()) throw ValidationError("malformed eigenvalue key '" + text + "'");
  std::string head = s.substr(0, pi_pos);  // "", "a+", "b*", "a+b*"
  std::string coeff;
  const auto plus = head.find('+');
  if (plus != std::string::npos) {
    key.integer_part = parse_int(head.substr(0, plus));
    coeff = head.substr(plus + 1);
  } else {
    coeff = head;
  }
  if (coeff.empty()) {
    key.two_pi_part = 1;
  } else {
    if (coeff.back() != '*') throw ValidationError("malformed eigenvalue key '" + text + "'");
    coeff.pop_back();
    key.two_pi_part = parse_int(coeff);
  }
  return key;
}

bool value_less(const EigenKey& a, const EigenKey& b)
{
  const double va = a.value();
  const double vb = b.value();
  if (va != vb) return va < vb;
  return a < b;
}

namespace {

struct ValueLess
{
  bool operator()(const EigenKey& a, const EigenKey& b) const { return value_less(a, b); }
};

}  // namespace

// ------------------------------------------------------------- BranchLabel

BranchLabel BranchLabel::landau(int n, std::int64_t alpha)
{
  if (n < 0) throw ValidationError("Landau level must be nonnegative");
  if (alpha == 0) throw ValidationError("Landau branch requires alpha != 0");
  return BranchLabel(Kind::landau, n, alpha);
}

BranchLabel BranchLabel::fourier(std::int64_t k, std::int64_t l)
{
  return BranchLabel(Kind::fourier, k, l);
}

int BranchLabel::level() const
{
  if (!is_landau()) throw ValidationError("level() on a Fourier label");
  return static_cast<int>(a_);
}

std::int64_t BranchLabel::alpha() const { return is_landau() ? b_ : 0; }

std::int64_t BranchLabel::k() const
{
  if (is_landau()) throw ValidationError("k() on a Landau label");
  return a_;
}

std::int64_t BranchLabel::l() const
{
  if (is_landau()) throw ValidationError("l() on a Landau label");
  return b_;
}

std::int64_t BranchLabel::odd() const { return is_landau() ? 2 * a_ + 1 : 0; }

EigenKey BranchLabel::key() const
{
  if (is_landau()) return {(2 * a_ + 1) * std::abs(b_), 0};
  return {0, a_ * a_ + b_ * b_};
}

std::uint64_t BranchLabel::weight() const
{
  return is_landau() ? static_cast<std::uint64_t>(std::abs(b_)) : 1u;
}

std::string BranchLabel::to_string() const
{
  std::ostringstream os;
  os << (is_landau() ? "L(" : "F(") << a_ << ',' << b_ << ')';
  return os.str();
}

BranchLabel BranchLabel::parse(const std::string& text)
{
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.size() < 6 || (s[0] != 'L' && s[0] != 'F') || s[1] != '(' || s.back() != ')')
    throw ValidationError("malformed branch label '" + text + "'");
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ValidationError("malformed branch label '" + text + "'");
  std::int64_t a = 0;
  std::int64_t b = 0;
  try {
    std::size_t used = 0;
    const std::string first = s.substr(2, comma - 2);
    a = std::stoll(first, &used);
    if (used != first.size()) throw ValidationError("bad");
    const std::string second = s.substr(comma + 1, s.size() - comma - 2);
    b = std::stoll(second, &used);
    if (used != second.size()) throw ValidationError("bad");
  } catch (const std::exception&) {
    throw ValidationError("malformed branch label '" + text + "'");
  }
  if (s[0] == 'L') {
    if (a > std::numeric_limits<int>::max()) throw ValidationError("Landau level too large");
    return landau(static_cast<int>(a), b);
  }
  return fourier(a, b);
}

// -------------------------------------------------------------- JointLabel

JointLabel::JointLabel(std::vector<BranchLabel> branches) : branches_(std::move(branches))
{
  if (branches_.empty()) throw ValidationError("JointLabel needs at least one copy");
  if (branches_.size() > 64) throw ValidationError("JointLabel supports at most 64 copies");
  for (std::size_t j = 0; j < branches_.size(); ++j) {
    key_ = key_ + branches_[j].key();
    if (branches_[j].is_landau()) support_.insert(static_cast<int>(j));
  }
}

std::uint64_t JointLabel::weight() const
{
  std::uint64_t w = 1;
  for (const auto& b : branches_) w *= b.weight();
  return w;
}

std::string JointLabel::to_string() const
{
  std::string out;
  for (std::size_t j = 0; j < branches_.size(); ++j) {
    if (j) out += '|';
    out += branches_[j].to_string();
  }
  return out;
}

JointLabel JointLabel::parse(const std::string& text)
{
  std::vector<BranchLabel> branches;
  std::size_t start = 0;
  while (true) {
    const auto bar = text.find('|', start);
    branches.push_back(BranchLabel::parse(text.substr(start, bar - start)));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return JointLabel(std::move(branches));
}

double eigenvalue_of(const JointLabel& label) { return label.eigenvalue(); }

// ----------------------------------------------------------- SpectrumTable

std::uint64_t SpectrumTable::total_multiplicity() const
{
  std::uint64_t t = 0;
  for (const auto& e : entries) t += e.multiplicity;
  return t;
}

std::size_t SpectrumTable::label_count() const
{
  std::size_t t = 0;
  for (const auto& e : entries) t += e.labels.size();
  return t;
}

const SpectrumEntry* SpectrumTable::find(const EigenKey& key) const
{
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const SpectrumEntry& e, const EigenKey& k) { return value_less(e.key, k); });
  if (it == entries.end() || it->key != key) return nullptr;
  return &*it;
}

namespace {

void require_cutoff(double cutoff)
{
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw ValidationError("cutoff must be positive and finite");
}

SpectrumTable table_from_groups(double cutoff, std::map<EigenKey, std::vector<JointLabel>, ValueLess>& groups)
{
  SpectrumTable table;
  table.cutoff = cutoff;
  table.entries.reserve(groups.size());
  for (auto& [key, labels] : groups) {
    std::sort(labels.begin(), labels.end());
    SpectrumEntry entry;
    entry.key = key;
    entry.eigenvalue = key.value();
    for (const auto& l : labels) entry.multiplicity += l.weight();
    entry.labels = std::move(labels);
    table.entries.push_back(std::move(entry));
  }
  return table;
}

// Every single-copy label with eigenvalue <= cutoff, sorted by (value, label).
std::vector<BranchLabel> single_copy_labels(double cutoff)
{
  std::vector<BranchLabel> out;
  const auto max_alpha = static_cast<std::int64_t>(std::floor(cutoff));
  for (std::int64_t a = 1; a <= max_alpha; ++a) {
    for (std::int64_t odd = 1; odd * a <= max_alpha; odd += 2) {
      const int n = static_cast<int>((odd - 1) / 2);
      out.push_back(BranchLabel::landau(n, a));
      out.push_back(BranchLabel::landau(n, -a));
    }
  }
  const auto kmax = static_cast<std::int64_t>(std::floor(std::sqrt(cutoff / kTwoPi))) + 1;
  for (std::int64_t k = -kmax; k <= kmax; ++k)
    for (std::int64_t l = -kmax; l <= kmax; ++l) {
      auto b = BranchLabel::fourier(k, l);
      if (b.key().value() <= cutoff) out.push_back(b);
    }
  std::sort(out.begin(), out.end(), [](const BranchLabel& a, const BranchLabel& b) {
    const auto ka = a.key();
    const auto kb = b.key();
    if (ka != kb) return value_less(ka, kb);
    return a < b;
  });
  return out;
}

}  // namespace

SpectrumTable enumerate_h1(double cutoff)
{
  require_cutoff(cutoff);
  std::map<EigenKey, std::vector<JointLabel>, ValueLess> groups;
  for (const auto& b : single_copy_labels(cutoff)) groups[b.key()].push_back(JointLabel({b}));
  return table_from_groups(cutoff, groups);
}

namespace {

// Jacobi: r_2(F) = 4 (d_1(F) - d_3(F)) for F >= 1.
std::uint64_t sum_of_two_squares_count(std::int64_t f)
{
  if (f == 0) return 1;
  std::int64_t d1 = 0;
  std::int64_t d3 = 0;
  for (std::int64_t d = 1; d * d <= f; ++d) {
    if (f % d) continue;
    for (std::int64_t e : {d, f / d}) {
      if (e % 4 == 1) ++d1;
      if (e % 4 == 3) ++d3;
    }
    if (d * d == f) {  // counted twice above
      if (d % 4 == 1) --d1;
      if (d % 4 == 3) --d3;
    }
  }
  return static_cast<std::uint64_t>(4 * (d1 - d3));
}

bool is_square(std::int64_t v, std::int64_t& root)
{
  if (v < 0) return false;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  root = r;
  return r * r == v;
}

std::vector<BranchLabel> fourier_labels_with_norm(std::int64_t f)
{
  std::vector<BranchLabel> out;
  std::int64_t kmax = 0;
  is_square(f, kmax);
  for (std::int64_t k = -kmax; k <= kmax; ++k) {
    std::int64_t l = 0;
    if (!is_square(f - k * k, l)) continue;
    out.push_back(BranchLabel::fourier(k, l));
    if (l != 0) out.push_back(BranchLabel::fourier(k, -l));
  }
  return out;
}

std::vector<BranchLabel> landau_labels_with_value(std::int64_t value)
{
  std::vector<BranchLabel> out;
  for (std::int64_t d = 1; d <= value; d += 2) {
    if (value % d) continue;
    const int n = static_cast<int>((d - 1) / 2);
    out.push_back(BranchLabel::landau(n, value / d));
    out.push_back(BranchLabel::landau(n, -(value / d)));
  }
  return out;
}

}  // namespace

SpectrumTable enumerate_h1_arithmetic(double cutoff)
{
  require_cutoff(cutoff);
  SpectrumTable table;
  table.cutoff = cutoff;
  std::vector<SpectrumEntry> raw;
  const auto max_n = static_cast<std::int64_t>(std::floor(cutoff));
  for (std::int64_t value = 1; value <= max_n; ++value) {
    SpectrumEntry e;
    e.key = {value, 0};
    e.eigenvalue = e.key.value();
    for (std::int64_t d = 1; d <= value; d += 2)
      if (value % d == 0) e.multiplicity += 2 * static_cast<std::uint64_t>(value / d);
    for (const auto& b : landau_labels_with_value(value)) e.labels.push_back(JointLabel({b}));
    if (!e.labels.empty()) raw.push_back(std::move(e));
  }
  for (std::int64_t f = 0; kTwoPi * static_cast<double>(f) <= cutoff; ++f) {
    const std::uint64_t r2 = sum_of_two_squares_count(f);
    if (r2 == 0) continue;
    SpectrumEntry e;
    e.key = {0, f};
    e.eigenvalue = e.key.value();
    e.multiplicity = r2;
    for (const auto& b : fourier_labels_with_norm(f)) e.labels.push_back(JointLabel({b}));
    raw.push_back(std::move(e));
  }
  std::sort(raw.begin(), raw.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return value_less(a.key, b.key);
  });
  for (auto& e : raw) std::sort(e.labels.begin(), e.labels.end());
  table.entries = std::move(raw);
  return table;
}

// -------------------------------------------------------- JointLabelStream

struct JointLabelStream::Impl
{
  struct Node
  {
    EigenKey sum;
    std::vector<std::uint32_t> index;
    int pivot = 0;
  };
  struct Later
  {
    bool operator()(const Node& a, const Node& b) const
    {
      if (a.sum != b.sum) return value_less(b.sum, a.sum);
      return b.index < a.index;
    }
  };

  int m = 1;
  double cutoff = 0.0;
  std::vector<BranchLabel> base;
  std::priority_queue<Node, std::vector<Node>, Later> heap;

  void push_if_within(Node node)
  {
    if (node.sum.value() <= cutoff) heap.push(std::move(node));
  }
};

JointLabelStream::JointLabelStream(int m, double cutoff) : impl_(std::make_unique<Impl>())
{
  if (m < 1 || m > 64) throw ValidationError("m must be in [1, 64]");
  require_cutoff(cutoff);
  impl_->m = m;
  impl_->cutoff = cutoff;
  impl_->base = single_copy_labels(cutoff);
  Impl::Node root;
  root.index.assign(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m; ++j) root.sum = root.sum + impl_->base[0].key();
  impl_->push_if_within(std::move(root));
}

JointLabelStream::~JointLabelStream() = default;
JointLabelStream::JointLabelStream(JointLabelStream&&) noexcept = default;
JointLabelStream& JointLabelStream::operator=(JointLabelStream&&) noexcept = default;

// Each tuple is generated once: its parent is obtained by decrementing its last
// nonzero position, and children only advance positions at or after that one.
std::optional<JointLabel> JointLabelStream::next()
{
  auto& s = *impl_;
  if (s.heap.empty()) return std::nullopt;
  Impl::Node node = s.heap.top();
  s.heap.pop();
  for (int q = node.pivot; q < s.m; ++q) {
    const auto pos = static_cast<std::size_t>(q);
    if (node.index[pos] + 1 >= s.base.size()) continue;
    Impl::Node child = node;
    child.sum = EigenKey{child.sum.integer_part - s.base[child.index[pos]].key().integer_part,
                         child.sum.two_pi_part - s.base[child.index[pos]].key().two_pi_part};
    ++child.index[pos];
    child.sum = child.sum + s.base[child.index[pos]].key();
    child.pivot = q;
    s.push_if_within(std::move(child));
  }
  std::vector<BranchLabel> branches;
  branches.reserve(node.index.size());
  for (auto i : node.index) branches.push_back(s.base[i]);
  return JointLabel(std::move(branches));
}

// --------------------------------------------------------------- sumsets

namespace {

struct KeyMass
{
  std::uint64_t multiplicity = 0;
  std::uint64_t labels = 0;
};

std::map<EigenKey, KeyMass, ValueLess> single_copy_masses(double cutoff)
{
  std::map<EigenKey, KeyMass, ValueLess> out;
  for (const auto& b : single_copy_labels(cutoff)) {
    auto& km = out[b.key()];
    km.multiplicity += b.weight();
    km.labels += 1;
  }
  return out;
}

}  // namespace

std::vector<SumsetEntry> sumset_multiplicities(int m, double cutoff)
{
  if (m < 1) throw ValidationError("m must be >= 1");
  require_cutoff(cutoff);
  const auto single = single_copy_masses(cutoff);
  auto current = single;
  for (int j = 1; j < m; ++j) {
    std::map<EigenKey, KeyMass, ValueLess> next;
    for (const auto& [ka, va] : current)
      for (const auto& [kb, vb] : single) {
        const EigenKey k = ka + kb;
        if (k.value() > cutoff) break;  // single is sorted by value
        auto& slot = next[k];
        slot.multiplicity += va.multiplicity * vb.multiplicity;
        slot.labels += va.labels * vb.labels;
      }
    current = std::move(next);
  }
  std::vector<SumsetEntry> out;
  out.reserve(current.size());
  for (const auto& [k, v] : current) out.push_back({k, v.multiplicity, v.labels});
  return out;
}

std::uint64_t count_joint_labels(int m, double cutoff)
{
  std::uint64_t total = 0;
  for (const auto& e : sumset_multiplicities(m, cutoff)) total += e.label_count;
  return total;
}

SpectrumTable enumerate_hm(int m, double cutoff, const EnumerationOptions& options)
{
  const std::uint64_t expected = count_joint_labels(m, cutoff);
  if (expected > options.max_labels) {
    std::ostringstream os;
    os << "enumerate_hm: " << expected << " joint labels exceed the bound " << options.max_labels
       << "; lower the cutoff";
    throw CapacityError(os.str());
  }
  SpectrumTable table;
  table.cutoff = cutoff;
  JointLabelStream stream(m, cutoff);
  while (auto label = stream.next()) {
    if (table.entries.empty() || table.entries.back().key != label->key()) {
      SpectrumEntry e;
      e.key = label->key();
      e.eigenvalue = e.key.value();
      table.entries.push_back(std::move(e));
    }
    auto& e = table.entries.back();
    e.multiplicity += label->weight();
    e.labels.push_back(std::move(*label));
  }
  for (auto& e : table.entries) std::sort(e.labels.begin(), e.labels.end());
  return table;
}

double density_fraction(int m, double cutoff)
{
  if (m < 1) throw ValidationError("m must be >= 1");
  require_cutoff(cutoff);
  struct Split
  {
    std::uint64_t full = 0;     // every copy Landau
    std::uint64_t partial = 0;  // at least one Fourier copy
  };
  std::map<EigenKey, Split, ValueLess> single;
  for (const auto& b : single_copy_labels(cutoff)) {
    auto& s = single[b.key()];
    (b.is_landau() ? s.full : s.partial) += b.weight();
  }
  auto current = single;
  for (int j = 1; j < m; ++j) {
    std::map<EigenKey, Split, ValueLess> next;
    for (const auto& [ka, va] : current)
      for (const auto& [kb, vb] : single) {
        const EigenKey k = ka + kb;
        if (k.value() > cutoff) break;
        auto& slot = next[k];
        slot.full += va.full * vb.full;
        slot.partial += va.full * vb.partial + va.partial * (vb.full + vb.partial);
      }
    current = std::move(next);
  }
  std::uint64_t numerator = 0;
  std::uint64_t total = 0;
  for (const auto& [k, s] : current) {
    total += s.full + s.partial;
    if (s.partial == 0) numerator += s.full;
  }
  return total == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(total);
}

// ------------------------------------------------------------------- fan

FanPoint fan_point(const JointLabel& label)
{
  FanPoint p;
  p.eigenvalue = label.eigenvalue();
  for (const auto& b : label.branches()) {
    p.abs_alpha.push_back(std::abs(b.alpha()));
    p.odd.push_back(b.odd());
  }
  return p;
}

std::vector<FanPoint> fan_points(int m, double cutoff)
{
  std::vector<FanPoint> out;
  JointLabelStream stream(m, cutoff);
  while (auto label = stream.next()) out.push_back(fan_point(*label));
  return out;
}

// -------------------------------------------------------------- matching

bool MatchConstraints::admits(const JointLabel& label) const
{
  if (!allowed_sets.empty() &&
      std::find(allowed_sets.begin(), allowed_sets.end(), label.landau_copies()) == allowed_sets.end())
    return false;
  for (std::size_t j = 0; j < levels.size() && j < label.branches().size(); ++j) {
    const auto& b = label.branches()[j];
    if (levels[j] && b.is_landau() && b.level() != *levels[j]) return false;
  }
  return true;
}

std::vector<LabelGroup> match_equal_eigenvalues(int m, const MatchConstraints& constraints, double cutoff)
{
  std::vector<LabelGroup> groups;
  JointLabelStream stream(m, cutoff);
  LabelGroup current;
  auto flush = [&] {
    if (current.labels.size() >= 2) {
      std::sort(current.labels.begin(), current.labels.end());
      groups.push_back(std::move(current));
    }
    current = LabelGroup{};
  };
  bool started = false;
  while (auto label = stream.next()) {
    if (!started || label->key() != current.key) {
      flush();
      current.key = label->key();
      started = true;
    }
    if (constraints.admits(*label)) current.labels.push_back(std::move(*label));
  }
  flush();
  return groups;
}

namespace {

void collect_with_key(int copy, int m, const EigenKey& remaining, std::vector<BranchLabel>& prefix,
                      const MatchConstraints& constraints, std::vector<JointLabel>& out)
{
  if (copy == m - 1) {
    std::vector<BranchLabel> last;
    if (remaining.two_pi_part == 0 && remaining.integer_part > 0)
      last = landau_labels_with_value(remaining.integer_part);
    else if (remaining.integer_part == 0 && remaining.two_pi_part >= 0)
      last = fourier_labels_with_norm(remaining.two_pi_part);
    for (const auto& b : last) {
      prefix.push_back(b);
      JointLabel label(prefix);
      if (constraints.admits(label)) out.push_back(std::move(label));
      prefix.pop_back();
    }
    return;
  }
  // Landau candidates for this copy.
  for (std::int64_t value = 1; value <= remaining.integer_part; ++value)
    for (const auto& b : landau_labels_with_value(value)) {
      prefix.push_back(b);
      collect_with_key(copy + 1, m, {remaining.integer_part - value, remaining.two_pi_part}, prefix,
                       constraints, out);
      prefix.pop_back();
    }
  for (std::int64_t f = 0; f <= remaining.two_pi_part; ++f)
    for (const auto& b : fourier_labels_with_norm(f)) {
      prefix.push_back(b);
      collect_with_key(copy + 1, m, {remaining.integer_part, remaining.two_pi_part - f}, prefix,
                       constraints, out);
      prefix.pop_back();
    }
}

}  // namespace

std::vector<JointLabel> labels_with_key(int m, const EigenKey& key, const MatchConstraints& constraints)
{
  if (m < 1 || m > 64) throw ValidationError("m must be in [1, 64]");
  if (key.integer_part < 0 || key.two_pi_part < 0) throw ValidationError("eigenvalue key must be nonnegative");
  std::vector<JointLabel> out;
  std::vector<BranchLabel> prefix;
  collect_with_key(0, m, key, prefix, constraints, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<std::int64_t>> nearest_alpha_with_eigenvalue(const std::vector<std::int64_t>& odd,
                                                                       const std::vector<double>& direction,
                                                                       std::int64_t target, int radius)
{
  const std::size_t n = odd.size();
  if (n == 0 || direction.size() != n) throw ValidationError("nearest_alpha: size mismatch");
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (odd[j] <= 0 || odd[j] % 2 == 0) throw ValidationError("nearest_alpha: weights must be odd positive");
    if (direction[j] == 0.0) throw ValidationError("nearest_alpha: direction must be nonzero on the support");
    denom += static_cast<double>(odd[j]) * std::abs(direction[j]);
  }
  std::vector<double> ideal(n);
  std::vector<std::int64_t> base(n);
  for (std::size_t j = 0; j < n; ++j) {
    ideal[j] = static_cast<double>(target) * std::abs(direction[j]) / denom;
    base[j] = std::max<std::int64_t>(1, std::llround(ideal[j]));
  }
  std::optional<std::vector<std::int64_t>> best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> trial(n);
  // Free coordinates 0..n-2 move within the radius; the last one is solved for.
  std::vector<int> offset(n ? n - 1 : 0, -radius);
  while (true) {
    std::int64_t used = 0;
    bool valid = true;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      trial[j] = base[j] + offset[j];
      if (trial[j] < 1) valid = false;
      used += odd[j] * trial[j];
    }
    const std::int64_t rest = target - used;
    if (valid && rest > 0 && rest % odd[n - 1] == 0) {
      trial[n - 1] = rest / odd[n - 1];
      if (std::abs(static_cast<double>(trial[n - 1]) - ideal[n - 1]) <= radius + 0.5) {
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) cost += std::abs(static_cast<double>(trial[j]) - ideal[j]);
        if (cost < best_cost) {
          best_cost = cost;
          best = trial;
        }
      }
    }
    std::size_t pos = 0;
    while (pos < offset.size() && ++offset[pos] > radius) offset[pos++] = -radius;
    if (pos == offset.size()) break;
  }
  if (best)
    for (std::size_t j = 0; j < n; ++j)
      if (direction[j] < 0) (*best)[j] = -(*best)[j];
  return best;
}

// ----------------------------------------------------------------- H-type

std::string HtypeLabel::to_string() const
{
  std::ostringstream os;
  if (alpha != 0) {
    os << "L(" << alpha << ';';
    for (std::size_t j = 0; j < levels.size(); ++j) os << (j ? "," : "") << levels[j];
    os << ')';
  } else {
    os << "F(";
    for (std::size_t j = 0; j < k.size(); ++j) os << (j ? ";" : "") << k[j] << ',' << l[j];
    os << ')';
  }
  return os.str();
}

namespace {

void htype_levels(int d, const std::vector<double>& beta, std::int64_t alpha, double cutoff, std::size_t j,
                  double partial, std::vector<int>& levels, std::vector<std::pair<double, HtypeLabel>>& out)
{
  const auto abs_alpha = static_cast<double>(std::abs(alpha));
  if (j == static_cast<std::size_t>(d)) {
    const double value = abs_alpha * partial;
    if (value <= cutoff) out.push_back({value, HtypeLabel{alpha, levels, {}, {}}});
    return;
  }
  for (int n = 0;; ++n) {
    const double next = partial + beta[j] * (2.0 * n + 1.0);
    // Remaining copies contribute at least beta_i each.
    double floor_rest = 0.0;
    for (std::size_t i = j + 1; i < beta.size(); ++i) floor_rest += beta[i];
    if (abs_alpha * (next + floor_rest) > cutoff * (1.0 + 1e-12)) break;
    levels.push_back(n);
    htype_levels(d, beta, alpha, cutoff, j + 1, next, levels, out);
    levels.pop_back();
  }
}

void htype_fourier(int d, const std::vector<double>& beta, double cutoff, std::size_t j, double partial,
                   std::vector<std::int64_t>& k, std::vector<std::int64_t>& l,
                   std::vector<std::pair<double, HtypeLabel>>& out)
{
  if (j == static_cast<std::size_t>(d)) {
    const double value = kTwoPi * partial;
    if (value <= cutoff) out.push_back({value, HtypeLabel{0, {}, k, l}});
    return;
  }
  const auto bound = static_cast<std::int64_t>(std::floor(std::sqrt(cutoff / (kTwoPi * beta[j])))) + 1;
  for (std::int64_t a = -bound; a <= bound; ++a)
    for (std::int64_t b = -bound; b <= bound; ++b) {
      const double next = partial + beta[j] * static_cast<double>(a * a + b * b);
      if (kTwoPi * next > cutoff * (1.0 + 1e-12)) continue;
      k.push_back(a);
      l.push_back(b);
      htype_fourier(d, beta, cutoff, j + 1, next, k, l, out);
      k.pop_back();
      l.pop_back();
    }
}

}  // namespace

HtypeSpectrumTable enumerate_htype(int d, const std::vector<double>& beta, double cutoff)
{
  require_cutoff(cutoff);
  if (d < 1 || beta.size() != static_cast<std::size_t>(d)) throw ValidationError("enumerate_htype: need d frequencies");
  double product = 1.0;
  for (double b : beta) {
    if (!(b > 0.0)) throw ValidationError("enumerate_htype: frequencies must be positive");
    product *= b;
  }
  if (std::abs(product - 1.0) > 1e-12) throw ValidationError("enumerate_htype: frequencies must multiply to 1");

  std::vector<std::pair<double, HtypeLabel>> labels;
  double min_level_sum = 0.0;
  for (double b : beta) min_level_sum += b;
  for (std::int64_t a = 1; static_cast<double>(a) * min_level_sum <= cutoff; ++a)
    for (std::int64_t alpha : {a, -a}) {
      std::vector<int> levels;
      htype_levels(d, beta, alpha, cutoff, 0, 0.0, levels, labels);
    }
  {
    std::vector<std::int64_t> k;
    std::vector<std::int64_t> l;
    htype_fourier(d, beta, cutoff, 0, 0.0, k, l, labels);
  }
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });

  HtypeSpectrumTable table;
  table.cutoff = cutoff;
  for (auto& [value, label] : labels) {
    const bool merge = !table.entries.empty() &&
                       std::abs(value - table.entries.back().eigenvalue) <= 1e-12 * std::max(1.0, value);
    if (!merge) {
      BasicSpectrumEntry<HtypeLabel> e;
      e.eigenvalue = value;
      table.entries.push_back(std::move(e));
    }
    auto& e = table.entries.back();
    std::uint64_t w = 1;
    if (label.alpha != 0)
      for (int i = 0; i < d; ++i) w *= static_cast<std::uint64_t>(std::abs(label.alpha));
    e.multiplicity += w;
    e.labels.push_back(std::move(label));
  }
  for (auto& e : table.entries) std::sort(e.labels.begin(), e.labels.end());
  return table;
}

}  // namespace heisfan
