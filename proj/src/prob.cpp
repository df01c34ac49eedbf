#include "cutset/prob.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cutset::prob {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// Neumaier-compensated sum; keeps the normalization check exact enough for
// deep table contractions.
double stable_sum(const std::vector<double>& xs, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double x = xs[i];
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void check_distinct_names(const std::vector<Var>& vars, const char* what) {
  std::set<std::string_view> seen;
  for (const Var& v : vars) {
    validate_alphabet(v.alphabet);
    if (v.name.empty()) fail(std::string(what) + ": empty variable name");
    if (!seen.insert(v.name).second) {
      fail(std::string(what) + ": duplicate variable name '" + v.name + "'");
    }
  }
}

void check_nonnegative(const std::vector<double>& table, const char* what) {
  for (double x : table) {
    if (!(x >= 0.0)) fail(std::string(what) + ": negative or non-finite table entry");
  }
}

}  // namespace

void validate_alphabet(const Alphabet& a) {
  if (a.size < 1) fail("alphabet: size must be >= 1");
  if (!a.labels.empty()) {
    if (a.labels.size() != static_cast<std::size_t>(a.size)) {
      fail("alphabet: label count does not match size");
    }
    std::set<std::string_view> seen;
    for (const std::string& l : a.labels) {
      if (!seen.insert(l).second) fail("alphabet: duplicate label '" + l + "'");
    }
  }
}

std::size_t product_size(const std::vector<Var>& vars) {
  std::size_t n = 1;
  for (const Var& v : vars) {
    const auto s = static_cast<std::size_t>(v.alphabet.size);
    if (s != 0 && n > kMaxTableEntries / s) fail("variable product exceeds the table size cap");
    n *= s;
  }
  return n;
}

std::vector<std::size_t> strides_of(const std::vector<Var>& vars) {
  std::vector<std::size_t> strides(vars.size(), 1);
  for (std::size_t i = vars.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * static_cast<std::size_t>(vars[i].alphabet.size);
  }
  return strides;
}

JointPMF::JointPMF(std::vector<Var> vars, std::vector<double> table)
    : vars_(std::move(vars)), table_(std::move(table)) {
  check_distinct_names(vars_, "joint");
  if (table_.size() != product_size(vars_)) {
    fail("joint: table length does not match the variable product");
  }
  check_nonnegative(table_, "joint");
  const double sum = stable_sum(table_, 0, table_.size());
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    std::ostringstream os;
    os.precision(17);
    os << "joint: table sums to " << sum << ", expected 1";
    fail(os.str());
  }
  strides_ = strides_of(vars_);
}

bool JointPMF::has_var(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(),
                     [&](const Var& v) { return v.name == name; });
}

std::size_t JointPMF::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].name == name) return i;
  }
  fail("unknown variable '" + std::string(name) + "'");
}

int JointPMF::coord(std::size_t entry, std::size_t var) const {
  return static_cast<int>((entry / strides_[var]) %
                          static_cast<std::size_t>(vars_[var].alphabet.size));
}

Channel::Channel(std::vector<Var> inputs, std::vector<Var> outputs, std::vector<double> table)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), table_(std::move(table)) {
  std::vector<Var> all = inputs_;
  all.insert(all.end(), outputs_.begin(), outputs_.end());
  check_distinct_names(all, "channel");
  if (outputs_.empty()) fail("channel: needs at least one output variable");
  in_count_ = product_size(inputs_);
  out_count_ = product_size(outputs_);
  if (in_count_ != 0 && out_count_ > kMaxTableEntries / in_count_) {
    fail("channel: table exceeds the size cap");
  }
  if (table_.size() != in_count_ * out_count_) {
    fail("channel: table length does not match input x output product");
  }
  check_nonnegative(table_, "channel");
  for (std::size_t r = 0; r < in_count_; ++r) {
    const double sum = stable_sum(table_, r * out_count_, (r + 1) * out_count_);
    if (std::abs(sum - 1.0) > kNormalizationTol) {
      std::ostringstream os;
      os.precision(17);
      os << "channel: row " << r << " sums to " << sum << ", expected 1";
      fail(os.str());
    }
  }
}

Channel Channel::deterministic(std::vector<Var> inputs, std::vector<Var> outputs,
                               const std::vector<std::size_t>& map) {
  const std::size_t in_count = product_size(inputs);
  const std::size_t out_count = product_size(outputs);
  if (map.size() != in_count) fail("deterministic channel: map length mismatch");
  std::vector<double> table(in_count * out_count, 0.0);
  for (std::size_t i = 0; i < in_count; ++i) {
    if (map[i] >= out_count) fail("deterministic channel: map value out of range");
    table[i * out_count + map[i]] = 1.0;
  }
  return Channel(std::move(inputs), std::move(outputs), std::move(table));
}

Channel Channel::identity(const std::vector<Var>& inputs,
                          const std::vector<std::string>& output_names) {
  if (output_names.size() != inputs.size()) fail("identity channel: name count mismatch");
  std::vector<Var> outputs;
  outputs.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    outputs.push_back({output_names[i], inputs[i].alphabet});
  }
  const std::size_t n = product_size(inputs);
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = i;
  return deterministic(inputs, std::move(outputs), map);
}

JointPMF marginalize(const JointPMF& j, const std::vector<std::string>& keep) {
  if (keep.empty()) fail("marginalize: keep set is empty");
  std::vector<bool> kept(j.vars().size(), false);
  for (const std::string& name : keep) kept[j.var_index(name)] = true;

  std::vector<Var> out_vars;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < j.vars().size(); ++i) {
    if (kept[i]) {
      out_vars.push_back(j.vars()[i]);
      positions.push_back(i);
    }
  }
  if (out_vars.size() == j.vars().size()) return j;

  const std::vector<std::size_t> out_strides = strides_of(out_vars);
  std::vector<double> out(product_size(out_vars), 0.0);
  for (std::size_t e = 0; e < j.size(); ++e) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      idx += static_cast<std::size_t>(j.coord(e, positions[k])) * out_strides[k];
    }
    out[idx] += j.table()[e];
  }
  return JointPMF(std::move(out_vars), std::move(out));
}

JointPMF compose(const Channel& ch, const JointPMF& input) {
  std::vector<std::size_t> in_pos;
  in_pos.reserve(ch.inputs().size());
  for (const Var& v : ch.inputs()) {
    const std::size_t p = input.var_index(v.name);
    if (!(input.vars()[p].alphabet.size == v.alphabet.size)) {
      fail("compose: dimension mismatch on variable '" + v.name + "'");
    }
    in_pos.push_back(p);
  }
  for (const Var& v : ch.outputs()) {
    if (input.has_var(v.name)) {
      fail("compose: output variable '" + v.name + "' collides with the joint");
    }
  }
  const std::vector<std::size_t> ch_strides = strides_of(ch.inputs());
  const std::size_t out_count = ch.out_count();
  if (out_count != 0 && input.size() > kMaxTableEntries / out_count) {
    fail("compose: result exceeds the table size cap");
  }

  std::vector<Var> out_vars = input.vars();
  out_vars.insert(out_vars.end(), ch.outputs().begin(), ch.outputs().end());
  std::vector<double> out(input.size() * out_count, 0.0);
  for (std::size_t e = 0; e < input.size(); ++e) {
    const double p = input.table()[e];
    if (p == 0.0) continue;  // zero-probability conditions are skipped
    std::size_t row = 0;
    for (std::size_t k = 0; k < in_pos.size(); ++k) {
      row += static_cast<std::size_t>(input.coord(e, in_pos[k])) * ch_strides[k];
    }
    const std::size_t base = e * out_count;
    for (std::size_t o = 0; o < out_count; ++o) {
      out[base + o] = p * ch.cond(row, o);
    }
  }
  return JointPMF(std::move(out_vars), std::move(out));
}

double entropy(const JointPMF& j, const std::vector<std::string>& vars) {
  if (vars.empty()) return 0.0;
  const JointPMF m = marginalize(j, vars);
  double h = 0.0;
  for (double p : m.table()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double cmi(const JointPMF& j, const std::vector<std::string>& a,
           const std::vector<std::string>& b, const std::vector<std::string>& c) {
  if (a.empty() || b.empty()) fail("cmi: A and B must be nonempty");
  std::set<std::string> seen;
  for (const auto* group : {&a, &b, &c}) {
    for (const std::string& name : *group) {
      j.var_index(name);  // reject unknown names
      if (!seen.insert(name).second) fail("cmi: sets overlap on '" + name + "'");
    }
  }
  auto join = [](const std::vector<std::string>& u, const std::vector<std::string>& v) {
    std::vector<std::string> r = u;
    r.insert(r.end(), v.begin(), v.end());
    return r;
  };
  std::vector<std::string> abc = join(join(a, b), c);
  double v = entropy(j, join(a, c)) + entropy(j, join(b, c)) - entropy(j, abc) - entropy(j, c);
  if (v < 0.0 && v >= -kCmiClampTol) v = 0.0;
  return v;
}

JointPMF iid_extension(const JointPMF& j, int n, std::size_t max_entries) {
  if (n < 1) fail("iid_extension: n must be >= 1");
  if (n == 1) return j;

  std::size_t total = 1;
  for (int s = 0; s < n; ++s) {
    if (j.size() != 0 && total > max_entries / j.size()) {
      fail("iid_extension: table size cap exceeded");
    }
    total *= j.size();
  }

  std::vector<Var> vars;
  vars.reserve(j.vars().size() * static_cast<std::size_t>(n));
  for (int s = 1; s <= n; ++s) {
    for (const Var& v : j.vars()) {
      vars.push_back({v.name + "#" + std::to_string(s), v.alphabet});
    }
  }
  std::vector<double> out(total);
  for (std::size_t e = 0; e < total; ++e) {
    double p = 1.0;
    std::size_t rest = e;
    for (int s = 0; s < n; ++s) {  // last stage cycles fastest
      p *= j.table()[rest % j.size()];
      rest /= j.size();
    }
    out[e] = p;
  }
  return JointPMF(std::move(vars), std::move(out));
}

}  // namespace cutset::prob
