#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cutset::prob {

// Tolerances and size limits shared by the probability kernels.
inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kCmiClampTol = 1e-9;
inline constexpr std::size_t kMaxTableEntries = std::size_t{1} << 24;

struct Alphabet {
  int size = 0;
  std::vector<std::string> labels;  // optional; when present, one distinct label per symbol

  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

void validate_alphabet(const Alphabet& a);

struct Var {
  std::string name;
  Alphabet alphabet;

  friend bool operator==(const Var&, const Var&) = default;
};

std::size_t product_size(const std::vector<Var>& vars);
// Row-major strides: the last variable cycles fastest.
std::vector<std::size_t> strides_of(const std::vector<Var>& vars);

// Dense joint probability table over a product of finite alphabets,
// row-major in variable order. Immutable after construction.
class JointPMF {
 public:
  JointPMF(std::vector<Var> vars, std::vector<double> table);

  const std::vector<Var>& vars() const { return vars_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t size() const { return table_.size(); }

  bool has_var(std::string_view name) const;
  std::size_t var_index(std::string_view name) const;  // throws on unknown name
  std::size_t stride(std::size_t var) const { return strides_[var]; }
  int coord(std::size_t entry, std::size_t var) const;

  friend bool operator==(const JointPMF&, const JointPMF&) = default;

 private:
  std::vector<Var> vars_;
  std::vector<double> table_;
  std::vector<std::size_t> strides_;
};

// Conditional probability table p(outputs | inputs): one normalized row per
// input configuration, rows row-major over inputs, columns over outputs.
class Channel {
 public:
  Channel(std::vector<Var> inputs, std::vector<Var> outputs, std::vector<double> table);

  const std::vector<Var>& inputs() const { return inputs_; }
  const std::vector<Var>& outputs() const { return outputs_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t in_count() const { return in_count_; }
  std::size_t out_count() const { return out_count_; }
  double cond(std::size_t in, std::size_t out) const { return table_[in * out_count_ + out]; }

  // p(outputs | inputs) = 1[output index == map[input index]]
  static Channel deterministic(std::vector<Var> inputs, std::vector<Var> outputs,
                               const std::vector<std::size_t>& map);
  static Channel identity(const std::vector<Var>& inputs,
                          const std::vector<std::string>& output_names);

  friend bool operator==(const Channel&, const Channel&) = default;

 private:
  std::vector<Var> inputs_;
  std::vector<Var> outputs_;
  std::vector<double> table_;
  std::size_t in_count_ = 0;
  std::size_t out_count_ = 0;
};

// Sums out every variable not listed in `keep`; variable order is preserved.
JointPMF marginalize(const JointPMF& j, const std::vector<std::string>& keep);

// Joint over the input variables plus the channel outputs:
// p(in, out) = p(in) * ch(out | restriction of in to the channel inputs).
// Extra joint variables ride along unchanged.
JointPMF compose(const Channel& ch, const JointPMF& input);

// Shannon entropy of the marginal on `vars`, in bits. Empty set gives 0.
double entropy(const JointPMF& j, const std::vector<std::string>& vars);

// Conditional mutual information I(A;B|C) in bits, computed as
// H(AC) + H(BC) - H(ABC) - H(C); tiny negative float residue is clamped to 0.
double cmi(const JointPMF& j, const std::vector<std::string>& a,
           const std::vector<std::string>& b, const std::vector<std::string>& c);

// Product law of n independent copies; variables gain a "#<stage>" suffix.
// n = 1 returns the input unchanged.
JointPMF iid_extension(const JointPMF& j, int n, std::size_t max_entries = kMaxTableEntries);

}  // namespace cutset::prob
