#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cutset/prob.hpp"
#include "cutset/region.hpp"

namespace cutset::net {

using prob::Alphabet;
using prob::Channel;
using prob::JointPMF;
using prob::Var;
using region::CutVector;

inline constexpr std::size_t kMaxEnumeration = 1'000'000;
inline constexpr int kDefaultGridBinary = 11;
inline constexpr int kDefaultGridTernary = 5;

std::string input_name(int party);   // "x<i>"
std::string output_name(int party);  // "y<i>"

// m-party memoryless network q(y1..ym | x1..xm).
struct NetworkSpec {
  int parties = 0;
  std::vector<Alphabet> input_alphabets;
  std::vector<Alphabet> output_alphabets;
  Channel channel;

  NetworkSpec(int parties, std::vector<Alphabet> inputs, std::vector<Alphabet> outputs,
              std::vector<double> channel_table);
};

std::vector<Var> input_vars(const NetworkSpec& net);
std::vector<std::string> input_names(const NetworkSpec& net);

// Set of admissible joint input laws. All/Independent enumerate the simplex
// grid with entries a/(grid-1); Explicit carries the list directly.
struct PermissibleSet {
  enum class Kind { Explicit, All, Independent };

  Kind kind = Kind::All;
  int grid = kDefaultGridBinary;
  std::vector<JointPMF> points;

  static PermissibleSet all(int grid);
  static PermissibleSet independent(int grid);
  static PermissibleSet explicit_set(std::vector<JointPMF> points);
};

// Deterministic enumeration of the permissible set, in grid order.
std::vector<JointPMF> enumerate_inputs(const NetworkSpec& net, const PermissibleSet& psi,
                                       std::size_t cap = kMaxEnumeration);

// Coordinate k: I(X_T ; Y_{T^c} | X_{T^c}) for cut T_k under channel + input.
CutVector cut_vector(const NetworkSpec& net, const JointPMF& input);

// Same, with extra joint variables (such as a time-sharing symbol) added to
// every conditioning set.
CutVector cut_vector_given(const NetworkSpec& net, const JointPMF& input,
                           const std::vector<std::string>& conditioning);

// Union of the down-sets of the cut vectors over the enumerated inputs;
// generator i was produced by inputs[i].
struct CutRegion {
  region::Region region;
  std::vector<JointPMF> inputs;
};

CutRegion cut_region(const NetworkSpec& net, const PermissibleSet& psi,
                     std::size_t cap = kMaxEnumeration);

// Max of one cut coordinate over the enumerated inputs.
double cut_capacity(const NetworkSpec& net, const PermissibleSet& psi, int cut_index,
                    std::size_t cap = kMaxEnumeration);

// Time-sharing certificate: point v is covered by sum_z weight_z * cut vector
// of inputs[z], with at most 2^m-1 entries.
struct TimeShare {
  std::vector<double> weights;
  std::vector<JointPMF> inputs;
};

// Requires hull.region.convexified. Empty when v is not contained.
std::optional<TimeShare> timeshare_decomposition(const CutRegion& hull, const CutVector& v);

struct RateMatrix {
  int parties = 0;
  std::vector<double> entries;  // row-major m x m, diagonal ignored

  RateMatrix(int parties, std::vector<double> entries);
  double at(int from, int to) const;  // 1-based parties
};

// u_k = sum of R(i,j) over i in T_k, j outside.
CutVector rate_cut_totals(const RateMatrix& rates);

struct CutsetReport {
  bool inside = false;
  std::vector<int> violated_cuts;  // 1-based cut indices with u_k above the per-cut max
  std::vector<double> slack;       // per cut: max generator coordinate minus u_k
  std::optional<TimeShare> certificate;
};

CutsetReport classical_cutset_check(const RateMatrix& rates, const NetworkSpec& net,
                                    const PermissibleSet& psi,
                                    std::size_t cap = kMaxEnumeration);

nlohmann::json to_json(const TimeShare& ts);
nlohmann::json to_json(const CutsetReport& report);

}  // namespace cutset::net
