#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cutset::region {

inline constexpr double kDominanceSlack = 1e-9;
inline constexpr double kFeasibilityTol = 1e-9;

// Number of cuts: proper nonempty subsets of [m].
int cut_dimension(int parties);

// Parties (1-based) in cut T_k. Cut indices k run 1..2^m-2; party i belongs
// to T_k when bit (i-1) of k is set.
std::vector<int> cut_members(int cut_index, int parties);

// Point in R_+^(2^m-2); coordinate k-1 carries the value for cut T_k.
struct CutVector {
  int parties = 0;
  std::vector<double> coords;

  CutVector() = default;
  CutVector(int parties, std::vector<double> coords);

  friend bool operator==(const CutVector&, const CutVector&) = default;
};

// a >= b coordinatewise, with slack per coordinate.
bool dominates(const CutVector& a, const CutVector& b, double slack = kDominanceSlack);

// Finite generator set interpreted as the down-set of the generator union,
// or of its convex hull when `convexified` is set.
struct Region {
  int parties = 0;
  std::vector<CutVector> generators;
  bool convexified = false;
};

// Result of a membership query. For a plain down-set the certificate is a
// single dominating generator with weight 1; for a convexified region it is
// a convex combination with support at most 2^m-1.
struct Membership {
  bool inside = false;
  std::vector<std::pair<std::size_t, double>> weights;  // generator index -> lambda
};

Membership region_contains(const Region& r, const CutVector& v);

Region minkowski_sum(const Region& r1, const Region& r2);
Region scale(const Region& r, double t);

// Marks the region as convex-hull semantics. With `prune`, generators that a
// convex combination of the others dominates are dropped; membership answers
// are unchanged.
Region convexify(Region r, bool prune = false);

// Shrinks a convex combination to at most `max_support` points while keeping
// the combined point fixed, by stepping along null-space directions of the
// support until a weight hits zero.
void reduce_support(std::vector<std::pair<std::size_t, double>>& combo,
                    const std::vector<CutVector>& generators, std::size_t max_support);

nlohmann::json to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

}  // namespace cutset::region
