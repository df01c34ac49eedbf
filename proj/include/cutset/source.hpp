#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cutset/network.hpp"
#include "cutset/prob.hpp"
#include "cutset/region.hpp"

namespace cutset::source {

using prob::Alphabet;
using prob::Channel;
using prob::JointPMF;
using prob::Var;
using region::CutVector;

std::string source_name(int party);  // "w<i>"
std::string recon_name(int party);   // "mh<i>"

// Correlated source observed across the parties: joint law of w1..wm plus the
// per-party objective maps taking the full observation tuple to a message.
struct SourceSpec {
  int parties = 0;
  std::vector<Alphabet> source_alphabets;
  std::vector<Alphabet> message_alphabets;
  JointPMF joint;
  std::vector<std::vector<int>> functions;  // [party][w-product index] -> message symbol

  SourceSpec(int parties, std::vector<Alphabet> source_alphabets,
             std::vector<Alphabet> message_alphabets, std::vector<double> joint_table,
             std::vector<std::vector<int>> functions);
};

std::vector<Var> source_vars(const SourceSpec& src);
std::vector<Var> recon_vars(const SourceSpec& src);
std::vector<std::string> source_names(const SourceSpec& src);
std::vector<std::string> recon_names(const SourceSpec& src);

// Per-party distortion matrices (zero diagonal) and targets.
struct DistortionSpec {
  std::vector<std::vector<double>> matrices;  // [party], |M_i| x |M_i| row-major
  std::vector<double> targets;
};

void validate_distortion(const SourceSpec& src, const DistortionSpec& dist);

// Virtual channel p(mh1..mhm | w1..wm).
using Reconstruction = Channel;

Reconstruction deterministic_reconstruction(const SourceSpec& src,
                                            const std::vector<std::size_t>& map);
// mh_i = f_i(w) for every party.
Reconstruction perfect_reconstruction(const SourceSpec& src);

double expected_distortion(const SourceSpec& src, const DistortionSpec& dist,
                           const Reconstruction& rec, int party);
// Same, over an explicit joint on (w1..wm, mh1..mhm).
double expected_distortion(const SourceSpec& src, const DistortionSpec& dist,
                           const JointPMF& joint, int party);

// Coordinate k: I(W_T ; Mh_{T^c} | W_{T^c}) under p(w) * rec(mh|w).
CutVector virtual_cut_vector(const SourceSpec& src, const Reconstruction& rec);
CutVector virtual_cut_vector(const SourceSpec& src, const JointPMF& joint);

struct ContainmentVerdict {
  enum class Status { Inside, Outside, InvalidCandidate };

  Status status = Status::Outside;
  std::vector<double> distortions;  // realized per-party expected distortion
  CutVector virtual_cuts;
  std::vector<double> cut_slack;    // per cut: max generator coordinate minus v_k
  std::vector<int> violated_cuts;   // 1-based cuts where v_k exceeds the per-cut max
  std::optional<net::TimeShare> certificate;
};

// Does the virtual channel's cut vector fit inside the convexified channel
// cut region? Distortion targets are checked first; failing them flags the
// candidate as invalid rather than as a bound violation.
ContainmentVerdict check_containment(const SourceSpec& src, const DistortionSpec& dist,
                                     const Reconstruction& rec, const net::NetworkSpec& net,
                                     const net::PermissibleSet& psi,
                                     std::size_t cap = net::kMaxEnumeration);

struct SearchConfig {
  int grid = 5;                     // simplex resolution for stochastic candidates
  bool deterministic_only = false;  // restrict to deterministic maps
  std::size_t cap = 1'000'000;      // candidate count cap
};

struct SearchOutcome {
  bool witness_found = false;
  std::optional<Reconstruction> witness;
  std::optional<ContainmentVerdict> verdict;  // populated for the witness
  // Over candidates meeting the distortion targets: the least worst per-cut
  // violation seen, and the cut attaining it for the best candidate.
  double best_violation = 0.0;
  std::optional<int> best_violated_cut;
  std::size_t candidates = 0;
  std::size_t feasible_candidates = 0;
  bool searched_deterministic = false;
};

SearchOutcome witness_search(const SourceSpec& src, const DistortionSpec& dist,
                             const net::NetworkSpec& net, const net::PermissibleSet& psi,
                             const SearchConfig& cfg,
                             std::size_t region_cap = net::kMaxEnumeration);

// One stage of the distortion repair pass.
struct PerturbStage {
  int party = 0;
  bool zero_target = false;  // which construction ran: exact repair vs mixing
  double pq0 = 0.0;          // probability of the repair event
  double budget = 0.0;       // bound on the per-cut information increase
  double distortion = 0.0;   // party distortion after the stage
};

struct PerturbResult {
  JointPMF joint;
  std::vector<PerturbStage> stages;
};

// Sequentially tightens each party's expected distortion from at most
// D_r + eps down to at most D_r, replacing the party's reconstruction
// coordinate by the true message on an auxiliary repair event. The auxiliary
// is materialized as a table axis and summed back out.
PerturbResult perturb_reconstruction(const JointPMF& joint, const SourceSpec& src,
                                     const DistortionSpec& dist, double eps);

// Closed-form bound on the per-cut information increase of stage `party`.
// Zero-target stages take the realized repair probability when available,
// falling back to eps over the smallest nonzero distortion entry.
double perturbation_mi_budget(const SourceSpec& src, const DistortionSpec& dist, double eps,
                              int party, std::optional<double> realized_pq0 = std::nullopt);

nlohmann::json to_json(const ContainmentVerdict& verdict);
nlohmann::json to_json(const SearchOutcome& outcome, const SearchConfig& cfg, int region_grid);

}  // namespace cutset::source
