#include "cutset/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cutset::source {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr double kDistortionTol = 1e-9;

double h2(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// Positions and strides needed to read (w-product index, mh symbols) off a
// joint over the source and reconstruction variables.
struct SourceLayout {
  std::vector<std::size_t> w_pos;      // joint position of w_i
  std::vector<std::size_t> mh_pos;     // joint position of mh_i
  std::vector<std::size_t> w_strides;  // strides of the w-product
};

SourceLayout layout_of(const SourceSpec& src, const JointPMF& joint) {
  SourceLayout lay;
  const std::vector<Var> wv = source_vars(src);
  lay.w_strides = prob::strides_of(wv);
  for (int i = 1; i <= src.parties; ++i) {
    const std::size_t wp = joint.var_index(source_name(i));
    const std::size_t mp = joint.var_index(recon_name(i));
    if (joint.vars()[wp].alphabet.size != src.source_alphabets[i - 1].size ||
        joint.vars()[mp].alphabet.size != src.message_alphabets[i - 1].size) {
      fail("source joint: alphabet mismatch on party " + std::to_string(i));
    }
    lay.w_pos.push_back(wp);
    lay.mh_pos.push_back(mp);
  }
  return lay;
}

std::size_t w_product_index(const JointPMF& joint, const SourceLayout& lay, std::size_t entry) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < lay.w_pos.size(); ++i) {
    w += static_cast<std::size_t>(joint.coord(entry, lay.w_pos[i])) * lay.w_strides[i];
  }
  return w;
}

double distortion_of_joint(const SourceSpec& src, const DistortionSpec& dist,
                           const JointPMF& joint, int party, const SourceLayout& lay) {
  const std::vector<double>& delta = dist.matrices[party - 1];
  const std::vector<int>& f = src.functions[party - 1];
  const auto m_size = static_cast<std::size_t>(src.message_alphabets[party - 1].size);
  double total = 0.0;
  for (std::size_t e = 0; e < joint.size(); ++e) {
    const double p = joint.table()[e];
    if (p == 0.0) continue;
    const auto msg = static_cast<std::size_t>(f[w_product_index(joint, lay, e)]);
    const auto rec = static_cast<std::size_t>(joint.coord(e, lay.mh_pos[party - 1]));
    total += p * delta[msg * m_size + rec];
  }
  return total;
}

}  // namespace

std::string source_name(int party) { return "w" + std::to_string(party); }
std::string recon_name(int party) { return "mh" + std::to_string(party); }

SourceSpec::SourceSpec(int parties, std::vector<Alphabet> source_alphabets,
                       std::vector<Alphabet> message_alphabets,
                       std::vector<double> joint_table, std::vector<std::vector<int>> functions)
    : parties(parties),
      source_alphabets(std::move(source_alphabets)),
      message_alphabets(std::move(message_alphabets)),
      joint([&] {
        if (parties < 2) fail("source: needs at least two parties");
        if (this->source_alphabets.size() != static_cast<std::size_t>(parties) ||
            this->message_alphabets.size() != static_cast<std::size_t>(parties)) {
          fail("source: alphabet count does not match the party count");
        }
        std::vector<Var> vars;
        for (int i = 1; i <= parties; ++i) {
          vars.push_back({source_name(i), this->source_alphabets[i - 1]});
        }
        return JointPMF(std::move(vars), std::move(joint_table));
      }()),
      functions(std::move(functions)) {
  if (this->functions.size() != static_cast<std::size_t>(parties)) {
    fail("source: one objective map per party required");
  }
  const std::size_t w_cells = joint.size();
  for (int i = 1; i <= parties; ++i) {
    const std::vector<int>& f = this->functions[i - 1];
    if (f.size() != w_cells) {
      fail("source: objective map " + std::to_string(i) + " must cover the w-product");
    }
    for (int sym : f) {
      if (sym < 0 || sym >= this->message_alphabets[i - 1].size) {
        fail("source: objective map " + std::to_string(i) + " value out of range");
      }
    }
  }
}

std::vector<Var> source_vars(const SourceSpec& src) { return src.joint.vars(); }

std::vector<Var> recon_vars(const SourceSpec& src) {
  std::vector<Var> vars;
  for (int i = 1; i <= src.parties; ++i) {
    vars.push_back({recon_name(i), src.message_alphabets[i - 1]});
  }
  return vars;
}

std::vector<std::string> source_names(const SourceSpec& src) {
  std::vector<std::string> names;
  for (int i = 1; i <= src.parties; ++i) names.push_back(source_name(i));
  return names;
}

std::vector<std::string> recon_names(const SourceSpec& src) {
  std::vector<std::string> names;
  for (int i = 1; i <= src.parties; ++i) names.push_back(recon_name(i));
  return names;
}

void validate_distortion(const SourceSpec& src, const DistortionSpec& dist) {
  if (dist.matrices.size() != static_cast<std::size_t>(src.parties) ||
      dist.targets.size() != static_cast<std::size_t>(src.parties)) {
    fail("distortion: one matrix and target per party required");
  }
  for (int i = 1; i <= src.parties; ++i) {
    const auto n = static_cast<std::size_t>(src.message_alphabets[i - 1].size);
    const std::vector<double>& delta = dist.matrices[i - 1];
    if (delta.size() != n * n) {
      fail("distortion: matrix " + std::to_string(i) + " must be |M|x|M|");
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        const double d = delta[a * n + b];
        if (!(d >= 0.0)) fail("distortion: entries must be nonnegative");
        if (a == b && d != 0.0) {
          fail("distortion: matrix " + std::to_string(i) +
               " has a nonzero diagonal at symbol " + std::to_string(a) +
               " (the contract requires d(m,m) = 0)");
        }
      }
    }
    if (!(dist.targets[i - 1] >= 0.0)) fail("distortion: targets must be nonnegative");
  }
}

Reconstruction deterministic_reconstruction(const SourceSpec& src,
                                            const std::vector<std::size_t>& map) {
  return Channel::deterministic(source_vars(src), recon_vars(src), map);
}

Reconstruction perfect_reconstruction(const SourceSpec& src) {
  const std::vector<Var> mh = recon_vars(src);
  const std::vector<std::size_t> mh_strides = prob::strides_of(mh);
  std::vector<std::size_t> map(src.joint.size());
  for (std::size_t w = 0; w < map.size(); ++w) {
    std::size_t out = 0;
    for (int i = 1; i <= src.parties; ++i) {
      out += static_cast<std::size_t>(src.functions[i - 1][w]) * mh_strides[i - 1];
    }
    map[w] = out;
  }
  return deterministic_reconstruction(src, map);
}

double expected_distortion(const SourceSpec& src, const DistortionSpec& dist,
                           const Reconstruction& rec, int party) {
  return expected_distortion(src, dist, prob::compose(rec, src.joint), party);
}

double expected_distortion(const SourceSpec& src, const DistortionSpec& dist,
                           const JointPMF& joint, int party) {
  validate_distortion(src, dist);
  if (party < 1 || party > src.parties) fail("expected_distortion: party out of range");
  return distortion_of_joint(src, dist, joint, party, layout_of(src, joint));
}

CutVector virtual_cut_vector(const SourceSpec& src, const Reconstruction& rec) {
  return virtual_cut_vector(src, prob::compose(rec, src.joint));
}

CutVector virtual_cut_vector(const SourceSpec& src, const JointPMF& joint) {
  layout_of(src, joint);  // dimension check
  const int c = region::cut_dimension(src.parties);
  std::vector<double> coords(static_cast<std::size_t>(c));
  for (int k = 1; k <= c; ++k) {
    std::vector<std::string> a;
    std::vector<std::string> b;
    std::vector<std::string> cond;
    for (int i = 1; i <= src.parties; ++i) {
      if (k & (1 << (i - 1))) {
        a.push_back(source_name(i));
      } else {
        b.push_back(recon_name(i));
        cond.push_back(source_name(i));
      }
    }
    coords[static_cast<std::size_t>(k - 1)] = prob::cmi(joint, a, b, cond);
  }
  return CutVector(src.parties, std::move(coords));
}

namespace {

// Shared by the direct check and the search loop once the hull is built.
ContainmentVerdict verdict_against_hull(const SourceSpec& src, const DistortionSpec& dist,
                                        const JointPMF& joint, const net::CutRegion& hull,
                                        const std::vector<double>& per_cut_max) {
  ContainmentVerdict v;
  v.virtual_cuts = virtual_cut_vector(src, joint);
  for (int i = 1; i <= src.parties; ++i) {
    v.distortions.push_back(expected_distortion(src, dist, joint, i));
  }
  v.cut_slack.resize(v.virtual_cuts.coords.size());
  for (std::size_t k = 0; k < v.cut_slack.size(); ++k) {
    v.cut_slack[k] = per_cut_max[k] - v.virtual_cuts.coords[k];
    if (v.virtual_cuts.coords[k] > per_cut_max[k] + region::kDominanceSlack) {
      v.violated_cuts.push_back(static_cast<int>(k + 1));
    }
  }
  for (int i = 1; i <= src.parties; ++i) {
    if (v.distortions[i - 1] > dist.targets[i - 1] + kDistortionTol) {
      v.status = ContainmentVerdict::Status::InvalidCandidate;
      return v;
    }
  }
  if (auto ts = net::timeshare_decomposition(hull, v.virtual_cuts)) {
    v.status = ContainmentVerdict::Status::Inside;
    v.certificate = std::move(ts);
  } else {
    v.status = ContainmentVerdict::Status::Outside;
  }
  return v;
}

std::vector<double> per_cut_maxima(const region::Region& r) {
  std::vector<double> best(static_cast<std::size_t>(cutset::region::cut_dimension(r.parties)),
                           0.0);
  for (const CutVector& g : r.generators) {
    for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], g.coords[k]);
  }
  return best;
}

}  // namespace

ContainmentVerdict check_containment(const SourceSpec& src, const DistortionSpec& dist,
                                     const Reconstruction& rec, const net::NetworkSpec& net,
                                     const net::PermissibleSet& psi, std::size_t cap) {
  validate_distortion(src, dist);
  net::CutRegion hull = net::cut_region(net, psi, cap);
  hull.region = region::convexify(std::move(hull.region));
  return verdict_against_hull(src, dist, prob::compose(rec, src.joint), hull,
                              per_cut_maxima(hull.region));
}

SearchOutcome witness_search(const SourceSpec& src, const DistortionSpec& dist,
                             const net::NetworkSpec& net, const net::PermissibleSet& psi,
                             const SearchConfig& cfg, std::size_t region_cap) {
  validate_distortion(src, dist);
  net::CutRegion hull = net::cut_region(net, psi, region_cap);
  hull.region = region::convexify(std::move(hull.region));
  const std::vector<double> per_cut_max = per_cut_maxima(hull.region);

  const std::size_t w_cells = src.joint.size();
  const std::size_t mh_cells = prob::product_size(recon_vars(src));

  // Deterministic maps are enumerated exhaustively while they fit the cap;
  // past that the search walks stochastic rows on the simplex grid.
  std::size_t det_count = 1;
  bool det_overflow = false;
  for (std::size_t w = 0; w < w_cells; ++w) {
    if (det_count > cfg.cap / mh_cells) {
      det_overflow = true;
      break;
    }
    det_count *= mh_cells;
  }
  const bool deterministic = cfg.deterministic_only || (!det_overflow && det_count <= cfg.cap);
  if (cfg.deterministic_only && (det_overflow || det_count > cfg.cap)) {
    fail("witness search: deterministic map count exceeds the cap");
  }

  SearchOutcome out;
  out.searched_deterministic = deterministic;
  out.best_violation = std::numeric_limits<double>::infinity();

  auto consider = [&](const Reconstruction& rec) -> bool {
    ++out.candidates;
    const JointPMF joint = prob::compose(rec, src.joint);
    const SourceLayout lay = layout_of(src, joint);
    for (int i = 1; i <= src.parties; ++i) {
      if (distortion_of_joint(src, dist, joint, i, lay) >
          dist.targets[i - 1] + kDistortionTol) {
        return false;
      }
    }
    ++out.feasible_candidates;
    const CutVector v = virtual_cut_vector(src, joint);
    double worst = -std::numeric_limits<double>::infinity();
    int worst_cut = 1;
    for (std::size_t k = 0; k < v.coords.size(); ++k) {
      const double violation = v.coords[k] - per_cut_max[k];
      if (violation > worst) {
        worst = violation;
        worst_cut = static_cast<int>(k + 1);
      }
    }
    if (worst < out.best_violation) {
      out.best_violation = worst;
      out.best_violated_cut = worst_cut;
    }
    if (worst > region::kDominanceSlack) return false;  // per-cut bound already refutes it
    ContainmentVerdict verdict = verdict_against_hull(src, dist, joint, hull, per_cut_max);
    if (verdict.status != ContainmentVerdict::Status::Inside) return false;
    out.witness_found = true;
    out.witness = rec;
    out.verdict = std::move(verdict);
    return true;
  };

  if (deterministic) {
    std::vector<std::size_t> map(w_cells, 0);
    for (std::size_t n = 0; n < det_count; ++n) {
      if (consider(deterministic_reconstruction(src, map))) return out;
      for (std::size_t w = w_cells; w-- > 0;) {  // odometer, last w fastest
        if (++map[w] < mh_cells) break;
        map[w] = 0;
      }
    }
    return out;
  }

  if (cfg.grid < 2) fail("witness search: grid resolution must be >= 2");
  const auto denom = static_cast<std::size_t>(cfg.grid - 1);
  std::vector<std::vector<double>> rows;
  {
    std::vector<std::size_t> parts(mh_cells, 0);
    auto rec_build = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
      if (pos + 1 == mh_cells) {
        parts[pos] = left;
        std::vector<double> row(mh_cells);
        for (std::size_t i = 0; i < mh_cells; ++i) {
          row[i] = static_cast<double>(parts[i]) / static_cast<double>(denom);
        }
        rows.push_back(std::move(row));
        return;
      }
      for (std::size_t a = 0; a <= left; ++a) {
        parts[pos] = a;
        self(self, pos + 1, left - a);
      }
    };
    rec_build(rec_build, 0, denom);
  }
  std::size_t total = 1;
  for (std::size_t w = 0; w < w_cells; ++w) {
    if (total > cfg.cap / rows.size()) fail("witness search: stochastic grid exceeds the cap");
    total *= rows.size();
  }

  const std::vector<Var> wv = source_vars(src);
  const std::vector<Var> mhv = recon_vars(src);
  std::vector<std::size_t> pick(w_cells, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<double> table;
    table.reserve(w_cells * mh_cells);
    for (std::size_t w = 0; w < w_cells; ++w) {
      table.insert(table.end(), rows[pick[w]].begin(), rows[pick[w]].end());
    }
    if (consider(Reconstruction(wv, mhv, std::move(table)))) return out;
    for (std::size_t w = w_cells; w-- > 0;) {
      if (++pick[w] < rows.size()) break;
      pick[w] = 0;
    }
  }
  return out;
}

PerturbResult perturb_reconstruction(const JointPMF& joint, const SourceSpec& src,
                                     const DistortionSpec& dist, double eps) {
  validate_distortion(src, dist);
  if (!(eps >= 0.0)) fail("perturb: eps must be nonnegative");
  {
    const SourceLayout lay = layout_of(src, joint);
    for (int r = 1; r <= src.parties; ++r) {
      const double d = distortion_of_joint(src, dist, joint, r, lay);
      if (d > dist.targets[r - 1] + eps + kDistortionTol) {
        fail("perturb: party " + std::to_string(r) + " distortion " + std::to_string(d) +
             " exceeds target + eps");
      }
    }
  }

  PerturbResult result{joint, {}};
  for (int r = 1; r <= src.parties; ++r) {
    const JointPMF& cur = result.joint;
    const SourceLayout lay = layout_of(src, cur);
    const double dr = dist.targets[r - 1];
    const std::vector<int>& f = src.functions[r - 1];
    const std::vector<double>& delta = dist.matrices[r - 1];
    const auto m_size = static_cast<std::size_t>(src.message_alphabets[r - 1].size);
    const std::size_t mh_pos = lay.mh_pos[r - 1];
    const std::size_t mh_stride = cur.stride(mh_pos);

    // Materialize the binary repair event as a trailing axis, rewrite the
    // party's coordinate under it, then sum it back out.
    std::vector<Var> vars_q = cur.vars();
    vars_q.push_back({"q", Alphabet{2}});
    std::vector<double> table_q(cur.size() * 2, 0.0);

    const double pq0 = dr != 0.0 ? eps / (dr + eps) : 0.0;  // repair weight, mixing case
    const double pq1 = dr != 0.0 ? dr / (dr + eps) : 0.0;
    double realized_pq0 = 0.0;

    for (std::size_t e = 0; e < cur.size(); ++e) {
      const double p = cur.table()[e];
      if (p == 0.0) continue;
      const auto msg = static_cast<std::size_t>(f[w_product_index(cur, lay, e)]);
      const auto rec_sym = static_cast<std::size_t>(cur.coord(e, mh_pos));
      const std::size_t repaired = e - rec_sym * mh_stride + msg * mh_stride;
      if (dr != 0.0) {
        table_q[repaired * 2 + 0] += p * pq0;
        table_q[e * 2 + 1] += p * pq1;
      } else if (delta[msg * m_size + rec_sym] == 0.0) {
        table_q[e * 2 + 1] += p;
      } else {
        table_q[repaired * 2 + 0] += p;
        realized_pq0 += p;
      }
    }
    if (dr != 0.0) realized_pq0 = pq0;

    std::vector<std::string> keep;
    for (const Var& v : cur.vars()) keep.push_back(v.name);
    JointPMF next = prob::marginalize(JointPMF(std::move(vars_q), std::move(table_q)), keep);

    PerturbStage stage;
    stage.party = r;
    stage.zero_target = dr == 0.0;
    stage.pq0 = realized_pq0;
    stage.budget = perturbation_mi_budget(src, dist, eps, r,
                                          dr == 0.0 ? std::optional<double>(realized_pq0)
                                                    : std::nullopt);
    stage.distortion = distortion_of_joint(src, dist, next, r, layout_of(src, next));
    result.stages.push_back(stage);
    result.joint = std::move(next);
  }
  return result;
}

double perturbation_mi_budget(const SourceSpec& src, const DistortionSpec& dist, double eps,
                              int party, std::optional<double> realized_pq0) {
  validate_distortion(src, dist);
  if (party < 1 || party > src.parties) fail("budget: party out of range");
  if (!(eps >= 0.0)) fail("budget: eps must be nonnegative");
  const double h_all = prob::entropy(src.joint, source_names(src));
  const double dr = dist.targets[party - 1];
  if (dr != 0.0) return h_all * (eps / (dr + eps));

  double delta_min = std::numeric_limits<double>::infinity();
  for (double d : dist.matrices[party - 1]) {
    if (d != 0.0) delta_min = std::min(delta_min, d);
  }
  if (!std::isfinite(delta_min)) {
    fail("budget: all-zero distortion matrix with a zero target leaves the bound undefined");
  }
  if (realized_pq0) {
    return h2(*realized_pq0) + *realized_pq0 * h_all;
  }
  const double bound = std::min(eps / delta_min, 1.0);
  const double hq = bound >= 0.5 ? 1.0 : h2(bound);
  return hq + bound * h_all;
}

nlohmann::json to_json(const ContainmentVerdict& verdict) {
  const char* status = nullptr;
  switch (verdict.status) {
    case ContainmentVerdict::Status::Inside:
      status = "witness_found";
      break;
    case ContainmentVerdict::Status::Outside:
      status = "no_witness_at_resolution";
      break;
    case ContainmentVerdict::Status::InvalidCandidate:
      status = "invalid_candidate";
      break;
  }
  nlohmann::json j{{"status", status},
                   {"distortions", verdict.distortions},
                   {"virtual_cuts", verdict.virtual_cuts.coords},
                   {"cut_slack", verdict.cut_slack},
                   {"violated_cuts", verdict.violated_cuts}};
  j["certificate"] = verdict.certificate ? net::to_json(*verdict.certificate) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const SearchOutcome& outcome, const SearchConfig& cfg, int region_grid) {
  nlohmann::json j;
  j["status"] = outcome.witness_found ? "witness_found" : "no_witness_at_resolution";
  if (outcome.verdict) {
    j["cut_slack"] = outcome.verdict->cut_slack;
    nlohmann::json cert = net::to_json(*outcome.verdict->certificate);
    cert["reconstruction"] = outcome.witness->table();
    j["certificate"] = std::move(cert);
  } else {
    j["certificate"] = nlohmann::json();
    if (outcome.feasible_candidates > 0) {
      j["best_violation"] = outcome.best_violation;
      if (outcome.best_violated_cut) j["best_violated_cut"] = *outcome.best_violated_cut;
    }
  }
  j["resolution"] = {
      {"search_grid", cfg.grid},
      {"deterministic_only", cfg.deterministic_only},
      {"deterministic_search", outcome.searched_deterministic},
      {"candidates", outcome.candidates},
      {"feasible_candidates", outcome.feasible_candidates},
      {"region_grid", region_grid},
      {"note", "channel cut region is an inner grid approximation; "
               "outside verdicts are resolution-qualified"}};
  return j;
}

}  // namespace cutset::source
