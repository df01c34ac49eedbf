#include "cutset/network.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cutset::net {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// C(n+k-1, k-1), saturating once past any practical enumeration size.
std::size_t composition_count(std::size_t n, std::size_t k) {
  unsigned long long c = 1;
  for (std::size_t r = 1; r < k; ++r) {
    if (c > std::numeric_limits<unsigned long long>::max() / (n + r)) {
      return std::numeric_limits<std::size_t>::max();
    }
    c = c * (n + r) / r;
  }
  return c > std::numeric_limits<std::size_t>::max()
             ? std::numeric_limits<std::size_t>::max()
             : static_cast<std::size_t>(c);
}

// All length-k nonnegative integer vectors summing to n, lexicographic.
template <typename Fn>
void for_each_composition(std::size_t n, std::size_t k, Fn&& emit) {
  std::vector<std::size_t> parts(k, 0);
  auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos + 1 == k) {
      parts[pos] = left;
      emit(parts);
      return;
    }
    for (std::size_t a = 0; a <= left; ++a) {
      parts[pos] = a;
      self(self, pos + 1, left - a);
    }
  };
  if (k > 0) rec(rec, 0, n);
}

std::vector<double> grid_point(const std::vector<std::size_t>& parts, std::size_t denom) {
  std::vector<double> p(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    p[i] = static_cast<double>(parts[i]) / static_cast<double>(denom);
  }
  return p;
}

void check_grid(int grid) {
  if (grid < 2) fail("permissible set: grid resolution must be >= 2");
}

}  // namespace

std::string input_name(int party) { return "x" + std::to_string(party); }
std::string output_name(int party) { return "y" + std::to_string(party); }

NetworkSpec::NetworkSpec(int parties, std::vector<Alphabet> inputs,
                         std::vector<Alphabet> outputs, std::vector<double> channel_table)
    : parties(parties),
      input_alphabets(std::move(inputs)),
      output_alphabets(std::move(outputs)),
      channel([&] {
        if (parties < 2) fail("network: needs at least two parties");
        if (input_alphabets.size() != static_cast<std::size_t>(parties) ||
            output_alphabets.size() != static_cast<std::size_t>(parties)) {
          fail("network: alphabet count does not match the party count");
        }
        std::vector<Var> in;
        std::vector<Var> out;
        for (int i = 1; i <= parties; ++i) {
          in.push_back({input_name(i), input_alphabets[static_cast<std::size_t>(i - 1)]});
          out.push_back({output_name(i), output_alphabets[static_cast<std::size_t>(i - 1)]});
        }
        return Channel(std::move(in), std::move(out), std::move(channel_table));
      }()) {}

std::vector<Var> input_vars(const NetworkSpec& net) { return net.channel.inputs(); }

std::vector<std::string> input_names(const NetworkSpec& net) {
  std::vector<std::string> names;
  for (const Var& v : net.channel.inputs()) names.push_back(v.name);
  return names;
}

PermissibleSet PermissibleSet::all(int grid) {
  check_grid(grid);
  PermissibleSet psi;
  psi.kind = Kind::All;
  psi.grid = grid;
  return psi;
}

PermissibleSet PermissibleSet::independent(int grid) {
  check_grid(grid);
  PermissibleSet psi;
  psi.kind = Kind::Independent;
  psi.grid = grid;
  return psi;
}

PermissibleSet PermissibleSet::explicit_set(std::vector<JointPMF> points) {
  if (points.empty()) fail("permissible set: explicit list is empty");
  PermissibleSet psi;
  psi.kind = Kind::Explicit;
  psi.points = std::move(points);
  return psi;
}

std::vector<JointPMF> enumerate_inputs(const NetworkSpec& net, const PermissibleSet& psi,
                                       std::size_t cap) {
  const std::vector<Var> vars = input_vars(net);
  const std::size_t cells = prob::product_size(vars);

  switch (psi.kind) {
    case PermissibleSet::Kind::Explicit: {
      for (const JointPMF& p : psi.points) {
        if (p.vars().size() != vars.size()) fail("permissible set: point dimension mismatch");
        for (std::size_t i = 0; i < vars.size(); ++i) {
          if (p.vars()[i].alphabet.size != vars[i].alphabet.size) {
            fail("permissible set: point dimension mismatch");
          }
        }
      }
      if (psi.points.size() > cap) fail("permissible set: enumeration cap exceeded");
      std::vector<JointPMF> out;
      out.reserve(psi.points.size());
      for (const JointPMF& p : psi.points) {
        out.emplace_back(vars, p.table());  // renames onto the canonical inputs
      }
      return out;
    }
    case PermissibleSet::Kind::All: {
      const std::size_t denom = static_cast<std::size_t>(psi.grid - 1);
      if (composition_count(denom, cells) > cap) {
        fail("permissible set: enumeration cap exceeded");
      }
      std::vector<JointPMF> out;
      for_each_composition(denom, cells, [&](const std::vector<std::size_t>& parts) {
        out.emplace_back(vars, grid_point(parts, denom));
      });
      return out;
    }
    case PermissibleSet::Kind::Independent: {
      const std::size_t denom = static_cast<std::size_t>(psi.grid - 1);
      std::vector<std::vector<std::vector<double>>> marginals(vars.size());
      std::size_t total = 1;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto size = static_cast<std::size_t>(vars[i].alphabet.size);
        for_each_composition(denom, size, [&](const std::vector<std::size_t>& parts) {
          marginals[i].push_back(grid_point(parts, denom));
        });
        if (total > cap / marginals[i].size()) {
          fail("permissible set: enumeration cap exceeded");
        }
        total *= marginals[i].size();
      }

      std::vector<JointPMF> out;
      out.reserve(total);
      const std::vector<std::size_t> strides = prob::strides_of(vars);
      std::vector<std::size_t> pick(vars.size(), 0);
      for (std::size_t n = 0; n < total; ++n) {
        std::vector<double> table(cells, 1.0);
        for (std::size_t e = 0; e < cells; ++e) {
          for (std::size_t i = 0; i < vars.size(); ++i) {
            const auto sym = (e / strides[i]) % static_cast<std::size_t>(vars[i].alphabet.size);
            table[e] *= marginals[i][pick[i]][sym];
          }
        }
        out.emplace_back(vars, std::move(table));
        for (std::size_t i = vars.size(); i-- > 0;) {  // odometer, last party fastest
          if (++pick[i] < marginals[i].size()) break;
          pick[i] = 0;
        }
      }
      return out;
    }
  }
  fail("permissible set: unknown kind");
}

namespace {

CutVector cut_vector_impl(const NetworkSpec& net, const JointPMF& input,
                          const std::vector<std::string>& conditioning) {
  for (int i = 1; i <= net.parties; ++i) {
    const std::size_t pos = input.var_index(input_name(i));
    if (input.vars()[pos].alphabet.size !=
        net.input_alphabets[static_cast<std::size_t>(i - 1)].size) {
      fail("cut_vector: input alphabet mismatch on " + input_name(i));
    }
  }
  const JointPMF joint = prob::compose(net.channel, input);
  const int c = region::cut_dimension(net.parties);
  std::vector<double> coords(static_cast<std::size_t>(c));
  for (int k = 1; k <= c; ++k) {
    std::vector<std::string> a;
    std::vector<std::string> b;
    std::vector<std::string> cond = conditioning;
    for (int i = 1; i <= net.parties; ++i) {
      if (k & (1 << (i - 1))) {
        a.push_back(input_name(i));
      } else {
        b.push_back(output_name(i));
        cond.push_back(input_name(i));
      }
    }
    coords[static_cast<std::size_t>(k - 1)] = prob::cmi(joint, a, b, cond);
  }
  return CutVector(net.parties, std::move(coords));
}

}  // namespace

CutVector cut_vector(const NetworkSpec& net, const JointPMF& input) {
  if (input.vars().size() != static_cast<std::size_t>(net.parties)) {
    fail("cut_vector: input must cover exactly the channel inputs");
  }
  return cut_vector_impl(net, input, {});
}

CutVector cut_vector_given(const NetworkSpec& net, const JointPMF& input,
                           const std::vector<std::string>& conditioning) {
  return cut_vector_impl(net, input, conditioning);
}

CutRegion cut_region(const NetworkSpec& net, const PermissibleSet& psi, std::size_t cap) {
  CutRegion out;
  out.inputs = enumerate_inputs(net, psi, cap);
  out.region.parties = net.parties;
  out.region.convexified = false;
  out.region.generators.reserve(out.inputs.size());
  for (const JointPMF& p : out.inputs) {
    out.region.generators.push_back(cut_vector(net, p));
  }
  return out;
}

double cut_capacity(const NetworkSpec& net, const PermissibleSet& psi, int cut_index,
                    std::size_t cap) {
  const int c = region::cut_dimension(net.parties);
  if (cut_index < 1 || cut_index > c) fail("cut_capacity: cut index out of range");
  double best = 0.0;
  for (const JointPMF& p : enumerate_inputs(net, psi, cap)) {
    best = std::max(best, cut_vector(net, p).coords[static_cast<std::size_t>(cut_index - 1)]);
  }
  return best;
}

std::optional<TimeShare> timeshare_decomposition(const CutRegion& hull, const CutVector& v) {
  if (!hull.region.convexified) fail("timeshare: region must be convexified");
  if (hull.region.generators.size() != hull.inputs.size()) {
    fail("timeshare: generator/input mapping out of sync");
  }
  const region::Membership m = region_contains(hull.region, v);
  if (!m.inside) return std::nullopt;
  TimeShare ts;
  for (const auto& [idx, w] : m.weights) {
    ts.weights.push_back(w);
    ts.inputs.push_back(hull.inputs[idx]);
  }
  return ts;
}

RateMatrix::RateMatrix(int parties, std::vector<double> entries)
    : parties(parties), entries(std::move(entries)) {
  if (parties < 2) fail("rate matrix: needs at least two parties");
  if (this->entries.size() != static_cast<std::size_t>(parties) * parties) {
    fail("rate matrix: needs m*m entries");
  }
  for (double x : this->entries) {
    if (!(x >= 0.0)) fail("rate matrix: entries must be nonnegative");
  }
}

double RateMatrix::at(int from, int to) const {
  return entries[static_cast<std::size_t>(from - 1) * parties +
                 static_cast<std::size_t>(to - 1)];
}

CutVector rate_cut_totals(const RateMatrix& rates) {
  const int c = region::cut_dimension(rates.parties);
  std::vector<double> coords(static_cast<std::size_t>(c), 0.0);
  for (int k = 1; k <= c; ++k) {
    double total = 0.0;
    for (int i = 1; i <= rates.parties; ++i) {
      if (!(k & (1 << (i - 1)))) continue;
      for (int j = 1; j <= rates.parties; ++j) {
        if (k & (1 << (j - 1))) continue;
        total += rates.at(i, j);
      }
    }
    coords[static_cast<std::size_t>(k - 1)] = total;
  }
  return CutVector(rates.parties, std::move(coords));
}

CutsetReport classical_cutset_check(const RateMatrix& rates, const NetworkSpec& net,
                                    const PermissibleSet& psi, std::size_t cap) {
  if (rates.parties != net.parties) fail("cutset check: rate matrix dimension mismatch");
  const CutVector u = rate_cut_totals(rates);
  CutRegion hull = cut_region(net, psi, cap);
  hull.region = region::convexify(std::move(hull.region));

  CutsetReport report;
  const std::size_t c = u.coords.size();
  report.slack.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    double best = 0.0;
    for (const CutVector& g : hull.region.generators) best = std::max(best, g.coords[k]);
    report.slack[k] = best - u.coords[k];
    if (u.coords[k] > best + region::kDominanceSlack) {
      report.violated_cuts.push_back(static_cast<int>(k + 1));
    }
  }
  if (auto ts = timeshare_decomposition(hull, u)) {
    report.inside = true;
    report.certificate = std::move(ts);
  }
  return report;
}

nlohmann::json to_json(const TimeShare& ts) {
  nlohmann::json qxz = nlohmann::json::array();
  for (const JointPMF& p : ts.inputs) qxz.push_back(p.table());
  return nlohmann::json{{"pz", ts.weights}, {"qxz", qxz}};
}

nlohmann::json to_json(const CutsetReport& report) {
  nlohmann::json j{{"inside", report.inside},
                   {"violated_cuts", report.violated_cuts},
                   {"slack", report.slack}};
  j["certificate"] = report.certificate ? to_json(*report.certificate) : nlohmann::json();
  return j;
}

}  // namespace cutset::net
