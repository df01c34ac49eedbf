#include "cutset/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cutset::region {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr double kPivotEps = 1e-12;

// Phase-1 simplex for A x = b, x >= 0 with b >= 0: minimizes the sum of one
// artificial variable per row (Bland's rule, dense tableau, rows scaled to
// unit max magnitude). Feasible when the residual falls below `tol`.
struct Phase1Result {
  bool feasible = false;
  std::vector<double> x;  // structural variables only
  double residual = 0.0;
};

Phase1Result phase1_simplex(std::vector<std::vector<double>> a, std::vector<double> b,
                            double tol) {
  const std::size_t rows = a.size();
  const std::size_t n = rows == 0 ? 0 : a[0].size();

  std::vector<double> row_scale(rows, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double m = std::abs(b[r]);
    for (double x : a[r]) m = std::max(m, std::abs(x));
    if (m > 1.0) {
      row_scale[r] = m;
      for (double& x : a[r]) x /= m;
      b[r] /= m;
    }
  }

  const std::size_t cols = n + rows;  // structural + artificial
  std::vector<std::vector<double>> t(rows, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) t[r][j] = a[r][j];
    t[r][n + r] = 1.0;
    basis[r] = n + r;
  }
  std::vector<double> z(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < rows; ++r) z[j] -= t[r][j];
  }

  const std::size_t max_iters = 1000 + 200 * cols;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iters) throw std::runtime_error("simplex: iteration limit reached");
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {  // Bland: first improving column
      if (z[j] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = rows;
    double best = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (t[r][enter] > kPivotEps) {
        const double ratio = b[r] / t[r][enter];
        if (leave == rows || ratio < best - kPivotEps ||
            (ratio < best + kPivotEps && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == rows) break;  // unbounded cannot happen in phase 1

    const double piv = t[leave][enter];
    for (double& x : t[leave]) x /= piv;
    b[leave] /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = t[r][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[r][j] -= f * t[leave][j];
      t[r][enter] = 0.0;
      b[r] -= f * b[leave];
      if (b[r] < 0.0 && b[r] > -kPivotEps) b[r] = 0.0;
    }
    const double zf = z[enter];
    for (std::size_t j = 0; j < cols; ++j) z[j] -= zf * t[leave][j];
    z[enter] = 0.0;
    basis[leave] = enter;
  }

  Phase1Result res;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < n) {
      res.x[basis[r]] = b[r];
    } else {
      res.residual += std::abs(b[r]) * row_scale[r];
    }
  }
  res.feasible = res.residual <= tol;
  return res;
}

// Convex-combination membership: lambda >= 0, sum lambda = 1,
// sum lambda_i g_i - s = v with slacks s >= 0.
Membership hull_contains(const std::vector<CutVector>& gens, const CutVector& v) {
  const std::size_t c = v.coords.size();
  const std::size_t n_gen = gens.size();
  const std::size_t rows = c + 1;
  std::vector<std::vector<double>> a(rows, std::vector<double>(n_gen + c, 0.0));
  std::vector<double> b(rows, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n_gen; ++i) a[k][i] = gens[i].coords[k];
    a[k][n_gen + k] = -1.0;
    b[k] = v.coords[k];
  }
  for (std::size_t i = 0; i < n_gen; ++i) a[c][i] = 1.0;
  b[c] = 1.0;

  const Phase1Result sol = phase1_simplex(std::move(a), std::move(b), kFeasibilityTol);
  Membership m;
  m.inside = sol.feasible;
  if (!m.inside) return m;

  double total = 0.0;
  for (std::size_t i = 0; i < n_gen; ++i) {
    if (sol.x[i] > 1e-12) {
      m.weights.emplace_back(i, sol.x[i]);
      total += sol.x[i];
    }
  }
  if (total > 0.0) {
    for (auto& [idx, w] : m.weights) w /= total;
  }
  reduce_support(m.weights, gens, c + 1);
  return m;
}

}  // namespace

int cut_dimension(int parties) {
  if (parties < 2 || parties > 20) fail("cut dimension: party count out of range");
  return (1 << parties) - 2;
}

std::vector<int> cut_members(int cut_index, int parties) {
  if (cut_index < 1 || cut_index > cut_dimension(parties)) fail("cut index out of range");
  std::vector<int> members;
  for (int i = 1; i <= parties; ++i) {
    if (cut_index & (1 << (i - 1))) members.push_back(i);
  }
  return members;
}

CutVector::CutVector(int parties, std::vector<double> coords)
    : parties(parties), coords(std::move(coords)) {
  if (this->coords.size() != static_cast<std::size_t>(cut_dimension(parties))) {
    fail("cut vector: coordinate count does not match the party count");
  }
  for (double& x : this->coords) {
    if (x < 0.0) {
      if (x < -kDominanceSlack) fail("cut vector: negative coordinate");
      x = 0.0;
    }
  }
}

bool dominates(const CutVector& a, const CutVector& b, double slack) {
  if (a.coords.size() != b.coords.size()) fail("dominates: dimension mismatch");
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    if (a.coords[i] + slack < b.coords[i]) return false;
  }
  return true;
}

Membership region_contains(const Region& r, const CutVector& v) {
  if (v.parties != r.parties) fail("region_contains: dimension mismatch");
  if (r.convexified) return hull_contains(r.generators, v);
  Membership m;
  for (std::size_t i = 0; i < r.generators.size(); ++i) {
    if (dominates(r.generators[i], v)) {
      m.inside = true;
      m.weights.emplace_back(i, 1.0);
      return m;
    }
  }
  return m;
}

Region minkowski_sum(const Region& r1, const Region& r2) {
  if (r1.parties != r2.parties) fail("minkowski_sum: dimension mismatch");
  if (r1.convexified != r2.convexified) {
    fail("minkowski_sum: operands must agree on convexification");
  }
  Region out;
  out.parties = r1.parties;
  out.convexified = r1.convexified;
  out.generators.reserve(r1.generators.size() * r2.generators.size());
  for (const CutVector& g1 : r1.generators) {
    for (const CutVector& g2 : r2.generators) {
      std::vector<double> sum(g1.coords.size());
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = g1.coords[k] + g2.coords[k];
      out.generators.emplace_back(out.parties, std::move(sum));
    }
  }
  return out;
}

Region scale(const Region& r, double t) {
  if (!(t >= 0.0)) fail("scale: factor must be nonnegative");
  Region out;
  out.parties = r.parties;
  out.convexified = r.convexified;
  out.generators.reserve(r.generators.size());
  for (const CutVector& g : r.generators) {
    std::vector<double> coords(g.coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = t * g.coords[k];
    out.generators.emplace_back(out.parties, std::move(coords));
  }
  return out;
}

Region convexify(Region r, bool prune) {
  r.convexified = true;
  if (!prune || r.generators.size() < 2) return r;
  std::vector<CutVector> kept = r.generators;
  std::size_t i = 0;
  while (i < kept.size() && kept.size() > 1) {
    std::vector<CutVector> rest;
    rest.reserve(kept.size() - 1);
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (j != i) rest.push_back(kept[j]);
    }
    if (hull_contains(rest, kept[i]).inside) {
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  r.generators = std::move(kept);
  return r;
}

void reduce_support(std::vector<std::pair<std::size_t, double>>& combo,
                    const std::vector<CutVector>& generators, std::size_t max_support) {
  std::erase_if(combo, [](const auto& e) { return e.second <= 0.0; });
  while (combo.size() > max_support) {
    const std::size_t s = combo.size();
    const std::size_t dim = generators[combo[0].first].coords.size();
    const std::size_t rows = dim + 1;

    // Row-echelon reduction of the (coords; ones) matrix of the support.
    std::vector<std::vector<double>> m(rows, std::vector<double>(s));
    for (std::size_t i = 0; i < s; ++i) {
      const CutVector& g = generators[combo[i].first];
      for (std::size_t k = 0; k < dim; ++k) m[k][i] = g.coords[k];
      m[dim][i] = 1.0;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)
    std::size_t row = 0;
    for (std::size_t col = 0; col < s && row < rows; ++col) {
      std::size_t best = row;
      for (std::size_t r = row + 1; r < rows; ++r) {
        if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
      }
      if (std::abs(m[best][col]) < kPivotEps) continue;
      std::swap(m[row], m[best]);
      for (std::size_t r = row + 1; r < rows; ++r) {
        const double f = m[r][col] / m[row][col];
        if (f == 0.0) continue;
        for (std::size_t j = col; j < s; ++j) m[r][j] -= f * m[row][j];
        m[r][col] = 0.0;
      }
      pivots.emplace_back(row, col);
      ++row;
    }

    std::vector<bool> is_pivot_col(s, false);
    for (const auto& [pr, pc] : pivots) is_pivot_col[pc] = true;
    std::size_t free_col = s;
    for (std::size_t j = 0; j < s; ++j) {
      if (!is_pivot_col[j]) {
        free_col = j;
        break;
      }
    }
    if (free_col == s) break;  // full column rank; cannot shrink further

    std::vector<double> mu(s, 0.0);
    mu[free_col] = 1.0;
    for (std::size_t p = pivots.size(); p-- > 0;) {
      const auto [pr, pc] = pivots[p];
      double acc = 0.0;
      for (std::size_t j = pc + 1; j < s; ++j) acc += m[pr][j] * mu[j];
      mu[pc] = -acc / m[pr][pc];
    }

    bool has_positive = false;
    for (double x : mu) {
      if (x > kPivotEps) {
        has_positive = true;
        break;
      }
    }
    if (!has_positive) {
      for (double& x : mu) x = -x;
    }

    double t = 0.0;
    std::size_t drop = s;
    for (std::size_t i = 0; i < s; ++i) {
      if (mu[i] > kPivotEps) {
        const double ratio = combo[i].second / mu[i];
        if (drop == s || ratio < t) {
          t = ratio;
          drop = i;
        }
      }
    }
    if (drop == s) break;

    for (std::size_t i = 0; i < s; ++i) combo[i].second -= t * mu[i];
    combo[drop].second = 0.0;
    std::erase_if(combo, [](const auto& e) { return e.second <= 1e-14; });
  }
}

nlohmann::json to_json(const Region& r) {
  nlohmann::json gens = nlohmann::json::array();
  for (const CutVector& g : r.generators) gens.push_back(g.coords);
  return nlohmann::json{{"m", r.parties}, {"convexified", r.convexified}, {"generators", gens}};
}

Region region_from_json(const nlohmann::json& j) {
  Region r;
  r.parties = j.at("m").get<int>();
  r.convexified = j.at("convexified").get<bool>();
  for (const auto& g : j.at("generators")) {
    r.generators.emplace_back(r.parties, g.get<std::vector<double>>());
  }
  return r;
}

}  // namespace cutset::region
