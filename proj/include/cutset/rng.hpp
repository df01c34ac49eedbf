#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cutset/prob.hpp"

namespace cutset::rng {

// mt19937_64 with hand-rolled variate transforms so that a seed yields the
// same draws on every standard library.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int n) {  // [0, n)
    return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
  }

  // Uniform point on the probability simplex (Dirichlet with unit weights).
  std::vector<double> dirichlet(std::size_t n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
      x = -std::log(1.0 - uniform01());
      sum += x;
    }
    if (sum <= 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    for (double& x : v) x /= sum;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

// Stream of per-case seeds derived from one master seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline prob::JointPMF random_joint(SeededRng& r, std::vector<prob::Var> vars) {
  auto table = r.dirichlet(prob::product_size(vars));
  return prob::JointPMF(std::move(vars), std::move(table));
}

inline prob::Channel random_channel(SeededRng& r, std::vector<prob::Var> inputs,
                                    std::vector<prob::Var> outputs) {
  const std::size_t rows = prob::product_size(inputs);
  const std::size_t cols = prob::product_size(outputs);
  std::vector<double> table;
  table.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = r.dirichlet(cols);
    table.insert(table.end(), row.begin(), row.end());
  }
  return prob::Channel(std::move(inputs), std::move(outputs), std::move(table));
}

}  // namespace cutset::rng
