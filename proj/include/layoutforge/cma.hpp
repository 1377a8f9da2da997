#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"

namespace layoutforge {

inline constexpr double kEigenFloor = 1e-14;

struct CmaOptions {
  double sigma = 0.3;
  std::size_t lambda = 0;  // 0: 4 + floor(3 ln n)
  double max_sigma = std::numeric_limits<double>::infinity();
};

struct TerminationCriteria {
  std::size_t max_evaluations = 2000;
  std::size_t stagnation_window = 10;  // generations
  double relative_improvement_floor = 1e-6;
  double target_fraction = 0.95;  // 1.0 disables the progress-fraction test

  void validate() const {
    if (max_evaluations == 0 || stagnation_window == 0 || !(relative_improvement_floor > 0.0) ||
        !(target_fraction > 0.0) || target_fraction > 1.0)
      throw Error("termination criteria must be positive (target fraction in (0, 1])");
  }
};

/// (mu/mu_w, lambda) CMA-ES state, maximization convention. Strategy
/// parameters follow Hansen's defaults.
struct CmaState {
  Eigen::VectorXd mean;
  double sigma = 1.0;
  Eigen::MatrixXd C;
  Eigen::MatrixXd B;             // eigenvectors of C
  Eigen::VectorXd D;             // sqrt of eigenvalues of C
  Eigen::VectorXd pc;            // covariance path
  Eigen::VectorXd ps;            // step-size path
  std::size_t generation = 0;
  std::size_t evaluations = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  Eigen::VectorXd weights;
  double mueff = 0.0;
  double cc = 0.0, cs = 0.0, c1 = 0.0, cmu = 0.0, damps = 0.0, chiN = 0.0;
  double max_sigma = std::numeric_limits<double>::infinity();

  double best_fitness = -std::numeric_limits<double>::infinity();
  ParamVector best;

  std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
  ParamVector mean_vector() const { return ParamVector(std::vector<double>(mean.data(), mean.data() + mean.size())); }

  static CmaState create(const ParamVector& initial_mean, const CmaOptions& opts = {}) {
    const std::size_t n = initial_mean.size();
    if (n == 0) throw Error("CMA needs at least one dimension");
    if (!(opts.sigma > 0.0)) throw Error("CMA step size must be positive");
    CmaState s;
    s.mean = Eigen::Map<const Eigen::VectorXd>(initial_mean.values().data(), static_cast<Eigen::Index>(n));
    s.sigma = opts.sigma;
    s.max_sigma = opts.max_sigma;
    s.lambda = opts.lambda != 0 ? opts.lambda : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(double(n))));
    if (s.lambda < 2) throw Error("CMA population size must be at least 2");
    s.mu = s.lambda / 2;

    s.weights.resize(static_cast<Eigen::Index>(s.mu));
    for (std::size_t i = 0; i < s.mu; ++i)
      s.weights[static_cast<Eigen::Index>(i)] = std::log(double(s.mu) + 0.5) - std::log(double(i + 1));
    s.weights /= s.weights.sum();
    s.mueff = 1.0 / s.weights.squaredNorm();

    const double dn = double(n);
    s.cc = (4.0 + s.mueff / dn) / (dn + 4.0 + 2.0 * s.mueff / dn);
    s.cs = (s.mueff + 2.0) / (dn + s.mueff + 5.0);
    s.c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + s.mueff);
    s.cmu = std::min(1.0 - s.c1, 2.0 * (s.mueff - 2.0 + 1.0 / s.mueff) / ((dn + 2.0) * (dn + 2.0) + s.mueff));
    s.damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mueff - 1.0) / (dn + 1.0)) - 1.0) + s.cs;
    s.chiN = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

    s.C = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    s.B = s.C;
    s.D = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    s.pc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    s.ps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    s.best = initial_mean;
    return s;
  }

  /// Symmetrize C and refresh B, D; eigenvalues below kEigenFloor are raised
  /// to it. Throws if C cannot be repaired.
  void decompose() {
    C = 0.5 * (C + C.transpose());
    if (!C.allFinite()) throw Error("covariance matrix is not finite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    bool floored = false;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (!(ev[i] >= kEigenFloor)) {
        ev[i] = kEigenFloor;
        floored = true;
      }
    }
    B = es.eigenvectors();
    D = ev.cwiseSqrt();
    if (floored) C = B * ev.asDiagonal() * B.transpose();
    if (!D.allFinite() || D.minCoeff() <= 0.0) throw Error("covariance matrix is not positive definite");
  }
};

struct Population {
  std::vector<ParamVector> candidates;
  // clamped[k][i] != 0 when coordinate i of candidate k was moved onto a bound.
  std::vector<std::vector<std::uint8_t>> clamped;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// lambda draws from N(mean, sigma^2 C), each clamped into the box.
/// Deterministic in (seed, generation).
inline Population sample_population(const CmaState& state, const Bounds& bounds, std::uint64_t seed) {
  const std::size_t n = state.dimension();
  if (bounds.size() != n) throw DimensionMismatch(n, bounds.size());
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(state.generation + 1)));
  std::normal_distribution<double> normal(0.0, 1.0);

  Population pop;
  pop.candidates.reserve(state.lambda);
  pop.clamped.reserve(state.lambda);
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < state.lambda; ++k) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd x = state.mean + state.sigma * (state.B * state.D.cwiseProduct(z));
    std::vector<double> v(n);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[static_cast<Eigen::Index>(i)];
      v[i] = std::clamp(xi, bounds.lower[i], bounds.upper[i]);
      mask[i] = v[i] != xi;
    }
    pop.candidates.emplace_back(std::move(v));
    pop.clamped.push_back(std::move(mask));
  }
  return pop;
}

/// One generation of weighted recombination, rank-one + rank-mu covariance
/// update and cumulative step-size adaptation. Candidates are ranked by
/// fitness, descending; ties keep their input order.
inline CmaState update(const CmaState& state, std::span<const ParamVector> candidates,
                       std::span<const double> fitness) {
  if (candidates.size() != fitness.size()) throw Error("fitness count does not match population");
  if (candidates.size() < state.mu || candidates.empty()) throw Error("population smaller than mu");
  for (double f : fitness)
    if (!std::isfinite(f)) throw Error("non-finite fitness");
  const std::size_t n = state.dimension();
  for (const auto& c : candidates)
    if (c.size() != n) throw DimensionMismatch(n, c.size());

  CmaState s = state;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

  s.evaluations += candidates.size();
  if (fitness[order[0]] > s.best_fitness) {
    s.best_fitness = fitness[order[0]];
    s.best = candidates[order[0]];
  }

  const auto as_vec = [&](const ParamVector& p) {
    return Eigen::Map<const Eigen::VectorXd>(p.values().data(), static_cast<Eigen::Index>(n));
  };
  const Eigen::VectorXd old_mean = state.mean;
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.mu));
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < s.mu; ++k) {
    const auto x = as_vec(candidates[order[k]]);
    new_mean += s.weights[static_cast<Eigen::Index>(k)] * x;
    Y.col(static_cast<Eigen::Index>(k)) = (x - old_mean) / state.sigma;
  }
  const Eigen::VectorXd step = (new_mean - old_mean) / state.sigma;
  s.mean = new_mean;

  const Eigen::MatrixXd invsqrtC = state.B * state.D.cwiseInverse().asDiagonal() * state.B.transpose();
  s.ps = (1.0 - s.cs) * state.ps + std::sqrt(s.cs * (2.0 - s.cs) * s.mueff) * (invsqrtC * step);
  const double gen = double(state.generation + 1);
  const double ps_norm = s.ps.norm();
  const bool hsig =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.cs, 2.0 * gen)) < (1.4 + 2.0 / (double(n) + 1.0)) * s.chiN;
  s.pc = (1.0 - s.cc) * state.pc + (hsig ? std::sqrt(s.cc * (2.0 - s.cc) * s.mueff) : 0.0) * step;

  const double delta_h = hsig ? 0.0 : s.cc * (2.0 - s.cc);
  s.C = (1.0 - s.c1 - s.cmu + s.c1 * delta_h) * state.C + s.c1 * (s.pc * s.pc.transpose()) +
        s.cmu * (Y * s.weights.asDiagonal() * Y.transpose());

  s.sigma = state.sigma * std::exp((s.cs / s.damps) * (ps_norm / s.chiN - 1.0));
  s.sigma = std::min(s.sigma, s.max_sigma);
  if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) s.sigma = std::max(state.sigma, std::numeric_limits<double>::min());
  s.generation = state.generation + 1;
  s.decompose();
  return s;
}

/// True when the evaluation budget is spent, when the best value of the last
/// `stagnation_window` entries improves on everything before it by less than
/// the relative floor, or when that window gained less than
/// (1 - target_fraction) of the total progress so far.
inline bool terminated(const CmaState& state, const TerminationCriteria& criteria,
                       std::span<const double> history) {
  if (state.evaluations >= criteria.max_evaluations) return true;
  const std::size_t w = criteria.stagnation_window;
  if (history.size() <= w) return false;
  const auto split = history.end() - static_cast<std::ptrdiff_t>(w);
  const double before = *std::max_element(history.begin(), split);
  const double recent = *std::max_element(split, history.end());
  const double gain = recent - before;
  if (gain <= criteria.relative_improvement_floor * std::max(std::abs(before), 1e-12)) return true;
  if (criteria.target_fraction < 1.0) {
    const double total = std::max(before, recent) - history.front();
    if (total > 0.0 && gain < (1.0 - criteria.target_fraction) * total) return true;
  }
  return false;
}

/// For fitness that carries a penalty. `settled` is the index of the first
/// history entry whose incumbent paid no penalty, or npos. Until then only
/// the budget ends the search: a plateau outside the admissible set is not
/// convergence. Afterwards the usual tests see the entries from `settled` on,
/// so the climb out of the penalty does not count as progress.
inline bool terminated(const CmaState& state, const TerminationCriteria& criteria, std::span<const double> history,
                       std::size_t settled) {
  if (state.evaluations >= criteria.max_evaluations) return true;
  if (settled >= history.size()) return false;
  return terminated(state, criteria, history.subspan(settled));
}

}  // namespace layoutforge
