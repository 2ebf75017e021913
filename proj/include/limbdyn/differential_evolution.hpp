#pragma once

// DE/best/1/bin with an extra uniform-resampling mutation and bound
// clamping. Generic over the decision vector so it can be tested on small
// problems; the axis-placement problem lives in axis_optimizer.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "limbdyn/errors.hpp"

namespace limbdyn {

struct DEConfig {
  std::size_t population_size = 100;
  double amplification = 0.6;    // F
  double crossover_prob = 0.8;   // CR
  double mutation_prob = 0.1;
  std::size_t max_generations = 2000;
  std::uint64_t rng_seed = 20190501;
  // Worker threads for cost evaluation; results do not depend on it.
  unsigned threads = 1;

  void validate() const {
    if (population_size < 4) throw ConfigError("DE population_size must be >= 4");
    if (!(amplification > 0.0 && amplification <= 2.0)) {
      throw ConfigError("DE amplification F must lie in (0, 2]");
    }
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
      throw ConfigError("DE crossover_prob must lie in [0, 1]");
    }
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
      throw ConfigError("DE mutation_prob must lie in [0, 1]");
    }
    if (threads == 0) throw ConfigError("DE threads must be >= 1");
  }
};

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0) {
      throw ConfigError("bounds must be non-empty and of equal length");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) throw ConfigError("bounds require lb <= ub for every element");
    }
  }

  bool contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

using CostFunction = std::function<double(const Eigen::VectorXd&)>;

/// Random source with a portable mapping from raw 64-bit draws to uniform
/// reals and indices (std::uniform_*_distribution output is
/// implementation-defined).
class DeRng {
 public:
  explicit DeRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

 private:
  std::mt19937_64 engine_;
};

/// V = best + F (r1 - r2)
inline Eigen::VectorXd de_perturb(const Eigen::VectorXd& best, const Eigen::VectorXd& r1,
                                  const Eigen::VectorXd& r2, double amplification) {
  return best + amplification * (r1 - r2);
}

struct Population {
  std::vector<Eigen::VectorXd> members;
  std::vector<double> costs;

  std::size_t best_index() const {
    return static_cast<std::size_t>(std::min_element(costs.begin(), costs.end()) - costs.begin());
  }
};

namespace detail {

inline double safe_cost(const CostFunction& fn, const Eigen::VectorXd& x) {
  const double c = fn(x);
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

inline std::vector<double> evaluate_all(const CostFunction& fn, const std::vector<Eigen::VectorXd>& xs,
                                        unsigned threads) {
  std::vector<double> out(xs.size());
  if (threads <= 1 || xs.size() < 2) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = safe_cost(fn, xs[i]);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (xs.size() + threads - 1) / threads;
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    const std::size_t stop = std::min(xs.size(), start + chunk);
    pool.emplace_back([&, start, stop] {
      for (std::size_t i = start; i < stop; ++i) out[i] = safe_cost(fn, xs[i]);
    });
  }
  return out;
}

}  // namespace detail

inline Population de_initial_population(const Bounds& bounds, const DEConfig& config, DeRng& rng,
                                        const CostFunction& cost) {
  Population pop;
  pop.members.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    Eigen::VectorXd x(bounds.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(bounds.lower[j], bounds.upper[j]);
    pop.members.push_back(std::move(x));
  }
  pop.costs = detail::evaluate_all(cost, pop.members, config.threads);
  return pop;
}

/// One synchronous generation. All random draws happen before any cost is
/// evaluated, so the outcome is independent of the evaluation order.
inline Population de_generation(const Population& pop, const DEConfig& config, const Bounds& bounds,
                                const CostFunction& cost, DeRng& rng) {
  const std::size_t np = pop.members.size();
  if (np < 4 || pop.costs.size() != np) {
    throw ConfigError("de_generation: population needs >= 4 evaluated members");
  }
  const std::size_t best = pop.best_index();
  const Eigen::Index dim = bounds.size();

  std::vector<Eigen::VectorXd> trials;
  trials.reserve(np);
  for (std::size_t i = 0; i < np; ++i) {
    std::size_t r1, r2;
    do {
      r1 = rng.index(np);
    } while (r1 == i || r1 == best);
    do {
      r2 = rng.index(np);
    } while (r2 == i || r2 == best || r2 == r1);

    Eigen::VectorXd donor =
        de_perturb(pop.members[best], pop.members[r1], pop.members[r2], config.amplification);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (rng.uniform() < config.mutation_prob) donor[j] = rng.uniform(bounds.lower[j], bounds.upper[j]);
    }
    const Eigen::Index forced = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(dim)));
    Eigen::VectorXd trial = pop.members[i];
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (j == forced || rng.uniform() < config.crossover_prob) trial[j] = donor[j];
    }
    trials.push_back(bounds.clamp(trial));
  }

  const std::vector<double> trial_costs = detail::evaluate_all(cost, trials, config.threads);
  Population next = pop;
  for (std::size_t i = 0; i < np; ++i) {
    if (trial_costs[i] < pop.costs[i]) {
      next.members[i] = std::move(trials[i]);
      next.costs[i] = trial_costs[i];
    }
  }
  return next;
}

struct DEResult {
  Eigen::VectorXd best;
  double best_cost = std::numeric_limits<double>::infinity();
  /// Entry 0 is the initial population; entry g is after generation g.
  std::vector<double> cost_history;
};

inline DEResult de_minimize(const CostFunction& cost, const Bounds& bounds, const DEConfig& config) {
  config.validate();
  bounds.validate();
  DeRng rng(config.rng_seed);
  Population pop = de_initial_population(bounds, config, rng, cost);

  DEResult result;
  result.cost_history.reserve(config.max_generations + 1);
  result.cost_history.push_back(pop.costs[pop.best_index()]);
  for (std::size_t g = 0; g < config.max_generations; ++g) {
    pop = de_generation(pop, config, bounds, cost, rng);
    result.cost_history.push_back(pop.costs[pop.best_index()]);
  }
  const std::size_t best = pop.best_index();
  result.best = pop.members[best];
  result.best_cost = pop.costs[best];
  return result;
}

}  // namespace limbdyn
