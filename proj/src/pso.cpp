#include "rgbtrack/pso.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>

namespace rgbtrack {

double SwarmConfig::constriction() const {
  const double psi = c1 + c2;
  return 2.0 / std::abs(2.0 - psi - std::sqrt(psi * psi - 4.0 * psi));
}

void SwarmConfig::validate() const {
  if (particles < 1) throw BadConfig("pso: need at least one particle");
  if (generations < 0) throw BadConfig("pso: negative generation count");
  if (!(c1 + c2 > 4.0)) throw BadConfig("pso: c1 + c2 must exceed 4");
  if (lower.size() != upper.size() || init_range.size() != lower.size())
    throw BadConfig("pso: bounds and init ranges must have equal length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw BadConfig("pso: lower bound above upper bound in dimension " + std::to_string(i));
    if (!(init_range[i] >= 0.0)) throw BadConfig("pso: negative init range");
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser applied to a running combination.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

namespace {

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal01(std::mt19937_64& rng) {
  // Box-Muller, first output only.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

constexpr std::uint64_t kInitStream = 0xA11CEULL;

}  // namespace

SwarmState init_swarm(std::span<const double> center, const SwarmConfig& config) {
  config.validate();
  const std::size_t n = config.dimension();
  if (center.size() != n) throw DimensionMismatch("pso: center dimension does not match the bounds");
  for (std::size_t d = 0; d < n; ++d)
    if (center[d] < config.lower[d] || center[d] > config.upper[d])
      throw BadConfig("pso: center outside the bounds in dimension " + std::to_string(d));

  SwarmState s;
  s.particles.resize(static_cast<std::size_t>(config.particles));
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    Particle& p = s.particles[i];
    p.position.assign(center.begin(), center.end());
    p.velocity.assign(n, 0.0);
    if (i > 0) {
      std::mt19937_64 rng(mix_seed(config.seed, kInitStream, i));
      for (std::size_t d = 0; d < n; ++d) {
        const double range = config.init_range[d];
        const double x = center[d] + 0.5 * range * normal01(rng);
        const double lo = std::max(config.lower[d], center[d] - range);
        const double hi = std::min(config.upper[d], center[d] + range);
        p.position[d] = std::clamp(x, lo, hi);
      }
    }
    p.best_position = p.position;
  }
  s.global_best.assign(center.begin(), center.end());
  return s;
}

void update_bests(SwarmState& swarm, std::span<const double> scores) {
  if (scores.size() != swarm.particles.size()) throw DimensionMismatch("pso: one score per particle required");
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    if (scores[i] > p.best_score) {
      p.best_score = scores[i];
      p.best_position = p.position;
    }
    if (scores[i] > swarm.global_best_score) {
      swarm.global_best_score = scores[i];
      swarm.global_best = p.position;
    }
  }
}

void move_particles(SwarmState& swarm, const SwarmConfig& config) {
  const double k = config.constriction();
  const std::size_t n = swarm.global_best.size();
  ++swarm.generation;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    std::mt19937_64 rng(mix_seed(config.seed, i, static_cast<std::uint64_t>(swarm.generation)));
    double r1 = uniform01(rng), r2 = uniform01(rng);
    for (std::size_t d = 0; d < n; ++d) {
      if (config.coefficients == RandomCoefficients::PerDimension && d > 0) {
        r1 = uniform01(rng);
        r2 = uniform01(rng);
      }
      double v = k * (p.velocity[d] + config.c1 * r1 * (p.best_position[d] - p.position[d]) +
                      config.c2 * r2 * (swarm.global_best[d] - p.position[d]));
      double x = p.position[d] + v;
      if (x < config.lower[d]) {
        x = config.lower[d];
        v = 0.0;
      } else if (x > config.upper[d]) {
        x = config.upper[d];
        v = 0.0;
      }
      p.velocity[d] = v;
      p.position[d] = x;
    }
  }
}

SwarmState step(SwarmState swarm, std::span<const double> scores, const SwarmConfig& config) {
  update_bests(swarm, scores);
  move_particles(swarm, config);
  return swarm;
}

OptimizeResult optimize(const Objective& objective, std::span<const double> center, const SwarmConfig& config) {
  SwarmState swarm = init_swarm(center, config);
  OptimizeResult result;
  const int generations = std::max(config.generations, 1);
  const int np = static_cast<int>(swarm.particles.size());
  std::vector<double> scores(swarm.particles.size());
  for (int g = 0; g < generations; ++g) {
    if (g > 0) move_particles(swarm, config);
    std::vector<std::exception_ptr> errors(swarm.particles.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < np; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        scores[idx] = objective(swarm.particles[idx].position);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    result.evaluations += swarm.particles.size();
    update_bests(swarm, scores);
    result.trace.push_back(swarm.global_best_score);
  }
  result.best = swarm.global_best;
  result.best_score = swarm.global_best_score;
  return result;
}

}  // namespace rgbtrack
