#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rgbtrack/core.hpp"

namespace rgbtrack {

/// How the random attraction coefficients r1, r2 are drawn.
enum class RandomCoefficients {
  PerDimension,  ///< fresh r1, r2 for every dimension of every particle
  PerParticle,   ///< one r1, r2 pair per particle per generation
};

struct SwarmConfig {
  int particles = 32;
  int generations = 32;
  double c1 = 2.8;  ///< cognitive component
  double c2 = 1.3;  ///< social component
  std::uint64_t seed = 1;
  std::vector<double> lower;       ///< per-dimension search bounds
  std::vector<double> upper;
  std::vector<double> init_range;  ///< half-width of the initialisation window
  RandomCoefficients coefficients = RandomCoefficients::PerDimension;

  /// Clerc's constriction factor 2 / |2 - psi - sqrt(psi^2 - 4 psi)|,
  /// psi = c1 + c2.
  double constriction() const;
  std::size_t dimension() const { return lower.size(); }
  void validate() const;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_score = -std::numeric_limits<double>::infinity();
};

struct SwarmState {
  std::vector<Particle> particles;
  std::vector<double> global_best;
  double global_best_score = -std::numeric_limits<double>::infinity();
  int generation = 0;  ///< number of completed position updates
};

/// Particle 0 sits exactly at `center`; the rest are drawn from a normal
/// distribution (sigma = half the init range) clamped to the init window and
/// the bounds. Velocities start at zero.
SwarmState init_swarm(std::span<const double> center, const SwarmConfig& config);

/// Folds the scores of the current positions into the personal and global
/// bests (ties keep the earlier particle).
void update_bests(SwarmState& swarm, std::span<const double> scores);

/// Velocity and position update with boundary truncation. Random draws come
/// from streams keyed by (seed, particle, generation).
void move_particles(SwarmState& swarm, const SwarmConfig& config);

/// update_bests followed by move_particles.
SwarmState step(SwarmState swarm, std::span<const double> scores, const SwarmConfig& config);

using Objective = std::function<double(std::span<const double>)>;

struct OptimizeResult {
  std::vector<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;  ///< global best after each generation
  std::size_t evaluations = 0;
};

/// Maximises `objective`. The initial population counts as the first
/// generation, so the objective runs particles x generations times (one
/// evaluated population when generations is 0). Evaluations within a
/// generation may run concurrently; results do not depend on scheduling.
OptimizeResult optimize(const Objective& objective, std::span<const double> center, const SwarmConfig& config);

/// 64-bit mixing of a key tuple into an RNG seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace rgbtrack
