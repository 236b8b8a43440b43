#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pssim/ode.hpp"
#include "pssim/params.hpp"

namespace pssim::ladder {

// Classical master equation over configuration counts: k atoms in the
// emitting 2P level, m annihilated, g = N - k - m in the 1S pool. Exact for
// diagonal collective decay from symmetric states; valid only without the
// drive and with the 3D level unpopulated.
//
// Flows: emission (k,m) -> (k-1,m) at gamma1 * k * (1 + mu * g), and
// annihilation (k,m) -> (k,m+1) at gamma2 * g.

struct LadderDistribution {
  std::int64_t n_atoms = 0;
  // Active rectangular window, inclusive bounds; cells with k + m > N are
  // structurally zero.
  std::int64_t k_lo = 0, k_hi = 0, m_lo = 0, m_hi = 0;
  std::vector<double> p;  // row-major over (k - k_lo, m - m_lo)

  double& at(std::int64_t k, std::int64_t m);
  double at(std::int64_t k, std::int64_t m) const;
};

// Point mass at (k0, m0).
LadderDistribution delta_distribution(std::int64_t n_atoms, std::int64_t k0, std::int64_t m0);

class LadderGenerator {
 public:
  // mu1_product > 0 requests the scale-matched effective collectivity
  // mu = mu1_product / n_atoms (it may exceed 1; only the product
  // mu * N is physical in the reduced dynamics). Otherwise the geometric
  // mu1 from params is used. Throws ConfigError when the drive is on.
  LadderGenerator(const ValidatedParams& params, double mu1_product = 0.0);

  std::int64_t n_atoms() const { return n_; }
  double mu_effective() const { return mu_; }
  double emission_rate(std::int64_t k, std::int64_t m) const;
  double annihilation_rate(std::int64_t k, std::int64_t m) const;

  // Full-triangle right-hand side over the flattened state indexed by
  // triangle_index, for small-N validation against the exact engine.
  ode::Rhs dense_rhs() const;

 private:
  std::int64_t n_ = 0;
  double gamma1_ = 0.0, gamma2_ = 0.0, mu_ = 0.0;
};

// Flattened layout of the triangle {0 <= k, 0 <= m, k + m <= N}.
std::size_t triangle_size(std::int64_t n_atoms);
std::size_t triangle_index(std::int64_t n_atoms, std::int64_t k, std::int64_t m);

struct LadderTrajectory {
  std::vector<double> t;
  std::vector<double> p1, p2, p3;  // <k>/N, <g>/N, <m>/N
  ode::StepStats stats;
  double sum_drift = 0.0;        // max |sum P - 1|, clipped mass included
  double min_probability = 0.0;  // most negative cell seen
  double clipped_mass = 0.0;     // total probability dropped by window shrinks
  LadderDistribution final_state;
};

struct LadderOptions {
  double grow_eps = 1e-18;  // boundary occupancy that triggers expansion
  double clip_eps = 1e-22;  // edge rows/columns below this are dropped
};

// Adaptive embedded Runge-Kutta evolution over a moving active window, so
// cost tracks the occupied cells instead of the full (N+1)(N+2)/2 triangle.
// The dropped probability is audited; exceeding 1e-9 aborts.
LadderTrajectory evolve_ladder(const LadderDistribution& p0, const LadderGenerator& gen,
                               const ode::IntegrationSpec& spec,
                               const LadderOptions& options = {});

}  // namespace pssim::ladder
