#pragma once

#include <complex>
#include <vector>

#include "pssim/ode.hpp"
#include "pssim/params.hpp"

namespace pssim::meanfield {

// Per-atom averages: four level occupations plus the three retained
// coherences. The annihilated level carries no coherences.
struct MeanFieldState {
  double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
  std::complex<double> s01{0.0, 0.0};
  std::complex<double> s12{0.0, 0.0};
  std::complex<double> s02{0.0, 0.0};
};

// Flattening used by the integrator:
// [p0, p1, p2, p3, Re s01, Im s01, Re s12, Im s12, Re s02, Im s02].
constexpr int kStateSize = 10;

std::vector<double> pack(const MeanFieldState& s);
MeanFieldState unpack(const double* y);

// Throws RuntimeFailure when an invariant (occupations in range, unit sum,
// |s_ab|^2 <= p_a p_b) is violated beyond tol_scale times its base tolerance.
void check_state(const MeanFieldState& s, double t, double tol_scale);

// Nonlinear single-atom equations obtained by factorizing the interatomic
// correlators of the collective master equation; collective channels enter
// solely through the products mu_i (N-1) gamma_i.
ode::Rhs build_meanfield_rhs(const ValidatedParams& params);

// tipping(eps) sets each zero coherence s_ab to eps*sqrt(p_a p_b);
// SeedPolicy::none returns the state untouched. Throws ConfigError outside
// eps in [0, 1].
MeanFieldState seed_coherences(const MeanFieldState& s, SeedPolicy policy, double epsilon);

MeanFieldState state_from_fractions(const InitialCondition& init, long n_atoms);

struct TimedState {
  double t;
  MeanFieldState state;
};

struct MeanFieldTrajectory {
  std::vector<TimedState> samples;
  ode::StepStats stats;
  double max_sum_drift = 0.0;     // max |p0+p1+p2+p3 - 1|
  double min_population = 0.0;    // most negative occupation seen
  double max_cs_excess = 0.0;     // max |s_ab|^2 - p_a p_b
};

// Integrates the factorized equations and audits the state invariants at
// every sample; a breach beyond 10x the type tolerances aborts with
// diagnostics.
MeanFieldTrajectory evolve_meanfield(const MeanFieldState& state0, const ode::Rhs& rhs,
                                     const ode::IntegrationSpec& spec);

}  // namespace pssim::meanfield
