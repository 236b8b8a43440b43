#pragma once

#include <string>
#include <vector>

#include "pssim/params.hpp"

namespace pssim::observables {

// Worst-case invariant drift recorded while a trajectory was produced.
// trace_drift is max |sum of occupations - 1| (exact engine: |tr rho - 1|);
// positivity_floor is the most negative occupation (exact engine: smallest
// density-matrix eigenvalue) seen at any sample.
struct AuditBlock {
  double trace_drift = 0.0;
  double positivity_floor = 0.0;
};

struct LifetimeResult {
  double tau = 0.0;
  // Set when the run never annihilates, so tau (the window end) only bounds
  // the true lifetime from below.
  bool lower_bound = false;
};

struct Metrics {
  LifetimeResult tau_lifetime;
  double extension_factor = 0.0;  // NaN when the run has no reference
  std::vector<double> burst_times;
  double t_delay_estimate = 0.0;  // NaN with fewer than two bursts
};

// One engine run reduced to per-atom series on a uniform time grid, plus
// the metrics derived from those series.
struct RunResult {
  std::string engine;  // "exact" | "ladder" | "meanfield"
  ValidatedParams params;
  std::vector<double> t;
  std::vector<double> p0, p1, p2, p3;
  std::vector<double> s01_abs, s12_abs, s02_abs;
  std::vector<double> intensity;
  Metrics metrics;
  AuditBlock audit;
};

// Returns the annihilated-fraction column after asserting it never
// decreases by more than tol between consecutive samples.
std::vector<double> annihilation_probability(const RunResult& run, double tol = 1e-9);

// Photon emission rate I(t) = -N d/dt(2 p0 + p1), the loss rate of the
// remaining radiative content, from smoothed central differences. The
// annihilation channel drains a level with zero radiative content, so it
// contributes nothing and needs no explicit subtraction.
std::vector<double> emission_intensity(const std::vector<double>& t,
                                       const std::vector<double>& p0,
                                       const std::vector<double>& p1, double n_atoms);

// Interior local maxima whose topographic prominence is at least
// prominence * (max - min) of the signal, ordered in time. The relative
// threshold makes the result invariant under positive affine rescaling.
std::vector<double> detect_bursts(const std::vector<double>& t,
                                  const std::vector<double>& signal, double prominence = 0.05);

// First time the annihilated fraction reaches (1 - 1/e) of its final value,
// linearly interpolated between samples.
LifetimeResult lifetime(const std::vector<double>& t, const std::vector<double>& p3);

// lifetime(run) / lifetime(reference); throws RuntimeFailure when the
// reference lifetime is zero or only a lower bound.
double extension_factor(const RunResult& run, const RunResult& reference);

// Mean spacing of consecutive burst times; NaN with fewer than two bursts.
double t_delay_estimate(const std::vector<double>& burst_times);

// Fills run.metrics from the stored series (bursts are detected on the
// intensity column). Pass the matched independent-atom run to also fill
// extension_factor, nullptr to leave it NaN.
void compute_metrics(RunResult& run, const RunResult* reference,
                     double burst_prominence = 0.05);

}  // namespace pssim::observables
