#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pssim/observables.hpp"
#include "pssim/ode.hpp"
#include "pssim/params.hpp"

namespace pssim::scenarios {

enum class Engine { exact, ladder, meanfield };

const char* to_string(Engine e);
Engine engine_from_string(const std::string& s);

// A fully bound run description: physics knobs, initial condition, engine,
// integration window, and whether a matched independent-atom companion run
// accompanies it.
struct Scenario {
  std::string name;
  PhysicalParams params;
  InitialCondition initial;
  Engine engine = Engine::meanfield;
  ode::IntegrationSpec spec;
  bool with_reference = false;
  // Ladder scale-matching: when > 0 the ladder engine uses the effective
  // collectivity mu1_product / N, holding the physically governing product
  // mu * N fixed across ensemble sizes. 0 means use params.mu1.
  double mu1_product = 0.0;
  // When set, gamma0 is replaced by the cavity-mediated rate g^2/kappa.
  std::optional<CavityConfig> cavity;
};

// Engine capability bounds (exact <= 6 atoms, ladder <= 3000, mean-field
// unbounded) plus per-engine structural requirements. Throws ConfigError.
void check_scenario(const Scenario& sc);

// Cavity substitution (if any) followed by validate().
ValidatedParams effective_params(const Scenario& sc);

// Undriven burst cascade: N = 10^6, 70% 2P / 30% 1S, collectivity 0.006 on
// the emitting transition, mean-field engine with the vacuum-scale tipping
// seed.
Scenario preset_fig2();

// Desk-scale ladder companion to fig2: N = 2000 with mu1 * N held at 6000.
Scenario preset_fig2_ladder();

// Driven trapping, collectivity on 3D->2P only: N = 10^6, mu0 = 0.15,
// Rabi 500, started from the 1S pool with a one-atom ignition fraction.
Scenario preset_fig3a();

// Cavity-enhanced trapping: N = 10^4, collectivity on both transitions,
// gamma0 raised to 1.6 gamma1 via g^2/kappa, Rabi 500.
Scenario preset_fig3b();

std::vector<std::string> preset_names();
Scenario preset_by_name(const std::string& name);

// The same physics shrunk onto the exact engine for cross-validation:
// n_atoms replaced, ladder products folded back into a clamped mu, window
// and tolerances sized for the 4^N state.
Scenario exact_replica(const Scenario& base, std::int64_t n_atoms);

struct RunOutput {
  observables::RunResult run;
  std::optional<observables::RunResult> reference;
};

// Executes the scenario (and its independent companion when requested) and
// fills all metrics. The companion shares drive, rates, and initial
// condition but has both collective channels switched off.
RunOutput run_scenario(const Scenario& sc);

enum class SweepAxis { rabi, mu0, mu1, n_atoms, gamma0 };

const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

// One run per value in ascending order, each with its matched independent
// reference. Every point is validated before any run starts.
std::vector<RunOutput> sweep(const Scenario& base, SweepAxis axis, std::vector<double> values);

// Cross-engine deviation probes on problems small enough for the exact
// solver; each returns the max absolute population difference over a shared
// sample grid. ladder vs exact: pure collective emission (mu1 = 1,
// annihilation off, every atom in 2P). meanfield vs exact: driven and
// weakly collective (mu = 0.1 on both transitions, Rabi 500, one-atom
// ignition start). independent vs exact: a single driven atom with
// collectivity off, where mean field is exact up to solver error.
double compare_ladder_exact(std::int64_t n_atoms);
double compare_meanfield_exact(std::int64_t n_atoms);
double compare_independent_exact();

struct OracleComparison {
  double ladder_vs_exact = 0.0;
  double meanfield_vs_exact = 0.0;
  double independent_vs_exact = 0.0;
};

// All three probes, sized by n_atoms where applicable.
OracleComparison compare_engines(std::int64_t n_atoms);

}  // namespace pssim::scenarios
