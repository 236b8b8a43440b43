#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace pssim {

// Level ordering used throughout: |0> = 3D, |1> = 2P, |2> = 1S,
// |3> = annihilated (absorbing sink). All gamma_i are population decay
// rates: a single atom prepared in the upper level of transition i decays
// as exp(-gamma_i * t).

// Free-space positronium rates in units of the annihilation rate gamma2.
// gamma1/gamma2 = 1/25.8 and gamma0/gamma1 = 3.2/31 (3.2e7 / 3.1e8 s^-1).
inline constexpr double kGamma2Si = 8.0e9;  // s^-1, singlet annihilation
inline constexpr double kGamma1Free = 1.0 / 25.8;
inline constexpr double kGamma0Free = (3.2 / 31.0) * kGamma1Free;

struct PhysicalParams {
  double gamma0 = kGamma0Free;  // 3D -> 2P
  double gamma1 = kGamma1Free;  // 2P -> 1S
  double gamma2 = 1.0;          // 1S -> annihilated
  double rabi = 0.0;            // resonant 1S <-> 3D two-photon drive
  std::int64_t n_atoms = 1;
  double mu0 = 0.0;             // geometric collectivity, 3D -> 2P
  double mu1 = 0.0;             // geometric collectivity, 2P -> 1S
  bool collective_01 = false;
  bool collective_12 = false;
  double gamma2_si = kGamma2Si;  // s^-1, anchors scaled time to seconds
};

// Same knob set with invariants checked and every rate expressed in units
// of gamma2 (so gamma2 == 1 after validate()). validate() is the checked
// entry point; aggregate construction is available for regimes the checks
// exclude (e.g. gamma2 == 0 oracle setups), where engines themselves only
// require non-negative rates.
struct ValidatedParams {
  double gamma0 = kGamma0Free;
  double gamma1 = kGamma1Free;
  double gamma2 = 1.0;
  double rabi = 0.0;
  std::int64_t n_atoms = 1;
  double mu0 = 0.0;
  double mu1 = 0.0;
  bool collective_01 = false;
  bool collective_12 = false;
  double gamma2_si = kGamma2Si;  // SI anchor for absolute-time reporting

  double mu0_effective() const { return collective_01 ? mu0 : 0.0; }
  double mu1_effective() const { return collective_12 ? mu1 : 0.0; }
};

// Checks invariants (positive rates, mu in [0,1], n_atoms >= 1) and
// normalizes all rates into units of gamma2. Throws ConfigError naming the
// offending field and bound. Idempotent: validating the result again is a
// no-op.
ValidatedParams validate(const PhysicalParams& p);

struct CavityConfig {
  double g = 0.0;      // atom-cavity coupling, same units as the rates
  double kappa = 1.0;  // cavity damping rate
};

struct CavityApplication {
  PhysicalParams params;  // input params with gamma0 replaced by g^2/kappa
  bool enhanced = false;  // true iff g^2/kappa exceeds the previous gamma0
};

// Replaces gamma0 by the cavity-mediated rate g^2/kappa. Only gamma0
// changes; every other field is copied bit for bit. Throws ConfigError on
// kappa <= 0 or g < 0.
CavityApplication apply_cavity(const PhysicalParams& p, const CavityConfig& cavity);

struct SampleGeometry {
  double density = 0.0;       // atoms per cm^3
  double diameter_d = 0.0;    // cylinder diameter, cm
  double wavelength01 = 0.0;  // 3D -> 2P transition wavelength, cm
  double wavelength12 = 0.0;  // 2P -> 1S transition wavelength, cm
};

enum class Transition { t01, t12 };

// Order-of-magnitude collectivity model: mu = min(1, (lambda/d)^2).
double geometry_to_mu(const SampleGeometry& geom, Transition which);

enum class Regime { independent, collective_01_only, collective_both };

const char* to_string(Regime r);

// Classifies the gas density against the lambda^-3 thresholds of the two
// transitions, with a factor-10 margin standing in for "much larger than".
// Monotone in density: raising rho never moves toward independent.
Regime collectivity_regime(const SampleGeometry& geom);

enum class SeedPolicy { none, tipping };

// How preset initial fractions respond to changing n_atoms: fixed keeps the
// stored numbers; one_atom_ignition re-derives f1 = 1/N, f2 = 1 - 1/N.
enum class InitialScaling { fixed, one_atom_ignition };

struct InitialCondition {
  std::array<double, 4> fractions{0.0, 0.0, 1.0, 0.0};
  SeedPolicy seed = SeedPolicy::none;
  double epsilon = 0.0;       // tipping amplitude
  bool epsilon_auto = false;  // epsilon tracks 1/sqrt(n_atoms)
  InitialScaling scaling = InitialScaling::fixed;

  // Seed amplitude actually used at the given ensemble size.
  double resolved_epsilon(std::int64_t n_atoms) const;
  // Fractions actually used at the given ensemble size (applies scaling).
  std::array<double, 4> resolved_fractions(std::int64_t n_atoms) const;
};

// Checks fractions (non-negative, summing to 1 within 1e-12) and the seed
// amplitude (0 <= epsilon <= 1). Throws ConfigError.
void check_initial(const InitialCondition& init);

}  // namespace pssim
