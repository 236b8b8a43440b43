#include "pssim/params.hpp"

#include <cmath>
#include <sstream>

#include "pssim/errors.hpp"

namespace pssim {

namespace {

[[noreturn]] void reject(const std::string& field, double value, const std::string& bound) {
  std::ostringstream os;
  os << "invalid parameter: " << field << " = " << value << " (" << bound << ")";
  throw ConfigError(os.str());
}

}  // namespace

ValidatedParams validate(const PhysicalParams& p) {
  if (!(p.gamma0 > 0.0)) reject("gamma0", p.gamma0, "must be > 0");
  if (!(p.gamma1 > 0.0)) reject("gamma1", p.gamma1, "must be > 0");
  if (!(p.gamma2 > 0.0)) reject("gamma2", p.gamma2, "must be > 0");
  if (!(p.rabi >= 0.0)) reject("rabi", p.rabi, "must be >= 0");
  if (p.n_atoms < 1) reject("n_atoms", static_cast<double>(p.n_atoms), "must be >= 1");
  if (!(p.mu0 >= 0.0 && p.mu0 <= 1.0)) reject("mu0", p.mu0, "outside [0, 1]");
  if (!(p.mu1 >= 0.0 && p.mu1 <= 1.0)) reject("mu1", p.mu1, "outside [0, 1]");
  if (!(p.gamma2_si > 0.0)) reject("gamma2_si", p.gamma2_si, "must be > 0");

  ValidatedParams v;
  v.gamma0 = p.gamma0 / p.gamma2;
  v.gamma1 = p.gamma1 / p.gamma2;
  v.gamma2 = 1.0;
  v.rabi = p.rabi / p.gamma2;
  v.n_atoms = p.n_atoms;
  v.mu0 = p.mu0;
  v.mu1 = p.mu1;
  v.collective_01 = p.collective_01;
  v.collective_12 = p.collective_12;
  v.gamma2_si = p.gamma2_si;
  return v;
}

CavityApplication apply_cavity(const PhysicalParams& p, const CavityConfig& cavity) {
  if (!(cavity.kappa > 0.0)) reject("kappa", cavity.kappa, "must be > 0");
  if (!(cavity.g >= 0.0)) reject("g", cavity.g, "must be >= 0");
  CavityApplication out;
  out.params = p;
  out.params.gamma0 = cavity.g * cavity.g / cavity.kappa;
  out.enhanced = out.params.gamma0 > p.gamma0;
  return out;
}

namespace {

void check_geometry(const SampleGeometry& geom) {
  if (!(geom.density > 0.0)) reject("density", geom.density, "must be > 0");
  if (!(geom.diameter_d > 0.0)) reject("diameter_d", geom.diameter_d, "must be > 0");
  if (!(geom.wavelength01 > 0.0)) reject("wavelength01", geom.wavelength01, "must be > 0");
  if (!(geom.wavelength12 > 0.0)) reject("wavelength12", geom.wavelength12, "must be > 0");
  if (!(geom.wavelength01 > geom.wavelength12))
    reject("wavelength01", geom.wavelength01, "must exceed wavelength12");
}

}  // namespace

double geometry_to_mu(const SampleGeometry& geom, Transition which) {
  check_geometry(geom);
  const double lambda = (which == Transition::t01) ? geom.wavelength01 : geom.wavelength12;
  const double ratio = lambda / geom.diameter_d;
  return std::min(1.0, ratio * ratio);
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::independent: return "independent";
    case Regime::collective_01_only: return "collective_01_only";
    case Regime::collective_both: return "collective_both";
  }
  return "unknown";
}

Regime collectivity_regime(const SampleGeometry& geom) {
  check_geometry(geom);
  const double margin = 10.0;
  const double rho01 = 1.0 / std::pow(geom.wavelength01, 3);
  const double rho12 = 1.0 / std::pow(geom.wavelength12, 3);
  if (geom.density >= margin * rho12) return Regime::collective_both;
  if (geom.density >= margin * rho01) return Regime::collective_01_only;
  return Regime::independent;
}

double InitialCondition::resolved_epsilon(std::int64_t n_atoms) const {
  if (!epsilon_auto) return epsilon;
  return 1.0 / std::sqrt(static_cast<double>(n_atoms));
}

std::array<double, 4> InitialCondition::resolved_fractions(std::int64_t n_atoms) const {
  if (scaling == InitialScaling::fixed) return fractions;
  const double f1 = 1.0 / static_cast<double>(n_atoms);
  return {0.0, f1, 1.0 - f1, 0.0};
}

void check_initial(const InitialCondition& init) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!(init.fractions[i] >= 0.0))
      reject("f" + std::to_string(i), init.fractions[i], "must be >= 0");
    sum += init.fractions[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) reject("f0+f1+f2+f3", sum, "must sum to 1 within 1e-12");
  if (!(init.epsilon >= 0.0 && init.epsilon <= 1.0))
    reject("seed_epsilon", init.epsilon, "outside [0, 1]");
}

}  // namespace pssim
