#include "pssim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pssim/errors.hpp"
#include "pssim/ladder.hpp"
#include "pssim/lindblad.hpp"
#include "pssim/meanfield.hpp"

namespace pssim::scenarios {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::exact: return "exact";
    case Engine::ladder: return "ladder";
    case Engine::meanfield: return "meanfield";
  }
  return "unknown";
}

Engine engine_from_string(const std::string& s) {
  if (s == "exact") return Engine::exact;
  if (s == "ladder") return Engine::ladder;
  if (s == "meanfield") return Engine::meanfield;
  throw ConfigError("unknown engine '" + s + "' (expected exact, ladder, or meanfield)");
}

void check_scenario(const Scenario& sc) {
  check_initial(sc.initial);
  ode::check(sc.spec);
  if (sc.engine == Engine::exact && sc.params.n_atoms > lindblad::kMaxAtoms) {
    std::ostringstream os;
    os << "exact engine supports at most " << lindblad::kMaxAtoms << " atoms, scenario has "
       << sc.params.n_atoms;
    throw ConfigError(os.str());
  }
  if (sc.engine == Engine::ladder) {
    if (sc.params.n_atoms > 3000) {
      std::ostringstream os;
      os << "ladder engine supports at most 3000 atoms, scenario has " << sc.params.n_atoms;
      throw ConfigError(os.str());
    }
    if (sc.params.rabi != 0.0)
      throw ConfigError("ladder engine requires rabi = 0 (no coherent drive)");
    const auto f = sc.initial.resolved_fractions(sc.params.n_atoms);
    if (f[0] != 0.0)
      throw ConfigError("ladder engine requires the 3D level unpopulated (f0 = 0)");
  }
  if (sc.mu1_product < 0.0) throw ConfigError("mu1_product must be >= 0");
}

ValidatedParams effective_params(const Scenario& sc) {
  PhysicalParams p = sc.params;
  if (sc.cavity) p = apply_cavity(p, *sc.cavity).params;
  return validate(p);
}

Scenario preset_fig2() {
  Scenario sc;
  sc.name = "fig2";
  sc.params.n_atoms = 1000000;
  sc.params.mu1 = 0.006;
  sc.params.collective_12 = true;
  sc.initial.fractions = {0.0, 0.7, 0.3, 0.0};
  sc.initial.seed = SeedPolicy::tipping;
  sc.initial.epsilon_auto = true;
  sc.engine = Engine::meanfield;
  sc.spec = {0.0, 10.0, 1e-10, 1e-13, 0.05, 4001};
  return sc;
}

Scenario preset_fig2_ladder() {
  Scenario sc;
  sc.name = "fig2-ladder";
  sc.params.n_atoms = 2000;
  sc.params.collective_12 = true;
  sc.mu1_product = 6000.0;
  sc.initial.fractions = {0.0, 0.7, 0.3, 0.0};
  sc.engine = Engine::ladder;
  // The collective flash empties the 2P pool within t ~ 0.01, so the grid
  // must be fine enough to resolve its intensity peak.
  sc.spec = {0.0, 10.0, 1e-8, 1e-16, 0.0, 20001};
  return sc;
}

Scenario preset_fig3a() {
  Scenario sc;
  sc.name = "fig3a";
  sc.params.n_atoms = 1000000;
  sc.params.rabi = 500.0;
  sc.params.mu0 = 0.15;
  sc.params.collective_01 = true;
  sc.initial.scaling = InitialScaling::one_atom_ignition;
  sc.initial.seed = SeedPolicy::tipping;
  sc.initial.epsilon_auto = true;
  sc.engine = Engine::meanfield;
  sc.spec = {0.0, 80.0, 1e-10, 1e-13, 0.05, 4001};
  sc.with_reference = true;
  return sc;
}

Scenario preset_fig3b() {
  Scenario sc;
  sc.name = "fig3b";
  sc.params.n_atoms = 10000;
  sc.params.rabi = 500.0;
  sc.params.mu0 = 1.0;
  sc.params.mu1 = 1.0;
  sc.params.collective_01 = true;
  sc.params.collective_12 = true;
  sc.cavity = CavityConfig{std::sqrt(1.6 * kGamma1Free), 1.0};
  sc.initial.scaling = InitialScaling::one_atom_ignition;
  sc.initial.seed = SeedPolicy::tipping;
  sc.initial.epsilon_auto = true;
  sc.engine = Engine::meanfield;
  sc.spec = {0.0, 400.0, 1e-10, 1e-13, 0.05, 8001};
  sc.with_reference = true;
  return sc;
}

std::vector<std::string> preset_names() { return {"fig2", "fig2-ladder", "fig3a", "fig3b"}; }

Scenario preset_by_name(const std::string& name) {
  if (name == "fig2") return preset_fig2();
  if (name == "fig2-ladder") return preset_fig2_ladder();
  if (name == "fig3a") return preset_fig3a();
  if (name == "fig3b") return preset_fig3b();
  throw ConfigError("unknown preset '" + name + "'");
}

Scenario exact_replica(const Scenario& base, std::int64_t n_atoms) {
  Scenario r = base;
  r.name = base.name + "-exact-n" + std::to_string(n_atoms);
  r.engine = Engine::exact;
  r.params.n_atoms = n_atoms;
  r.with_reference = false;
  if (r.mu1_product > 0.0) {
    r.params.mu1 = std::min(1.0, r.mu1_product / static_cast<double>(n_atoms));
    r.params.collective_12 = true;
    r.mu1_product = 0.0;
  }
  if (r.params.rabi > 0.0) {
    r.spec = {0.0, 0.3, 3e-11, 1e-14, 0.0, 31};
  } else {
    r.spec = {base.spec.t_start, base.spec.t_end, 1e-11, 1e-14, 0.0, 101};
  }
  return r;
}

namespace {

observables::RunResult execute(const Scenario& sc, const ValidatedParams& v) {
  observables::RunResult run;
  run.engine = to_string(sc.engine);
  run.params = v;

  switch (sc.engine) {
    case Engine::meanfield: {
      const auto state0 = meanfield::state_from_fractions(sc.initial, v.n_atoms);
      const auto traj = meanfield::evolve_meanfield(state0, meanfield::build_meanfield_rhs(v),
                                                    sc.spec);
      for (const auto& s : traj.samples) {
        run.t.push_back(s.t);
        run.p0.push_back(s.state.p0);
        run.p1.push_back(s.state.p1);
        run.p2.push_back(s.state.p2);
        run.p3.push_back(s.state.p3);
        run.s01_abs.push_back(std::abs(s.state.s01));
        run.s12_abs.push_back(std::abs(s.state.s12));
        run.s02_abs.push_back(std::abs(s.state.s02));
      }
      run.audit.trace_drift = traj.max_sum_drift;
      run.audit.positivity_floor = traj.min_population;
      break;
    }
    case Engine::ladder: {
      const auto f = sc.initial.resolved_fractions(v.n_atoms);
      const auto k0 = std::llround(f[1] * static_cast<double>(v.n_atoms));
      const auto m0 = std::llround(f[3] * static_cast<double>(v.n_atoms));
      const ladder::LadderGenerator gen(v, sc.mu1_product);
      const auto traj =
          ladder::evolve_ladder(ladder::delta_distribution(v.n_atoms, k0, m0), gen, sc.spec);
      run.t = traj.t;
      run.p0.assign(traj.t.size(), 0.0);
      run.p1 = traj.p1;
      run.p2 = traj.p2;
      run.p3 = traj.p3;
      run.s01_abs.assign(traj.t.size(), 0.0);
      run.s12_abs.assign(traj.t.size(), 0.0);
      run.s02_abs.assign(traj.t.size(), 0.0);
      run.audit.trace_drift = traj.sum_drift;
      run.audit.positivity_floor = traj.min_probability;
      break;
    }
    case Engine::exact: {
      const auto f = sc.initial.resolved_fractions(v.n_atoms);
      const auto eta = lindblad::single_atom_state(f, sc.initial.seed,
                                                   sc.initial.resolved_epsilon(v.n_atoms));
      const auto rho0 = lindblad::product_state(v.n_atoms, eta);
      const lindblad::Generator gen(
          v, lindblad::dicke_coupling(v.n_atoms, v.mu0_effective(), v.mu1_effective()));
      const auto traj = lindblad::evolve(rho0, gen, sc.spec);
      for (const auto& s : traj.samples) {
        const auto red = lindblad::reduce_observables(s.rho);
        run.t.push_back(s.t);
        run.p0.push_back(red.p[0]);
        run.p1.push_back(red.p[1]);
        run.p2.push_back(red.p[2]);
        run.p3.push_back(red.p[3]);
        run.s01_abs.push_back(red.s01_abs);
        run.s12_abs.push_back(red.s12_abs);
        run.s02_abs.push_back(red.s02_abs);
      }
      run.audit.trace_drift = traj.trace_drift;
      run.audit.positivity_floor = traj.positivity_floor;
      break;
    }
  }

  run.intensity = observables::emission_intensity(run.t, run.p0, run.p1,
                                                  static_cast<double>(v.n_atoms));
  return run;
}

Scenario independent_companion(const Scenario& sc) {
  Scenario ref = sc;
  ref.name = sc.name + "-reference";
  ref.engine = Engine::meanfield;
  ref.params.collective_01 = false;
  ref.params.collective_12 = false;
  ref.mu1_product = 0.0;
  ref.with_reference = false;
  return ref;
}

}  // namespace

RunOutput run_scenario(const Scenario& sc) {
  check_scenario(sc);
  const ValidatedParams v = effective_params(sc);

  RunOutput out;
  out.run = execute(sc, v);
  if (sc.with_reference) {
    const Scenario rsc = independent_companion(sc);
    check_scenario(rsc);
    out.reference = execute(rsc, effective_params(rsc));
    observables::compute_metrics(*out.reference, &*out.reference);
  }
  observables::compute_metrics(out.run, out.reference ? &*out.reference : nullptr);
  return out;
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::rabi: return "rabi";
    case SweepAxis::mu0: return "mu0";
    case SweepAxis::mu1: return "mu1";
    case SweepAxis::n_atoms: return "n_atoms";
    case SweepAxis::gamma0: return "gamma0";
  }
  return "unknown";
}

SweepAxis axis_from_string(const std::string& s) {
  if (s == "rabi") return SweepAxis::rabi;
  if (s == "mu0") return SweepAxis::mu0;
  if (s == "mu1") return SweepAxis::mu1;
  if (s == "n_atoms") return SweepAxis::n_atoms;
  if (s == "gamma0") return SweepAxis::gamma0;
  throw ConfigError("unknown sweep axis '" + s +
                    "' (expected rabi, mu0, mu1, n_atoms, or gamma0)");
}

namespace {

void check_probe_size(std::int64_t n_atoms) {
  if (n_atoms < 2 || n_atoms > lindblad::kMaxAtoms) {
    std::ostringstream os;
    os << "engine comparison needs 2 <= n_atoms <= " << lindblad::kMaxAtoms << ", got "
       << n_atoms;
    throw ConfigError(os.str());
  }
}

}  // namespace

double compare_ladder_exact(std::int64_t n_atoms) {
  check_probe_size(n_atoms);
  ValidatedParams v;
  v.gamma0 = 0.0;
  v.gamma1 = 1.0;
  v.gamma2 = 0.0;
  v.n_atoms = n_atoms;
  v.mu1 = 1.0;
  v.collective_12 = true;

  const auto eta = lindblad::single_atom_state({0.0, 1.0, 0.0, 0.0}, SeedPolicy::none, 0.0);
  const lindblad::Generator gen(v, lindblad::dicke_coupling(n_atoms, 0.0, 1.0));
  const auto exact = lindblad::evolve(lindblad::product_state(n_atoms, eta), gen,
                                      {0.0, 3.0, 1e-11, 1e-14, 0.0, 61});

  const ladder::LadderGenerator lgen(v);
  const auto lad = ladder::evolve_ladder(ladder::delta_distribution(n_atoms, n_atoms, 0), lgen,
                                         {0.0, 3.0, 1e-11, 1e-16, 0.0, 61});

  double dev = 0.0;
  for (std::size_t i = 0; i < lad.t.size(); ++i) {
    const auto red = lindblad::reduce_observables(exact.samples[i].rho);
    dev = std::max(dev, std::abs(red.p[1] - lad.p1[i]));
    dev = std::max(dev, std::abs(red.p[2] - lad.p2[i]));
  }
  return dev;
}

double compare_meanfield_exact(std::int64_t n_atoms) {
  check_probe_size(n_atoms);
  PhysicalParams p;
  p.rabi = 500.0;
  p.n_atoms = n_atoms;
  p.mu0 = 0.1;
  p.mu1 = 0.1;
  p.collective_01 = true;
  p.collective_12 = true;
  const ValidatedParams v = validate(p);

  InitialCondition init;
  init.scaling = InitialScaling::one_atom_ignition;
  init.seed = SeedPolicy::tipping;
  init.epsilon_auto = true;

  const ode::IntegrationSpec spec{0.0, 2.0, 1e-10, 1e-13, 0.0, 41};

  const auto f = init.resolved_fractions(n_atoms);
  const auto eta = lindblad::single_atom_state(f, init.seed, init.resolved_epsilon(n_atoms));
  const lindblad::Generator gen(v, lindblad::dicke_coupling(n_atoms, v.mu0, v.mu1));
  const auto exact = lindblad::evolve(lindblad::product_state(n_atoms, eta), gen, spec);

  const auto mf = meanfield::evolve_meanfield(meanfield::state_from_fractions(init, n_atoms),
                                              meanfield::build_meanfield_rhs(v), spec);

  double dev = 0.0;
  for (std::size_t i = 0; i < mf.samples.size(); ++i) {
    const auto red = lindblad::reduce_observables(exact.samples[i].rho);
    const auto& s = mf.samples[i].state;
    dev = std::max(dev, std::abs(red.p[0] - s.p0));
    dev = std::max(dev, std::abs(red.p[1] - s.p1));
    dev = std::max(dev, std::abs(red.p[2] - s.p2));
    dev = std::max(dev, std::abs(red.p[3] - s.p3));
  }
  return dev;
}

double compare_independent_exact() {
  PhysicalParams p;
  p.rabi = 500.0;
  const ValidatedParams v = validate(p);

  const InitialCondition init;
  const ode::IntegrationSpec spec{0.0, 2.0, 1e-10, 1e-13, 0.0, 41};

  const auto eta = lindblad::single_atom_state(init.fractions, init.seed, 0.0);
  const lindblad::Generator gen(v, lindblad::dicke_coupling(1, 0.0, 0.0));
  const auto exact = lindblad::evolve(lindblad::product_state(1, eta), gen, spec);

  const auto mf = meanfield::evolve_meanfield(meanfield::state_from_fractions(init, 1),
                                              meanfield::build_meanfield_rhs(v), spec);

  double dev = 0.0;
  for (std::size_t i = 0; i < mf.samples.size(); ++i) {
    const auto red = lindblad::reduce_observables(exact.samples[i].rho);
    const auto& s = mf.samples[i].state;
    dev = std::max(dev, std::abs(red.p[0] - s.p0));
    dev = std::max(dev, std::abs(red.p[1] - s.p1));
    dev = std::max(dev, std::abs(red.p[2] - s.p2));
    dev = std::max(dev, std::abs(red.p[3] - s.p3));
  }
  return dev;
}

OracleComparison compare_engines(std::int64_t n_atoms) {
  OracleComparison cmp;
  cmp.ladder_vs_exact = compare_ladder_exact(n_atoms);
  cmp.meanfield_vs_exact = compare_meanfield_exact(n_atoms);
  cmp.independent_vs_exact = compare_independent_exact();
  return cmp;
}

std::vector<RunOutput> sweep(const Scenario& base, SweepAxis axis, std::vector<double> values) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::sort(values.begin(), values.end());

  std::vector<Scenario> points;
  points.reserve(values.size());
  for (const double value : values) {
    Scenario sc = base;
    sc.with_reference = true;
    std::ostringstream os;
    os << base.name << "-" << to_string(axis) << "=" << value;
    sc.name = os.str();
    switch (axis) {
      case SweepAxis::rabi:
        sc.params.rabi = value;
        break;
      case SweepAxis::mu0:
        sc.params.mu0 = value;
        break;
      case SweepAxis::mu1:
        // Scale-matched ladder scenarios are swept through the governing
        // product mu1 * N; plain scenarios through the geometric factor.
        if (base.mu1_product > 0.0) {
          sc.mu1_product = value * static_cast<double>(sc.params.n_atoms);
        } else {
          sc.params.mu1 = value;
        }
        break;
      case SweepAxis::n_atoms: {
        if (!(value >= 1.0) || value != std::floor(value)) {
          std::ostringstream msg;
          msg << "invalid parameter: n_atoms = " << value << " (must be a positive integer)";
          throw ConfigError(msg.str());
        }
        sc.params.n_atoms = static_cast<std::int64_t>(value);
        break;
      }
      case SweepAxis::gamma0:
        sc.params.gamma0 = value;
        sc.cavity.reset();
        break;
    }
    check_scenario(sc);
    effective_params(sc);
    points.push_back(std::move(sc));
  }

  std::vector<RunOutput> results;
  results.reserve(points.size());
  for (const Scenario& sc : points) results.push_back(run_scenario(sc));
  return results;
}

}  // namespace pssim::scenarios
