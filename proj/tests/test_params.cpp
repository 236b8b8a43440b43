#include <array>
#include <cmath>

#include "doctest.h"
#include "pssim/errors.hpp"
#include "pssim/params.hpp"

using namespace pssim;
using doctest::Approx;
using doctest::Contains;

TEST_SUITE("params") {

TEST_CASE("free-space rate constants") {
  CHECK(kGamma1Free * 25.8 == 1.0);
  CHECK(kGamma0Free == (3.2 / 31.0) * kGamma1Free);
  CHECK(kGamma0Free < kGamma1Free);
  CHECK(kGamma1Free < 1.0);
}

TEST_CASE("validate normalizes SI rates into annihilation units") {
  PhysicalParams p;
  p.gamma0 = 3.2e7;
  p.gamma1 = 3.1e8;
  p.gamma2 = 8.0e9;
  p.rabi = 4.0e12;
  p.gamma2_si = 8.0e9;

  const auto v = validate(p);
  CHECK(v.gamma2 == 1.0);
  CHECK(v.gamma1 == 3.1e8 / 8.0e9);
  CHECK(v.gamma1 == Approx(kGamma1Free).epsilon(1e-3));
  CHECK(v.gamma0 == Approx(kGamma0Free).epsilon(1e-2));
  CHECK(v.rabi == 500.0);
  CHECK(v.gamma2_si == 8.0e9);
}

TEST_CASE("validate is idempotent on already-normalized rates") {
  PhysicalParams p;
  p.gamma0 = kGamma0Free;
  p.gamma1 = kGamma1Free;
  p.gamma2 = 1.0;
  p.rabi = 500.0;
  p.n_atoms = 42;
  p.mu0 = 0.15;
  p.mu1 = 0.006;
  p.collective_01 = true;

  const auto v = validate(p);
  PhysicalParams round_trip;
  round_trip.gamma0 = v.gamma0;
  round_trip.gamma1 = v.gamma1;
  round_trip.gamma2 = v.gamma2;
  round_trip.rabi = v.rabi;
  round_trip.n_atoms = v.n_atoms;
  round_trip.mu0 = v.mu0;
  round_trip.mu1 = v.mu1;
  round_trip.collective_01 = v.collective_01;
  round_trip.collective_12 = v.collective_12;
  round_trip.gamma2_si = v.gamma2_si;

  const auto w = validate(round_trip);
  CHECK(w.gamma0 == v.gamma0);
  CHECK(w.gamma1 == v.gamma1);
  CHECK(w.gamma2 == v.gamma2);
  CHECK(w.rabi == v.rabi);
  CHECK(w.n_atoms == v.n_atoms);
  CHECK(w.mu0 == v.mu0);
  CHECK(w.mu1 == v.mu1);
}

TEST_CASE("validate rejects out-of-range fields naming field and bound") {
  PhysicalParams p;

  SUBCASE("mu1 above 1") {
    p.mu1 = 1.5;
    CHECK_THROWS_WITH_AS(validate(p), "invalid parameter: mu1 = 1.5 (outside [0, 1])",
                         ConfigError);
  }
  SUBCASE("mu0 negative") {
    p.mu0 = -0.1;
    CHECK_THROWS_WITH_AS(validate(p), Contains("mu0"), ConfigError);
  }
  SUBCASE("n_atoms zero") {
    p.n_atoms = 0;
    CHECK_THROWS_WITH_AS(validate(p), "invalid parameter: n_atoms = 0 (must be >= 1)",
                         ConfigError);
  }
  SUBCASE("gamma1 zero") {
    p.gamma1 = 0.0;
    CHECK_THROWS_WITH_AS(validate(p), Contains("gamma1"), ConfigError);
  }
  SUBCASE("rabi negative") {
    p.rabi = -1.0;
    CHECK_THROWS_WITH_AS(validate(p), Contains("rabi"), ConfigError);
  }
  SUBCASE("gamma2_si zero") {
    p.gamma2_si = 0.0;
    CHECK_THROWS_WITH_AS(validate(p), Contains("gamma2_si"), ConfigError);
  }
  SUBCASE("gamma0 nan") {
    p.gamma0 = std::nan("");
    CHECK_THROWS_AS(validate(p), ConfigError);
  }
}

TEST_CASE("effective collectivity follows the regime flags") {
  PhysicalParams p;
  p.mu0 = 0.15;
  p.mu1 = 0.4;
  auto v = validate(p);
  CHECK(v.mu0_effective() == 0.0);
  CHECK(v.mu1_effective() == 0.0);

  p.collective_01 = true;
  v = validate(p);
  CHECK(v.mu0_effective() == 0.15);
  CHECK(v.mu1_effective() == 0.0);

  p.collective_12 = true;
  v = validate(p);
  CHECK(v.mu1_effective() == 0.4);
}

TEST_CASE("apply_cavity replaces gamma0 by g^2/kappa and nothing else") {
  PhysicalParams p;
  p.gamma0 = kGamma0Free;
  p.rabi = 500.0;
  p.n_atoms = 10000;
  p.mu0 = 1.0;
  p.mu1 = 1.0;
  p.collective_01 = true;
  p.collective_12 = true;

  CavityConfig cavity;
  cavity.g = std::sqrt(1.6 * kGamma1Free);
  cavity.kappa = 1.0;

  const auto out = apply_cavity(p, cavity);
  CHECK(out.params.gamma0 == Approx(1.6 * kGamma1Free).epsilon(1e-15));
  CHECK(out.enhanced);
  CHECK(out.params.gamma1 == p.gamma1);
  CHECK(out.params.gamma2 == p.gamma2);
  CHECK(out.params.rabi == p.rabi);
  CHECK(out.params.n_atoms == p.n_atoms);
  CHECK(out.params.mu0 == p.mu0);
  CHECK(out.params.mu1 == p.mu1);
  CHECK(out.params.collective_01 == p.collective_01);
  CHECK(out.params.collective_12 == p.collective_12);
  CHECK(out.params.gamma2_si == p.gamma2_si);
}

TEST_CASE("apply_cavity flags enhancement only above the previous rate") {
  PhysicalParams p;
  p.gamma0 = kGamma0Free;

  CavityConfig weak;
  weak.g = std::sqrt(kGamma0Free / 2.0);
  weak.kappa = 1.0;
  CHECK_FALSE(apply_cavity(p, weak).enhanced);

  CavityConfig strong;
  strong.g = std::sqrt(2.0 * kGamma0Free);
  strong.kappa = 1.0;
  CHECK(apply_cavity(p, strong).enhanced);
}

TEST_CASE("apply_cavity with g = 0 switches the channel off") {
  PhysicalParams p;
  const auto out = apply_cavity(p, CavityConfig{0.0, 1.0});
  CHECK(out.params.gamma0 == 0.0);
  CHECK_FALSE(out.enhanced);
}

TEST_CASE("apply_cavity rejects bad cavity parameters") {
  PhysicalParams p;
  CHECK_THROWS_WITH_AS(apply_cavity(p, CavityConfig{1.0, 0.0}), Contains("kappa"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_cavity(p, CavityConfig{-1.0, 1.0}), Contains("g ="), ConfigError);
}

TEST_CASE("geometry_to_mu is the clamped squared wavelength-to-diameter ratio") {
  SampleGeometry geom;
  geom.density = 1e13;
  geom.diameter_d = 2.97e-4;     // cm
  geom.wavelength01 = 1.2e-4;    // cm
  geom.wavelength12 = 0.23e-4;   // cm

  CHECK(geometry_to_mu(geom, Transition::t12) == Approx(0.006).epsilon(1e-3));
  CHECK(geometry_to_mu(geom, Transition::t01) ==
        Approx((1.2 / 2.97) * (1.2 / 2.97)).epsilon(1e-15));

  geom.diameter_d = 0.5e-4;  // narrower than both wavelengths: clamp at 1
  CHECK(geometry_to_mu(geom, Transition::t01) == 1.0);

  geom.diameter_d = 1.0;  // macroscopic sample: collectivity negligible
  CHECK(geometry_to_mu(geom, Transition::t12) < 1e-8);
}

TEST_CASE("geometry validation") {
  SampleGeometry geom;
  geom.density = 1e13;
  geom.diameter_d = 2.97e-4;
  geom.wavelength01 = 1.2e-4;
  geom.wavelength12 = 0.23e-4;
  CHECK_NOTHROW(geometry_to_mu(geom, Transition::t01));

  SUBCASE("zero density") {
    geom.density = 0.0;
    CHECK_THROWS_WITH_AS(collectivity_regime(geom), Contains("density"), ConfigError);
  }
  SUBCASE("wavelength ordering") {
    geom.wavelength01 = 0.1e-4;
    CHECK_THROWS_WITH_AS(geometry_to_mu(geom, Transition::t01),
                         Contains("must exceed wavelength12"), ConfigError);
  }
  SUBCASE("zero diameter") {
    geom.diameter_d = 0.0;
    CHECK_THROWS_WITH_AS(geometry_to_mu(geom, Transition::t12), Contains("diameter_d"),
                         ConfigError);
  }
}

TEST_CASE("collectivity_regime classifies density against both wavelengths") {
  SampleGeometry geom;
  geom.diameter_d = 2.97e-4;
  geom.wavelength01 = 1.2e-4;   // 10/lambda01^3 = 5.79e12 cm^-3
  geom.wavelength12 = 0.23e-4;  // 10/lambda12^3 = 8.22e14 cm^-3

  geom.density = 1e9;
  CHECK(collectivity_regime(geom) == Regime::independent);
  geom.density = 5e12;
  CHECK(collectivity_regime(geom) == Regime::independent);
  geom.density = 1e13;
  CHECK(collectivity_regime(geom) == Regime::collective_01_only);
  geom.density = 1e15;
  CHECK(collectivity_regime(geom) == Regime::collective_both);
}

TEST_CASE("collectivity_regime is monotone in density") {
  SampleGeometry geom;
  geom.diameter_d = 2.97e-4;
  geom.wavelength01 = 1.2e-4;
  geom.wavelength12 = 0.23e-4;

  int last = 0;
  for (double density = 1e8; density <= 1e18; density *= 3.0) {
    geom.density = density;
    const int rank = static_cast<int>(collectivity_regime(geom));
    CHECK(rank >= last);
    last = rank;
  }
  CHECK(last == static_cast<int>(Regime::collective_both));
}

TEST_CASE("regime names") {
  CHECK(std::string(to_string(Regime::independent)) == "independent");
  CHECK(std::string(to_string(Regime::collective_01_only)) == "collective_01_only");
  CHECK(std::string(to_string(Regime::collective_both)) == "collective_both");
}

TEST_CASE("resolved_epsilon tracks 1/sqrt(N) only in auto mode") {
  InitialCondition init;
  init.epsilon = 0.25;
  CHECK(init.resolved_epsilon(4) == 0.25);

  init.epsilon_auto = true;
  CHECK(init.resolved_epsilon(4) == 0.5);
  CHECK(init.resolved_epsilon(1000000) == Approx(1e-3).epsilon(1e-15));
}

TEST_CASE("resolved_fractions applies one-atom ignition scaling") {
  InitialCondition init;
  init.fractions = {0.0, 0.7, 0.3, 0.0};
  const auto fixed = init.resolved_fractions(4);
  CHECK(fixed[1] == 0.7);
  CHECK(fixed[2] == 0.3);

  init.scaling = InitialScaling::one_atom_ignition;
  const auto ignition = init.resolved_fractions(4);
  CHECK(ignition[0] == 0.0);
  CHECK(ignition[1] == 0.25);
  CHECK(ignition[2] == 0.75);
  CHECK(ignition[3] == 0.0);
}

TEST_CASE("check_initial rejections") {
  InitialCondition init;
  init.fractions = {0.0, 0.7, 0.3, 0.0};
  CHECK_NOTHROW(check_initial(init));

  SUBCASE("negative fraction") {
    init.fractions = {0.0, 0.7, -0.3, 0.6};
    CHECK_THROWS_WITH_AS(check_initial(init), Contains("f2"), ConfigError);
  }
  SUBCASE("fractions not summing to 1") {
    init.fractions = {0.0, 0.7, 0.2, 0.0};
    CHECK_THROWS_WITH_AS(check_initial(init), Contains("f0+f1+f2+f3"), ConfigError);
  }
  SUBCASE("seed amplitude above 1") {
    init.epsilon = 1.5;
    CHECK_THROWS_WITH_AS(check_initial(init), Contains("seed_epsilon"), ConfigError);
  }
}

}  // TEST_SUITE
