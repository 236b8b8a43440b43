#include "pssim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pssim/errors.hpp"

namespace pssim::meanfield {

std::vector<double> pack(const MeanFieldState& s) {
  return {s.p0,          s.p1,          s.p2,          s.p3,          s.s01.real(),
          s.s01.imag(),  s.s12.real(),  s.s12.imag(),  s.s02.real(),  s.s02.imag()};
}

MeanFieldState unpack(const double* y) {
  MeanFieldState s;
  s.p0 = y[0];
  s.p1 = y[1];
  s.p2 = y[2];
  s.p3 = y[3];
  s.s01 = {y[4], y[5]};
  s.s12 = {y[6], y[7]};
  s.s02 = {y[8], y[9]};
  return s;
}

void check_state(const MeanFieldState& s, double t, double tol_scale) {
  const double range_tol = 1e-9 * tol_scale;
  const double sum_tol = 1e-8 * tol_scale;
  const double cs_tol = 1e-8 * tol_scale;

  const double p[4] = {s.p0, s.p1, s.p2, s.p3};
  for (int i = 0; i < 4; ++i) {
    if (p[i] < -range_tol || p[i] > 1.0 + range_tol) {
      std::ostringstream os;
      os << "occupation p" << i << " = " << p[i] << " out of range at t = " << t;
      throw RuntimeFailure(os.str());
    }
  }
  const double sum = s.p0 + s.p1 + s.p2 + s.p3;
  if (std::abs(sum - 1.0) > sum_tol) {
    std::ostringstream os;
    os << "occupation sum drifted to " << sum << " at t = " << t;
    throw RuntimeFailure(os.str());
  }
  const double ex01 = std::norm(s.s01) - s.p0 * s.p1;
  const double ex12 = std::norm(s.s12) - s.p1 * s.p2;
  const double ex02 = std::norm(s.s02) - s.p0 * s.p2;
  if (ex01 > cs_tol || ex12 > cs_tol || ex02 > cs_tol) {
    std::ostringstream os;
    os << "coherence bound |s|^2 <= p_a p_b violated by " << std::max({ex01, ex12, ex02})
       << " at t = " << t;
    throw RuntimeFailure(os.str());
  }
}

ode::Rhs build_meanfield_rhs(const ValidatedParams& params) {
  const double g0 = params.gamma0;
  const double g1 = params.gamma1;
  const double g2 = params.gamma2;
  const double rabi = params.rabi;
  const double n1 = static_cast<double>(params.n_atoms - 1);
  const double c0 = g0 * params.mu0_effective() * n1;
  const double c1 = g1 * params.mu1_effective() * n1;

  return [g0, g1, g2, rabi, c0, c1](double, const double* y, double* dy) {
    const double p0 = y[0], p1 = y[1], p2 = y[2];
    const std::complex<double> s01{y[4], y[5]};
    const std::complex<double> s12{y[6], y[7]};
    const std::complex<double> s02{y[8], y[9]};
    const std::complex<double> i{0.0, 1.0};

    // Level flows; writing the occupation derivatives through them keeps
    // the occupation sum conserved to rounding.
    const double f01 = g0 * p0 + c0 * std::norm(s01);
    const double f12 = g1 * p1 + c1 * std::norm(s12);
    const double f23 = g2 * p2;
    const double d02 = 2.0 * rabi * s02.imag();

    dy[0] = -f01 + d02;
    dy[1] = f01 - f12;
    dy[2] = f12 - f23 - d02;
    dy[3] = f23;

    const std::complex<double> ds01 = (-(g0 + g1) / 2 + (c0 / 2) * (p0 - p1)) * s01 -
                                      (c1 / 2) * s02 * std::conj(s12) + i * rabi * std::conj(s12);
    const std::complex<double> ds12 = (-(g1 + g2) / 2 + (c1 / 2) * (p1 - p2)) * s12 +
                                      (c0 / 2) * s02 * std::conj(s01) - i * rabi * std::conj(s01);
    const std::complex<double> ds02 =
        (-(g0 + g2) / 2) * s02 + ((c1 - c0) / 2) * s01 * s12 + i * rabi * (p2 - p0);

    dy[4] = ds01.real();
    dy[5] = ds01.imag();
    dy[6] = ds12.real();
    dy[7] = ds12.imag();
    dy[8] = ds02.real();
    dy[9] = ds02.imag();
  };
}

MeanFieldState seed_coherences(const MeanFieldState& s, SeedPolicy policy, double epsilon) {
  if (policy == SeedPolicy::none) return s;
  if (epsilon < 0.0 || epsilon > 1.0) {
    std::ostringstream os;
    os << "invalid seed epsilon = " << epsilon << " (must be in [0, 1])";
    throw ConfigError(os.str());
  }
  MeanFieldState out = s;
  if (out.s01 == std::complex<double>{}) out.s01 = epsilon * std::sqrt(s.p0 * s.p1);
  if (out.s12 == std::complex<double>{}) out.s12 = epsilon * std::sqrt(s.p1 * s.p2);
  if (out.s02 == std::complex<double>{}) out.s02 = epsilon * std::sqrt(s.p0 * s.p2);
  return out;
}

MeanFieldState state_from_fractions(const InitialCondition& init, long n_atoms) {
  check_initial(init);
  const auto f = init.resolved_fractions(n_atoms);
  MeanFieldState s;
  s.p0 = f[0];
  s.p1 = f[1];
  s.p2 = f[2];
  s.p3 = f[3];
  return seed_coherences(s, init.seed, init.resolved_epsilon(n_atoms));
}

MeanFieldTrajectory evolve_meanfield(const MeanFieldState& state0, const ode::Rhs& rhs,
                                     const ode::IntegrationSpec& spec) {
  ode::Trajectory raw = ode::integrate(rhs, pack(state0), spec);

  MeanFieldTrajectory out;
  out.stats = raw.stats;
  out.samples.reserve(raw.samples.size());
  out.min_population = 1.0;
  out.max_cs_excess = -1.0;
  for (const auto& sample : raw.samples) {
    MeanFieldState s = unpack(sample.y.data());
    check_state(s, sample.t, 10.0);
    out.max_sum_drift =
        std::max(out.max_sum_drift, std::abs(s.p0 + s.p1 + s.p2 + s.p3 - 1.0));
    out.min_population = std::min({out.min_population, s.p0, s.p1, s.p2, s.p3});
    out.max_cs_excess = std::max({out.max_cs_excess, std::norm(s.s01) - s.p0 * s.p1,
                                  std::norm(s.s12) - s.p1 * s.p2, std::norm(s.s02) - s.p0 * s.p2});
    out.samples.push_back({sample.t, s});
  }
  return out;
}

}  // namespace pssim::meanfield
