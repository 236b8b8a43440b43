#include <cmath>
#include <vector>

#include "doctest.h"
#include "pssim/errors.hpp"
#include "pssim/observables.hpp"

using namespace pssim;
using doctest::Approx;
using doctest::Contains;

namespace {

std::vector<double> grid(double t0, double t1, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

// Two-step decay through an intermediate level, annihilated fraction only.
std::vector<double> bateman_p3(const std::vector<double>& t, double g1, double g2) {
  std::vector<double> p3(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    p3[i] = 1.0 - (g2 * std::exp(-g1 * t[i]) - g1 * std::exp(-g2 * t[i])) / (g2 - g1);
  return p3;
}

observables::RunResult run_with_p3(const std::vector<double>& t, const std::vector<double>& p3) {
  observables::RunResult run;
  run.t = t;
  run.p3 = p3;
  return run;
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("annihilation_probability enforces monotone growth") {
  const auto t = grid(0.0, 1.0, 5);
  auto run = run_with_p3(t, {0.0, 0.1, 0.3, 0.6, 1.0});
  CHECK(observables::annihilation_probability(run) == run.p3);

  run.p3[3] = 0.2;
  CHECK_THROWS_WITH_AS(observables::annihilation_probability(run),
                       Contains("annihilated fraction decreases"), RuntimeFailure);
  CHECK_NOTHROW(observables::annihilation_probability(run, 0.2));
}

TEST_CASE("emission intensity of exponential content is N gamma e^(-t)") {
  const auto t = grid(0.0, 4.0, 401);
  std::vector<double> p0(t.size(), 0.0), p1(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) p1[i] = std::exp(-t[i]);

  const double n_atoms = 1000.0;
  const auto intensity = observables::emission_intensity(t, p0, p1, n_atoms);
  REQUIRE(intensity.size() == t.size());
  // The two samples next to the edges inherit the one-sided boundary
  // difference through the smoothing stencil; hold only the interior to the
  // second-order tolerance.
  for (std::size_t i = 2; i + 2 < t.size(); ++i) {
    CHECK(intensity[i] == Approx(n_atoms * std::exp(-t[i])).epsilon(1e-3));
    CHECK(intensity[i] > intensity[i + 1]);
  }
}

TEST_CASE("constant radiative content emits nothing") {
  const auto t = grid(0.0, 1.0, 50);
  const std::vector<double> p0(t.size(), 0.2), p1(t.size(), 0.3);
  for (const double v : observables::emission_intensity(t, p0, p1, 1e6)) CHECK(v == 0.0);
}

TEST_CASE("detect_bursts finds interior local maxima at exact grid times") {
  const auto t = grid(0.0, 4.0, 5);
  const std::vector<double> signal{0.0, 1.0, 0.0, 2.0, 0.0};
  const auto bursts = observables::detect_bursts(t, signal, 0.1);
  REQUIRE(bursts.size() == 2);
  CHECK(bursts[0] == t[1]);
  CHECK(bursts[1] == t[3]);
}

TEST_CASE("monotone signals have no bursts") {
  const auto t = grid(0.0, 5.0, 100);
  std::vector<double> signal(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) signal[i] = std::exp(-t[i]);
  CHECK(observables::detect_bursts(t, signal).empty());
}

TEST_CASE("burst detection is invariant under positive affine rescaling") {
  const auto t = grid(0.0, 10.0, 201);
  std::vector<double> signal(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    signal[i] = std::exp(-0.5 * t[i]) * (1.0 + std::sin(3.0 * t[i]));

  std::vector<double> rescaled(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) rescaled[i] = 3.7 * signal[i] + 11.0;

  const auto a = observables::detect_bursts(t, signal);
  const auto b = observables::detect_bursts(t, rescaled);
  CHECK_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("a shoulder below the prominence threshold is not a burst") {
  const auto t = grid(0.0, 4.0, 5);
  // Local maximum of height 1 whose base on the right is the 0.96 valley:
  // prominence 0.04 against a threshold of 0.05 * 1.5.
  const std::vector<double> signal{0.0, 1.0, 0.96, 1.5, 0.0};
  const auto bursts = observables::detect_bursts(t, signal, 0.05);
  REQUIRE(bursts.size() == 1);
  CHECK(bursts[0] == t[3]);
}

TEST_CASE("detect_bursts input validation") {
  CHECK_THROWS_WITH_AS(observables::detect_bursts({}, {}, 0.05),
                       Contains("empty or mismatched"), ConfigError);
  CHECK_THROWS_AS(observables::detect_bursts({0.0, 1.0}, {1.0}, 0.05), ConfigError);
  CHECK(observables::detect_bursts({0.0, 1.0}, {0.0, 1.0}, 0.05).empty());
}

TEST_CASE("lifetime of a pure exponential is the decay time") {
  const auto t = grid(0.0, 20.0, 20001);
  std::vector<double> p3(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) p3[i] = 1.0 - std::exp(-t[i]);
  const auto life = observables::lifetime(t, p3);
  CHECK_FALSE(life.lower_bound);
  CHECK(life.tau == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("cascade lifetime approximates the summed channel times") {
  const double g1 = 1.0 / 25.8;
  const double g2 = 1.0;
  const auto t = grid(0.0, 200.0, 4001);
  const auto life = observables::lifetime(t, bateman_p3(t, g1, g2));
  CHECK_FALSE(life.lower_bound);
  CHECK(life.tau == Approx(1.0 / g1 + 1.0 / g2).epsilon(0.05));
}

TEST_CASE("lifetime is grid-converged at the percent level") {
  const double g1 = 1.0 / 25.8;
  const auto coarse_t = grid(0.0, 200.0, 101);
  const auto fine_t = grid(0.0, 200.0, 1001);
  const double coarse = observables::lifetime(coarse_t, bateman_p3(coarse_t, g1, 1.0)).tau;
  const double fine = observables::lifetime(fine_t, bateman_p3(fine_t, g1, 1.0)).tau;
  CHECK(std::abs(coarse - fine) / fine < 0.01);
}

TEST_CASE("a run that never annihilates only bounds the lifetime") {
  const auto t = grid(0.0, 7.0, 11);
  const std::vector<double> p3(t.size(), 0.0);
  const auto life = observables::lifetime(t, p3);
  CHECK(life.lower_bound);
  CHECK(life.tau == 7.0);
}

TEST_CASE("extension factor of a run against itself is exactly one") {
  const auto t = grid(0.0, 20.0, 2001);
  std::vector<double> p3(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) p3[i] = 1.0 - std::exp(-t[i]);
  const auto run = run_with_p3(t, p3);
  CHECK(observables::extension_factor(run, run) == 1.0);
}

TEST_CASE("extension factor rejects unusable references") {
  const auto t = grid(0.0, 5.0, 101);
  std::vector<double> p3(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) p3[i] = 1.0 - std::exp(-t[i]);
  const auto run = run_with_p3(t, p3);
  const auto stuck = run_with_p3(t, std::vector<double>(t.size(), 0.0));
  CHECK_THROWS_WITH_AS(observables::extension_factor(run, stuck),
                       Contains("reference lifetime"), RuntimeFailure);
}

TEST_CASE("burst delay estimate is the mean spacing") {
  CHECK(observables::t_delay_estimate({1.0, 2.5, 4.0}) == 1.5);
  CHECK(std::isnan(observables::t_delay_estimate({1.0})));
  CHECK(std::isnan(observables::t_delay_estimate({})));
}

TEST_CASE("compute_metrics fills every field consistently") {
  const auto t = grid(0.0, 20.0, 2001);
  observables::RunResult run;
  run.t = t;
  run.p0.assign(t.size(), 0.0);
  run.p1.resize(t.size());
  run.p3.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    run.p1[i] = std::exp(-t[i]);
    run.p3[i] = 1.0 - std::exp(-t[i]);
  }
  run.intensity = observables::emission_intensity(t, run.p0, run.p1, 100.0);

  observables::compute_metrics(run, nullptr);
  CHECK(run.metrics.tau_lifetime.tau == Approx(1.0).epsilon(1e-3));
  CHECK(run.metrics.burst_times.empty());
  CHECK(std::isnan(run.metrics.t_delay_estimate));
  CHECK(std::isnan(run.metrics.extension_factor));

  observables::compute_metrics(run, &run);
  CHECK(run.metrics.extension_factor == 1.0);
}

}  // TEST_SUITE
