#include "pssim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pssim/errors.hpp"

namespace pssim::observables {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<double> annihilation_probability(const RunResult& run, double tol) {
  for (std::size_t i = 1; i < run.p3.size(); ++i) {
    if (run.p3[i] < run.p3[i - 1] - tol) {
      std::ostringstream os;
      os << "annihilated fraction decreases by " << run.p3[i - 1] - run.p3[i] << " at t = "
         << run.t[i];
      throw RuntimeFailure(os.str());
    }
  }
  return run.p3;
}

std::vector<double> emission_intensity(const std::vector<double>& t,
                                       const std::vector<double>& p0,
                                       const std::vector<double>& p1, double n_atoms) {
  const std::size_t n = t.size();
  std::vector<double> content(n), deriv(n), out(n);
  for (std::size_t i = 0; i < n; ++i) content[i] = 2.0 * p0[i] + p1[i];
  if (n < 2) return std::vector<double>(n, 0.0);

  deriv[0] = (content[1] - content[0]) / (t[1] - t[0]);
  deriv[n - 1] = (content[n - 1] - content[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    deriv[i] = (content[i + 1] - content[i - 1]) / (t[i + 1] - t[i - 1]);

  // 3-point binomial smoothing of the derivative.
  out[0] = -n_atoms * deriv[0];
  out[n - 1] = -n_atoms * deriv[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = -n_atoms * (deriv[i - 1] + 2.0 * deriv[i] + deriv[i + 1]) / 4.0;
  return out;
}

std::vector<double> detect_bursts(const std::vector<double>& t,
                                  const std::vector<double>& signal, double prominence) {
  if (signal.empty() || t.size() != signal.size())
    throw ConfigError("detect_bursts: empty or mismatched signal");
  const std::size_t n = signal.size();
  std::vector<double> bursts;
  if (n < 3) return bursts;

  const auto [lo_it, hi_it] = std::minmax_element(signal.begin(), signal.end());
  const double threshold = prominence * (*hi_it - *lo_it);

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(signal[i] > signal[i - 1] && signal[i] > signal[i + 1])) continue;
    const double h = signal[i];
    // Lowest point between the peak and the nearest higher ground on each
    // side (or the signal edge); the higher of the two minima is the base.
    double left_min = h;
    for (std::size_t j = i; j-- > 0;) {
      if (signal[j] > h) break;
      left_min = std::min(left_min, signal[j]);
    }
    double right_min = h;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (signal[j] > h) break;
      right_min = std::min(right_min, signal[j]);
    }
    if (h - std::max(left_min, right_min) >= threshold) bursts.push_back(t[i]);
  }
  return bursts;
}

LifetimeResult lifetime(const std::vector<double>& t, const std::vector<double>& p3) {
  if (t.size() < 2 || t.size() != p3.size())
    throw ConfigError("lifetime: need at least two samples");
  const double final_p3 = p3.back();
  if (!(final_p3 > 0.0)) return {t.back(), true};

  const double target = (1.0 - std::exp(-1.0)) * final_p3;
  if (p3.front() >= target) return {t.front(), false};
  for (std::size_t i = 1; i < p3.size(); ++i) {
    if (p3[i] >= target) {
      const double w = (target - p3[i - 1]) / (p3[i] - p3[i - 1]);
      return {t[i - 1] + w * (t[i] - t[i - 1]), false};
    }
  }
  return {t.back(), true};
}

double extension_factor(const RunResult& run, const RunResult& reference) {
  const LifetimeResult ref = lifetime(reference.t, reference.p3);
  if (ref.lower_bound || !(ref.tau > 0.0)) {
    std::ostringstream os;
    os << "reference lifetime " << (ref.lower_bound ? "not reached within its window" : "is zero");
    throw RuntimeFailure("extension_factor: " + os.str());
  }
  return lifetime(run.t, run.p3).tau / ref.tau;
}

double t_delay_estimate(const std::vector<double>& burst_times) {
  if (burst_times.size() < 2) return kNan;
  return (burst_times.back() - burst_times.front()) /
         static_cast<double>(burst_times.size() - 1);
}

void compute_metrics(RunResult& run, const RunResult* reference, double burst_prominence) {
  run.metrics.tau_lifetime = lifetime(run.t, run.p3);
  run.metrics.burst_times = detect_bursts(run.t, run.intensity, burst_prominence);
  run.metrics.t_delay_estimate = t_delay_estimate(run.metrics.burst_times);
  run.metrics.extension_factor = reference ? extension_factor(run, *reference) : kNan;
}

}  // namespace pssim::observables
