#pragma once

#include <functional>
#include <vector>

namespace pssim::ode {

struct IntegrationSpec {
  double t_start = 0.0;
  double t_end = 1.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step = 0.0;  // 0 disables the cap
  int sample_count = 201;
};

// Throws ConfigError on t_end <= t_start, non-positive tolerances, or
// sample_count < 2.
void check(const IntegrationSpec& spec);

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> y;
};

using Rhs = std::function<void(double t, const double* y, double* dydt)>;

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  StepStats stats;
};

// Adaptive Dormand-Prince 5(4) integration. Samples lie on the uniform grid
// spanning [t_start, t_end] with exactly sample_count points including both
// endpoints, filled by cubic Hermite interpolation on accepted steps.
// Throws RuntimeFailure on step-size underflow or non-finite rhs output,
// reporting the failing time.
Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0, const IntegrationSpec& spec);

// Fixed-step driver (n_steps equal 5th-order steps, no error control);
// returns y(t_end). Used by the convergence probe and its tests.
std::vector<double> integrate_fixed(const Rhs& rhs, const std::vector<double>& y0,
                                    double t_start, double t_end, long n_steps);

// Measured convergence order from Richardson differences of fixed-step runs
// at halving step sizes: slope of log(|y_h - y_{h/2}|) against log h.
// Returns +infinity when every difference vanishes (rhs integrated exactly).
double convergence_order(const Rhs& rhs, const std::vector<double>& y0, double t_end);

// Dormand-Prince 5(4) tableau, exposed for engines that run their own
// stepping loop over resizable state (the configuration-ladder engine).
namespace dp {
inline constexpr int kStages = 7;
extern const double c[kStages];
extern const double a[kStages][6];
extern const double b5[kStages];     // 5th-order solution weights
extern const double e[kStages];      // b5 - b4, error-estimate weights
}  // namespace dp

// Standard PI step-size controller for the 5(4) pair. factor() maps the
// scaled error norm of an attempted step to the step-size multiplier;
// accepted/rejected bookkeeping feeds the next proposal.
class PiController {
 public:
  double factor(double err_norm);
  void on_accept(double err_norm);
  void on_reject();

 private:
  double err_old_ = 1e-4;
  bool rejected_last_ = false;
};

// Scaled RMS error norm: sqrt(mean((e_i / (atol + rtol*max(|y0_i|,|y1_i|)))^2)).
double error_norm(const std::vector<double>& e, const std::vector<double>& y0,
                  const std::vector<double>& y1, double rtol, double atol);

}  // namespace pssim::ode
