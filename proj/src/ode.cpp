#include "pssim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pssim/errors.hpp"

namespace pssim::ode {

namespace dp {

const double c[kStages] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};

const double a[kStages][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};

const double b5[kStages] = {35.0 / 384,     0.0,        500.0 / 1113, 125.0 / 192,
                            -2187.0 / 6784, 11.0 / 84,  0.0};

// b5 minus the embedded 4th-order weights.
const double e[kStages] = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                           -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace dp

void check(const IntegrationSpec& spec) {
  if (!(spec.t_end > spec.t_start)) {
    std::ostringstream os;
    os << "invalid integration window: t_end = " << spec.t_end << " must exceed t_start = "
       << spec.t_start;
    throw ConfigError(os.str());
  }
  if (!(spec.rtol > 0.0)) throw ConfigError("invalid rtol: must be > 0");
  if (!(spec.atol > 0.0)) throw ConfigError("invalid atol: must be > 0");
  if (!(spec.max_step >= 0.0)) throw ConfigError("invalid max_step: must be >= 0");
  if (spec.sample_count < 2) throw ConfigError("invalid samples: must be >= 2");
}

double error_norm(const std::vector<double>& e, const std::vector<double>& y0,
                  const std::vector<double>& y1, double rtol, double atol) {
  const std::size_t n = e.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = e[i] / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double PiController::factor(double err_norm) {
  // Error exponent 1/5 for the 5(4) pair, split into the usual PI blend.
  constexpr double kAlpha = 0.7 / 5.0;
  constexpr double kBeta = 0.4 / 5.0;
  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  double max_factor = rejected_last_ ? 1.0 : 10.0;
  if (err_norm == 0.0) return max_factor;
  const double f = kSafety * std::pow(err_norm, -kAlpha) * std::pow(err_old_, kBeta);
  return std::clamp(f, kMinFactor, max_factor);
}

void PiController::on_accept(double err_norm) {
  err_old_ = std::max(err_norm, 1e-10);
  rejected_last_ = false;
}

void PiController::on_reject() { rejected_last_ = true; }

namespace {

void require_finite(const std::vector<double>& v, double t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "non-finite derivative at t = " << t;
      throw RuntimeFailure(os.str());
    }
  }
}

// One 5th-order step from (t, y, f0) with step h. Fills y_out and the error
// estimate; returns the rhs at the step end (FSAL) through f_out.
struct Stepper {
  explicit Stepper(std::size_t n) : k(dp::kStages, std::vector<double>(n)), work(n) {}

  void step(const Rhs& rhs, double t, const std::vector<double>& y, const std::vector<double>& f0,
            double h, std::vector<double>& y_out, std::vector<double>& err,
            std::vector<double>& f_out, StepStats& stats) {
    const std::size_t n = y.size();
    k[0] = f0;
    for (int s = 1; s < dp::kStages; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += dp::a[s][j] * k[j][i];
        work[i] = y[i] + h * acc;
      }
      rhs(t + dp::c[s] * h, work.data(), k[s].data());
      ++stats.rhs_evals;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc5 = 0.0, acce = 0.0;
      for (int s = 0; s < dp::kStages; ++s) {
        acc5 += dp::b5[s] * k[s][i];
        acce += dp::e[s] * k[s][i];
      }
      y_out[i] = y[i] + h * acc5;
      err[i] = h * acce;
    }
    f_out = k[6];  // stage 7 is evaluated at (t + h, y_out)
  }

  std::vector<std::vector<double>> k;
  std::vector<double> work;
};

double initial_step(const Rhs& rhs, double t0, const std::vector<double>& y0,
                    const std::vector<double>& f0, double span, double rtol, double atol,
                    StepStats& stats) {
  const std::size_t n = y0.size();
  auto scaled_norm = [&](const std::vector<double>& v, const std::vector<double>& ref) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = atol + rtol * std::abs(ref[i]);
      const double r = v[i] / scale;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };
  const double d0 = scaled_norm(y0, y0);
  const double d1 = scaled_norm(f0, y0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);

  std::vector<double> y1(n), f1(n), df(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
  rhs(t0 + h0, y1.data(), f1.data());
  ++stats.rhs_evals;
  for (std::size_t i = 0; i < n; ++i) df[i] = f1[i] - f0[i];
  const double d2 = scaled_norm(df, y0) / h0;

  const double dm = std::max(d1, d2);
  double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace

Trajectory integrate(const Rhs& rhs, const std::vector<double>& y0, const IntegrationSpec& spec) {
  check(spec);
  const std::size_t n = y0.size();
  const double t0 = spec.t_start;
  const double t1 = spec.t_end;
  const int m = spec.sample_count;

  Trajectory out;
  out.samples.reserve(m);
  auto grid_time = [&](int kidx) {
    if (kidx == m - 1) return t1;
    return t0 + (t1 - t0) * (static_cast<double>(kidx) / (m - 1));
  };

  std::vector<double> y = y0, f(n);
  rhs(t0, y.data(), f.data());
  ++out.stats.rhs_evals;
  require_finite(f, t0);

  out.samples.push_back({t0, y});
  int next_sample = 1;

  Stepper stepper(n);
  PiController ctrl;
  std::vector<double> y_new(n), err(n), f_new(n);

  double h = initial_step(rhs, t0, y, f, t1 - t0, spec.rtol, spec.atol, out.stats);
  if (spec.max_step > 0.0) h = std::min(h, spec.max_step);

  double t = t0;
  while (t < t1) {
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (h < h_min) {
      std::ostringstream os;
      os << "step size underflow at t = " << t << " (h = " << h << ")";
      throw RuntimeFailure(os.str());
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }

    stepper.step(rhs, t, y, f, h, y_new, err, f_new, out.stats);
    require_finite(f_new, t + h);
    const double en = error_norm(err, y, y_new, spec.rtol, spec.atol);

    if (en <= 1.0) {
      const double t_new = last ? t1 : t + h;
      // Cubic Hermite interpolation over the accepted step covers every
      // grid point inside it. The incremental form keeps constant segments
      // (and step endpoints) exact to the bit.
      while (next_sample < m && grid_time(next_sample) <= t_new) {
        const double ts = grid_time(next_sample);
        TrajectorySample s;
        s.t = ts;
        if (ts == t_new) {
          s.y = y_new;
        } else {
          const double th = (ts - t) / h;
          s.y.resize(n);
          for (std::size_t i = 0; i < n; ++i) {
            const double d = y_new[i] - y[i];
            const double c2 = 3.0 * d - h * (2.0 * f[i] + f_new[i]);
            const double c3 = -2.0 * d + h * (f[i] + f_new[i]);
            s.y[i] = y[i] + th * (h * f[i] + th * (c2 + th * c3));
          }
        }
        out.samples.push_back(std::move(s));
        ++next_sample;
      }
      t = t_new;
      y.swap(y_new);
      f.swap(f_new);
      ++out.stats.accepted;
      ctrl.on_accept(en);
    } else {
      ++out.stats.rejected;
      ctrl.on_reject();
    }
    h *= ctrl.factor(en);
    if (spec.max_step > 0.0) h = std::min(h, spec.max_step);
  }

  // The final grid point coincides with t1; make sure it is present even if
  // floating-point comparison skipped it in the loop above.
  if (next_sample < m) {
    while (next_sample < m - 1) {
      // Unreached interior points can only arise from round-off at the very
      // end of the window; they collapse onto the final state.
      out.samples.push_back({grid_time(next_sample), y});
      ++next_sample;
    }
    out.samples.push_back({t1, y});
  }
  return out;
}

std::vector<double> integrate_fixed(const Rhs& rhs, const std::vector<double>& y0, double t_start,
                                    double t_end, long n_steps) {
  if (n_steps < 1) throw ConfigError("integrate_fixed: n_steps must be >= 1");
  const std::size_t n = y0.size();
  const double h = (t_end - t_start) / static_cast<double>(n_steps);
  std::vector<double> y = y0, f(n), y_new(n), err(n), f_new(n);
  StepStats stats;
  Stepper stepper(n);
  double t = t_start;
  rhs(t, y.data(), f.data());
  for (long s = 0; s < n_steps; ++s) {
    stepper.step(rhs, t, y, f, h, y_new, err, f_new, stats);
    y.swap(y_new);
    f.swap(f_new);
    t = t_start + (t_end - t_start) * (static_cast<double>(s + 1) / n_steps);
  }
  return y;
}

double convergence_order(const Rhs& rhs, const std::vector<double>& y0, double t_end) {
  const long steps[] = {20, 40, 80, 160, 320};
  const int runs = 5;
  std::vector<std::vector<double>> finals;
  finals.reserve(runs);
  for (long s : steps) finals.push_back(integrate_fixed(rhs, y0, 0.0, t_end, s));

  // Richardson differences: |y_h - y_{h/2}| ~ C h^p.
  std::vector<double> log_h, log_d;
  for (int i = 0; i + 1 < runs; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < y0.size(); ++j) {
      const double d = finals[i][j] - finals[i + 1][j];
      acc += d * d;
    }
    const double diff = std::sqrt(acc);
    if (diff > 1e-13) {
      log_h.push_back(std::log(t_end / static_cast<double>(steps[i])));
      log_d.push_back(std::log(diff));
    }
  }
  if (log_h.empty()) return std::numeric_limits<double>::infinity();  // integrated exactly

  // Least-squares slope of log d against log h.
  const double npts = static_cast<double>(log_h.size());
  double sh = 0, sd = 0, shh = 0, shd = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sh += log_h[i];
    sd += log_d[i];
    shh += log_h[i] * log_h[i];
    shd += log_h[i] * log_d[i];
  }
  const double denom = npts * shh - sh * sh;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return (npts * shd - sh * sd) / denom;
}

}  // namespace pssim::ode
