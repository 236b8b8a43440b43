#include "pssim/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pssim/errors.hpp"

namespace pssim::ladder {

namespace {

using std::int64_t;

struct Window {
  int64_t k_lo, k_hi, m_lo, m_hi;
  std::size_t rows() const { return static_cast<std::size_t>(k_hi - k_lo + 1); }
  std::size_t cols() const { return static_cast<std::size_t>(m_hi - m_lo + 1); }
  std::size_t size() const { return rows() * cols(); }
  std::size_t idx(int64_t k, int64_t m) const {
    return static_cast<std::size_t>(k - k_lo) * cols() + static_cast<std::size_t>(m - m_lo);
  }
};

}  // namespace

double& LadderDistribution::at(int64_t k, int64_t m) {
  return p[static_cast<std::size_t>(k - k_lo) * static_cast<std::size_t>(m_hi - m_lo + 1) +
           static_cast<std::size_t>(m - m_lo)];
}

double LadderDistribution::at(int64_t k, int64_t m) const {
  if (k < k_lo || k > k_hi || m < m_lo || m > m_hi) return 0.0;
  return p[static_cast<std::size_t>(k - k_lo) * static_cast<std::size_t>(m_hi - m_lo + 1) +
           static_cast<std::size_t>(m - m_lo)];
}

LadderDistribution delta_distribution(int64_t n_atoms, int64_t k0, int64_t m0) {
  if (n_atoms < 1) throw ConfigError("ladder: n_atoms must be >= 1");
  if (k0 < 0 || m0 < 0 || k0 + m0 > n_atoms)
    throw ConfigError("ladder: initial cell outside 0 <= k, 0 <= m, k + m <= N");
  LadderDistribution d;
  d.n_atoms = n_atoms;
  d.k_lo = d.k_hi = k0;
  d.m_lo = d.m_hi = m0;
  d.p = {1.0};
  return d;
}

LadderGenerator::LadderGenerator(const ValidatedParams& params, double mu1_product) {
  if (params.rabi != 0.0)
    throw ConfigError("ladder engine requires rabi = 0 (no coherent drive)");
  n_ = params.n_atoms;
  gamma1_ = params.gamma1;
  gamma2_ = params.gamma2;
  if (mu1_product > 0.0) {
    mu_ = mu1_product / static_cast<double>(n_);
  } else {
    mu_ = params.mu1_effective();
  }
}

double LadderGenerator::emission_rate(int64_t k, int64_t m) const {
  const double g = static_cast<double>(n_ - k - m);
  return gamma1_ * static_cast<double>(k) * (1.0 + mu_ * g);
}

double LadderGenerator::annihilation_rate(int64_t k, int64_t m) const {
  return gamma2_ * static_cast<double>(n_ - k - m);
}

std::size_t triangle_size(int64_t n_atoms) {
  return static_cast<std::size_t>((n_atoms + 1) * (n_atoms + 2) / 2);
}

std::size_t triangle_index(int64_t n_atoms, int64_t k, int64_t m) {
  return static_cast<std::size_t>(k * (n_atoms + 1) - k * (k - 1) / 2 + m);
}

ode::Rhs LadderGenerator::dense_rhs() const {
  const int64_t n = n_;
  const LadderGenerator gen = *this;
  return [gen, n](double, const double* p, double* dp) {
    for (int64_t k = 0; k <= n; ++k) {
      for (int64_t m = 0; m <= n - k; ++m) {
        const std::size_t i = triangle_index(n, k, m);
        double d = -(gen.emission_rate(k, m) + gen.annihilation_rate(k, m)) * p[i];
        if (k + 1 + m <= n)
          d += gen.emission_rate(k + 1, m) * p[triangle_index(n, k + 1, m)];
        if (m > 0) d += gen.annihilation_rate(k, m - 1) * p[triangle_index(n, k, m - 1)];
        dp[i] = d;
      }
    }
  };
}

namespace {

// Right-hand side over the active window. Cells with k + m > N are
// structurally zero and no flow ever enters them, so they are skipped.
void window_rhs(const LadderGenerator& gen, const Window& w, const std::vector<double>& p,
                std::vector<double>& dp) {
  const int64_t n = gen.n_atoms();
  for (int64_t k = w.k_lo; k <= w.k_hi; ++k) {
    for (int64_t m = w.m_lo; m <= w.m_hi; ++m) {
      const std::size_t i = w.idx(k, m);
      if (k + m > n) {
        dp[i] = 0.0;
        continue;
      }
      double d = -(gen.emission_rate(k, m) + gen.annihilation_rate(k, m)) * p[i];
      if (k + 1 <= w.k_hi && k + 1 + m <= n) d += gen.emission_rate(k + 1, m) * p[w.idx(k + 1, m)];
      if (m - 1 >= w.m_lo) d += gen.annihilation_rate(k, m - 1) * p[w.idx(k, m - 1)];
      dp[i] = d;
    }
  }
}

struct Reduction {
  double sum = 0.0, mean_k = 0.0, mean_m = 0.0, min_p = 0.0;
};

// Negative cells within the clamp tolerance contribute zero to the moments.
Reduction reduce(const Window& w, const std::vector<double>& p) {
  Reduction r;
  for (int64_t k = w.k_lo; k <= w.k_hi; ++k) {
    for (int64_t m = w.m_lo; m <= w.m_hi; ++m) {
      const double v = p[w.idx(k, m)];
      r.min_p = std::min(r.min_p, v);
      if (v <= 0.0) continue;
      r.sum += v;
      r.mean_k += static_cast<double>(k) * v;
      r.mean_m += static_cast<double>(m) * v;
    }
  }
  return r;
}

void remap(const Window& from, const std::vector<double>& p, const Window& to,
           std::vector<double>& out) {
  out.assign(to.size(), 0.0);
  const int64_t k_lo = std::max(from.k_lo, to.k_lo);
  const int64_t k_hi = std::min(from.k_hi, to.k_hi);
  const int64_t m_lo = std::max(from.m_lo, to.m_lo);
  const int64_t m_hi = std::min(from.m_hi, to.m_hi);
  for (int64_t k = k_lo; k <= k_hi; ++k)
    for (int64_t m = m_lo; m <= m_hi; ++m) out[to.idx(k, m)] = p[from.idx(k, m)];
}

}  // namespace

LadderTrajectory evolve_ladder(const LadderDistribution& p0, const LadderGenerator& gen,
                               const ode::IntegrationSpec& spec, const LadderOptions& options) {
  ode::check(spec);
  if (p0.n_atoms != gen.n_atoms())
    throw ConfigError("ladder: initial distribution and generator disagree on n_atoms");
  const int64_t n = gen.n_atoms();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double t0 = spec.t_start, t1 = spec.t_end;
  const int n_samples = spec.sample_count;

  Window w{p0.k_lo, p0.k_hi, p0.m_lo, p0.m_hi};
  std::vector<double> y(p0.p), f(w.size());

  LadderTrajectory out;
  out.t.reserve(n_samples);
  double clipped = 0.0;

  auto grid_time = [&](int i) {
    if (i == n_samples - 1) return t1;
    return t0 + (t1 - t0) * (static_cast<double>(i) / (n_samples - 1));
  };
  auto record = [&](double t, const Reduction& r) {
    out.t.push_back(t);
    out.p1.push_back(r.mean_k * inv_n);
    out.p3.push_back(r.mean_m * inv_n);
    out.p2.push_back(r.sum - out.p1.back() - out.p3.back());
    out.sum_drift = std::max(out.sum_drift, std::abs(r.sum + clipped - 1.0));
    out.min_probability = std::min(out.min_probability, r.min_p);
    if (out.sum_drift > 1e-7) {
      std::ostringstream os;
      os << "ladder probability drifted by " << out.sum_drift << " at t = " << t;
      throw RuntimeFailure(os.str());
    }
  };

  // Probes run on y over the current window; mass collects the clamped
  // probability of the probed lines, the return value their max magnitude.
  auto line_stats = [&](int64_t k_a, int64_t k_b, int64_t m_a, int64_t m_b, double& mass) {
    double mx = 0.0;
    mass = 0.0;
    for (int64_t k = k_a; k <= k_b; ++k) {
      for (int64_t m = m_a; m <= m_b; ++m) {
        const double v = y[w.idx(k, m)];
        mx = std::max(mx, std::abs(v));
        mass += std::max(v, 0.0);
      }
    }
    return mx;
  };

  // Expansion toward the flow directions (emission lowers k, annihilation
  // raises m) whenever the boundary is populated. Runs before the first
  // step as well: a freshly seeded delta sits on its own window edge and
  // would otherwise lose its entire first-step outflow.
  constexpr int64_t chunk = 16;
  auto expand_window = [&]() {
    Window nw = w;
    double edge_mass = 0.0;
    if (w.k_lo > 0 && line_stats(w.k_lo, w.k_lo, w.m_lo, w.m_hi, edge_mass) > options.grow_eps)
      nw.k_lo = std::max<int64_t>(0, w.k_lo - chunk);
    if (w.m_hi < n && line_stats(w.k_lo, w.k_hi, w.m_hi, w.m_hi, edge_mass) > options.grow_eps)
      nw.m_hi = std::min(n, w.m_hi + chunk);
    if (nw.k_lo == w.k_lo && nw.m_hi == w.m_hi) return false;
    std::vector<double> ny;
    remap(w, y, nw, ny);
    w = nw;
    y.swap(ny);
    return true;
  };

  expand_window();
  f.resize(w.size());
  window_rhs(gen, w, y, f);
  ++out.stats.rhs_evals;
  record(t0, reduce(w, y));
  int next_sample = 1;

  // Deterministic starting step from the largest initial outflow rate.
  double max_rate = 1e-300;
  for (int64_t k = w.k_lo; k <= w.k_hi; ++k)
    for (int64_t m = w.m_lo; m <= w.m_hi; ++m)
      if (k + m <= n)
        max_rate = std::max(max_rate, gen.emission_rate(k, m) + gen.annihilation_rate(k, m));
  double h = std::min(0.01 / max_rate, t1 - t0);
  if (spec.max_step > 0.0) h = std::min(h, spec.max_step);

  ode::PiController ctrl;
  std::vector<std::vector<double>> ks(ode::dp::kStages);
  std::vector<double> work, y_new, err;
  double t = t0;

  while (t < t1) {
    const double h_min =
        16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
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

    const std::size_t sz = w.size();
    for (auto& k : ks) k.resize(sz);
    work.resize(sz);
    y_new.resize(sz);
    err.resize(sz);

    ks[0] = f;
    for (int s = 1; s < ode::dp::kStages; ++s) {
      for (std::size_t i = 0; i < sz; ++i) {
        double acc = 0.0;
        for (int q = 0; q < s; ++q) acc += ode::dp::a[s][q] * ks[q][i];
        work[i] = y[i] + h * acc;
      }
      window_rhs(gen, w, work, ks[s]);
      ++out.stats.rhs_evals;
    }
    for (std::size_t i = 0; i < sz; ++i) {
      double acc5 = 0.0, acce = 0.0;
      for (int s = 0; s < ode::dp::kStages; ++s) {
        acc5 += ode::dp::b5[s] * ks[s][i];
        acce += ode::dp::e[s] * ks[s][i];
      }
      y_new[i] = y[i] + h * acc5;
      err[i] = h * acce;
    }
    const double en = ode::error_norm(err, y, y_new, spec.rtol, spec.atol);

    if (en <= 1.0) {
      const double t_new = last ? t1 : t + h;
      const std::vector<double>& f_new = ks[6];
      while (next_sample < n_samples && grid_time(next_sample) <= t_new) {
        const double ts = grid_time(next_sample);
        if (ts == t_new) {
          record(ts, reduce(w, y_new));
        } else {
          const double th = (ts - t) / h;
          for (std::size_t i = 0; i < sz; ++i) {
            const double d = y_new[i] - y[i];
            const double c2 = 3.0 * d - h * (2.0 * f[i] + f_new[i]);
            const double c3 = -2.0 * d + h * (f[i] + f_new[i]);
            work[i] = y[i] + th * (h * f[i] + th * (c2 + th * c3));
          }
          record(ts, reduce(w, work));
        }
        ++next_sample;
      }
      t = t_new;
      y.swap(y_new);
      f = f_new;
      ctrl.on_accept(en);
      h *= ctrl.factor(en);

      // Window maintenance: expand toward the flow directions when the
      // boundary is populated, drop edge rows/columns that have emptied.
      // All probing runs on the old window before any bound moves.
      Window nw = w;
      double edge_mass = 0.0;
      if (w.k_lo > 0 && line_stats(w.k_lo, w.k_lo, w.m_lo, w.m_hi, edge_mass) > options.grow_eps)
        nw.k_lo = std::max<int64_t>(0, w.k_lo - chunk);
      if (w.m_hi < n && line_stats(w.k_lo, w.k_hi, w.m_hi, w.m_hi, edge_mass) > options.grow_eps)
        nw.m_hi = std::min(n, w.m_hi + chunk);

      double clip_k = 0.0, clip_m = 0.0;
      int64_t new_k_hi = w.k_hi, new_m_lo = w.m_lo;
      double line_mass = 0.0;
      while (new_k_hi > w.k_lo &&
             line_stats(new_k_hi, new_k_hi, w.m_lo, w.m_hi, line_mass) < options.clip_eps) {
        clip_k += line_mass;
        --new_k_hi;
      }
      while (new_m_lo < w.m_hi &&
             line_stats(w.k_lo, w.k_hi, new_m_lo, new_m_lo, line_mass) < options.clip_eps) {
        clip_m += line_mass;
        ++new_m_lo;
      }
      // Hysteresis: reshaping invalidates the cached derivative, so only
      // shrink once several lines are removable.
      double clip_gain = 0.0;
      if (new_k_hi <= w.k_hi - 4) {
        nw.k_hi = new_k_hi;
        clip_gain += clip_k;
      }
      if (new_m_lo >= w.m_lo + 4) {
        nw.m_lo = new_m_lo;
        clip_gain += clip_m;
      }

      if (nw.k_lo != w.k_lo || nw.k_hi != w.k_hi || nw.m_lo != w.m_lo || nw.m_hi != w.m_hi) {
        clipped += clip_gain;
        if (clipped > 1e-9) {
          std::ostringstream os;
          os << "ladder window clipped " << clipped << " probability by t = " << t;
          throw RuntimeFailure(os.str());
        }
        std::vector<double> ny;
        remap(w, y, nw, ny);
        w = nw;
        y.swap(ny);
        f.resize(w.size());
        window_rhs(gen, w, y, f);
        ++out.stats.rhs_evals;
      }
      ++out.stats.accepted;
    } else {
      ++out.stats.rejected;
      ctrl.on_reject();
      h *= ctrl.factor(en);
    }
    if (spec.max_step > 0.0) h = std::min(h, spec.max_step);
  }

  if (next_sample < n_samples) {
    const Reduction r = reduce(w, y);
    while (next_sample < n_samples) {
      record(grid_time(next_sample), r);
      ++next_sample;
    }
  }

  out.clipped_mass = clipped;
  out.final_state.n_atoms = n;
  out.final_state.k_lo = w.k_lo;
  out.final_state.k_hi = w.k_hi;
  out.final_state.m_lo = w.m_lo;
  out.final_state.m_hi = w.m_hi;
  out.final_state.p = y;
  return out;
}

}  // namespace pssim::ladder
