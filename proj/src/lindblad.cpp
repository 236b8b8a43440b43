#include "pssim/lindblad.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pssim/errors.hpp"

namespace pssim::lindblad {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

long pow4(long n) {
  long d = 1;
  for (long i = 0; i < n; ++i) d *= 4;
  return d;
}

long digit(long basis, long j) { return (basis >> (2 * j)) & 3; }

}  // namespace

CollectiveCouplingMatrix dicke_coupling(long n_atoms, double mu0, double mu1) {
  CollectiveCouplingMatrix c;
  c.aleph0 = Eigen::MatrixXd::Constant(n_atoms, n_atoms, mu0);
  c.aleph1 = Eigen::MatrixXd::Constant(n_atoms, n_atoms, mu1);
  c.aleph0.diagonal().setOnes();
  c.aleph1.diagonal().setOnes();
  return c;
}

SparseOp atom_op(long n_atoms, long j, int alpha, int beta) {
  const long dim = pow4(n_atoms);
  SparseOp op(dim, dim);
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(dim / 4);
  const long shift = (static_cast<long>(alpha) - beta) << (2 * j);
  for (long b = 0; b < dim; ++b) {
    if (digit(b, j) == beta) entries.emplace_back(b + shift, b, Complex{1.0, 0.0});
  }
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

DensityMatrix product_state(long n_atoms, const Eigen::Matrix4cd& eta) {
  DensityMatrix rho = DensityMatrix::Ones(1, 1);
  for (long j = 0; j < n_atoms; ++j) {
    DensityMatrix next(rho.rows() * 4, rho.cols() * 4);
    for (long r = 0; r < rho.rows(); ++r)
      for (long c = 0; c < rho.cols(); ++c) next.block<4, 4>(4 * r, 4 * c) = rho(r, c) * eta;
    rho.swap(next);
  }
  return rho;
}

Eigen::Matrix4cd single_atom_state(const std::array<double, 4>& fractions, SeedPolicy seed,
                                   double epsilon) {
  Eigen::Matrix4cd eta = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) eta(i, i) = fractions[i];
  if (seed == SeedPolicy::tipping) {
    if (epsilon < 0.0 || epsilon > 1.0) {
      std::ostringstream os;
      os << "invalid seed epsilon = " << epsilon << " (must be in [0, 1])";
      throw ConfigError(os.str());
    }
    const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    for (const auto& pr : pairs) {
      const double v = epsilon * std::sqrt(fractions[pr[0]] * fractions[pr[1]]);
      eta(pr[0], pr[1]) = v;
      eta(pr[1], pr[0]) = v;
    }
  }
  return eta;
}

namespace {

double norm_1(const SparseOp& m) {
  double best = 0.0;
  for (long k = 0; k < m.outerSize(); ++k) {
    double sum = 0.0;
    for (SparseOp::InnerIterator it(m, k); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

double norm_inf(const SparseOp& m) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m.rows());
  for (long k = 0; k < m.outerSize(); ++k)
    for (SparseOp::InnerIterator it(m, k); it; ++it) sums(it.row()) += std::abs(it.value());
  return sums.maxCoeff();
}

void check_coupling(const Eigen::MatrixXd& aleph, long n, const char* name) {
  if (aleph.rows() != n || aleph.cols() != n) {
    std::ostringstream os;
    os << "coupling matrix " << name << " is " << aleph.rows() << "x" << aleph.cols()
       << ", expected " << n << "x" << n;
    throw ConfigError(os.str());
  }
  if ((aleph - aleph.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError(std::string("coupling matrix ") + name + " is not symmetric");
  for (long j = 0; j < n; ++j) {
    if (std::abs(aleph(j, j) - 1.0) > 1e-12)
      throw ConfigError(std::string("coupling matrix ") + name + " diagonal must be 1");
    for (long l = 0; l < n; ++l) {
      if (std::abs(aleph(j, l)) > 1.0 + 1e-12)
        throw ConfigError(std::string("coupling matrix ") + name +
                          " entries must lie in [-1, 1]");
    }
  }
}

}  // namespace

Generator::Generator(const ValidatedParams& params, const CollectiveCouplingMatrix& coupling) {
  n_ = params.n_atoms;
  if (n_ < 1 || n_ > kMaxAtoms) {
    std::ostringstream os;
    os << "exact engine supports 1 to " << kMaxAtoms << " atoms, got " << n_;
    throw ConfigError(os.str());
  }
  check_coupling(coupling.aleph0, n_, "aleph0");
  check_coupling(coupling.aleph1, n_, "aleph1");
  dim_ = pow4(n_);
  rabi_ = params.rabi;

  // Pre-build the per-atom operators each transition needs.
  std::vector<SparseOp> s10(n_), s21(n_), s32(n_), x02(n_);
  for (long j = 0; j < n_; ++j) {
    s10[j] = atom_op(n_, j, 1, 0);
    s21[j] = atom_op(n_, j, 2, 1);
    s32[j] = atom_op(n_, j, 3, 2);
    x02[j] = SparseOp(atom_op(n_, j, 0, 2) + SparseOp(atom_op(n_, j, 2, 0)));
  }

  // Diagonalizing the real symmetric coupling matrix turns the cross-term
  // double sum into independent jump modes J_r = sqrt(gamma_i * lambda_r) *
  // sum_j v_rj L_j.
  auto add_transition = [&](const Eigen::MatrixXd& aleph, double gamma,
                            const std::vector<SparseOp>& lower) {
    if (gamma == 0.0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aleph);
    for (long r = 0; r < n_; ++r) {
      double lambda = es.eigenvalues()(r);
      if (lambda < -1e-9) throw ConfigError("coupling matrix is not positive semidefinite");
      if (lambda < 1e-12) continue;
      const double scale = std::sqrt(gamma * lambda);
      SparseOp a(dim_, dim_);
      for (long j = 0; j < n_; ++j) {
        const Complex v{scale * es.eigenvectors()(j, r), 0.0};
        a = SparseOp(a + v * lower[j]);
      }
      Mode mode;
      mode.a = a;
      mode.a_dag = a.adjoint();
      modes_.push_back(std::move(mode));
    }
  };

  add_transition(coupling.aleph0, params.gamma0, s10);
  add_transition(coupling.aleph1, params.gamma1, s21);
  if (params.gamma2 != 0.0) {
    const Complex scale{std::sqrt(params.gamma2), 0.0};
    for (long j = 0; j < n_; ++j) {
      Mode mode;
      mode.a = SparseOp(scale * s32[j]);
      mode.a_dag = mode.a.adjoint();
      modes_.push_back(std::move(mode));
    }
  }

  SparseOp h(dim_, dim_);
  for (long j = 0; j < n_; ++j) h = SparseOp(h + x02[j]);
  h = SparseOp(rabi_ * h);

  SparseOp m(dim_, dim_);
  for (const Mode& md : modes_) m = SparseOp(m + SparseOp(md.a_dag * md.a));
  k_const_ = SparseOp((-kI) * h - Complex{0.5, 0.0} * m);
  k_dag_ = k_const_.adjoint();

  // ||L rho|| <= (2 ||K|| + sum_r ||J_r||^2) ||rho|| in any submultiplicative
  // norm; mixing the 1- and inf-norms of J keeps the bound sharp for the
  // non-normal collective modes.
  norm_bound_ = 2.0 * norm_1(k_const_);
  for (const Mode& md : modes_) norm_bound_ += norm_1(md.a) * norm_inf(md.a);
  work_.resize(dim_, dim_);
}

void Generator::apply(const DensityMatrix& rho, DensityMatrix& drho) const {
  drho.noalias() = k_const_ * rho;
  drho.noalias() += rho * k_dag_;
  for (const Mode& m : modes_) {
    work_.noalias() = m.a * rho;
    drho.noalias() += work_ * m.a_dag;
  }
}

std::function<void(const DensityMatrix&, DensityMatrix&)> build_generator(
    const ValidatedParams& params, const CollectiveCouplingMatrix& coupling) {
  auto gen = std::make_shared<Generator>(params, coupling);
  return [gen](const DensityMatrix& rho, DensityMatrix& drho) { gen->apply(rho, drho); };
}

namespace {

// Advances rho by exp(L dt): split dt so each substep has ||L|| h <= 4, then
// sum the Taylor series rho + h L rho + (h L)^2 rho / 2 + ... in place until
// the term drops below the rounding floor of the accumulated state. The
// generator preserves Hermiticity term by term, so the state stays Hermitian
// to rounding.
void propagate(const Generator& gen, double dt, DensityMatrix& rho, DensityMatrix& term,
               DensityMatrix& next, ode::StepStats& stats) {
  constexpr double kTheta = 4.0;
  const long segments =
      std::max(1L, static_cast<long>(std::ceil(gen.norm_bound() * dt / kTheta)));
  const double h = dt / static_cast<double>(segments);
  for (long s = 0; s < segments; ++s) {
    term = rho;
    bool converged = false;
    for (int j = 1; j <= 60; ++j) {
      gen.apply(term, next);
      ++stats.rhs_evals;
      term = (h / j) * next;
      rho += term;
      if (term.norm() <= 1e-16 * rho.norm()) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw RuntimeFailure("exponential propagator series failed to converge (non-finite state?)");
    ++stats.accepted;
  }
}

}  // namespace

ExactTrajectory evolve(const DensityMatrix& rho0, const Generator& gen,
                       const ode::IntegrationSpec& spec) {
  const long dim = gen.dim();
  if (rho0.rows() != dim || rho0.cols() != dim) {
    std::ostringstream os;
    os << "initial state is " << rho0.rows() << "x" << rho0.cols() << ", generator needs " << dim
       << "x" << dim;
    throw ConfigError(os.str());
  }
  ode::check(spec);

  ExactTrajectory out;
  out.positivity_floor = 1.0;
  out.samples.reserve(spec.sample_count);

  DensityMatrix rho = rho0;
  DensityMatrix term(dim, dim), next(dim, dim);
  const double span = spec.t_end - spec.t_start;
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es;
  double prev_t = spec.t_start;
  for (int k = 0; k < spec.sample_count; ++k) {
    const double t = (k == spec.sample_count - 1)
                         ? spec.t_end
                         : spec.t_start + span * k / (spec.sample_count - 1);
    if (k > 0) propagate(gen, t - prev_t, rho, term, next, out.stats);
    prev_t = t;

    const double trace_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    const double herm_err = (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
    es.compute((rho + rho.adjoint().eval()) / 2.0, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();

    out.trace_drift = std::max(out.trace_drift, trace_err);
    out.hermiticity_drift = std::max(out.hermiticity_drift, herm_err);
    out.positivity_floor = std::min(out.positivity_floor, min_eig);

    if (trace_err > 1e-9 || min_eig < -1e-9 || herm_err > 1e-10) {
      std::ostringstream os;
      os << "density matrix invariant violated at t = " << t
         << ": worst eigenvalue " << min_eig << ", trace drift " << trace_err
         << ", hermiticity drift " << herm_err;
      throw RuntimeFailure(os.str());
    }
    out.samples.push_back({t, rho});
  }
  return out;
}

Reduced reduce_observables(const DensityMatrix& rho) {
  const long dim = rho.rows();
  long n = 0;
  while (pow4(n) < dim) ++n;

  Reduced red;
  Complex s01{}, s12{}, s02{};
  for (long j = 0; j < n; ++j) {
    const long step = 1L << (2 * j);
    for (long b = 0; b < dim; ++b) {
      switch (digit(b, j)) {
        case 0:
          red.p[0] += rho(b, b).real();
          break;
        case 1:
          red.p[1] += rho(b, b).real();
          s01 += rho(b, b - step);       // <S01> picks up rho(b, b with 1->0)
          break;
        case 2:
          red.p[2] += rho(b, b).real();
          s12 += rho(b, b - step);       // <S12>: digit 2 -> 1
          s02 += rho(b, b - 2 * step);   // <S02>: digit 2 -> 0
          break;
        default:
          red.p[3] += rho(b, b).real();
          break;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& p : red.p) p *= inv_n;
  red.s01_abs = std::abs(s01) * inv_n;
  red.s12_abs = std::abs(s12) * inv_n;
  red.s02_abs = std::abs(s02) * inv_n;
  return red;
}

}  // namespace pssim::lindblad
