#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "pssim/ode.hpp"
#include "pssim/params.hpp"

namespace pssim::lindblad {

using DensityMatrix = Eigen::MatrixXcd;
using SparseOp = Eigen::SparseMatrix<std::complex<double>>;

// Hard cap on the exact engine: 4^6 = 4096 basis states, dense matrices.
constexpr long kMaxAtoms = 6;

// Real symmetric cross-coupling matrices for the two radiative transitions,
// unit diagonal. The imaginary (dipole-dipole shift) parts are zero by
// construction here.
struct CollectiveCouplingMatrix {
  Eigen::MatrixXd aleph0, aleph1;
};

// Small-sample limit: every off-diagonal entry equals mu_i.
CollectiveCouplingMatrix dicke_coupling(long n_atoms, double mu0, double mu1);

// |alpha><beta| acting on atom j, identity elsewhere; dim = 4^n_atoms.
SparseOp atom_op(long n_atoms, long j, int alpha, int beta);

// Uncorrelated product rho = eta^(x)N of one single-atom density matrix.
DensityMatrix product_state(long n_atoms, const Eigen::Matrix4cd& eta);

// Single-atom matrix with the given diagonal and, under tipping, the
// radiative-pair coherences set to epsilon*sqrt(f_a f_b).
Eigen::Matrix4cd single_atom_state(const std::array<double, 4>& fractions, SeedPolicy seed,
                                   double epsilon);

// The full master-equation right-hand side in the resonant rotating frame:
// coherent 1S <-> 3D drive plus collective radiative decay on both
// transitions and per-atom annihilation. Precomputes the jump operators as
// modes of the coupling matrices, so cross terms cost the same as diagonal
// ones. The generator is constant in time, which evolve() exploits by
// propagating with its matrix exponential.
class Generator {
 public:
  Generator(const ValidatedParams& params, const CollectiveCouplingMatrix& coupling);

  long n_atoms() const { return n_; }
  long dim() const { return dim_; }
  double rabi() const { return rabi_; }

  // Upper bound on the induced norm of the superoperator, used to pick the
  // substep count for exponential propagation.
  double norm_bound() const { return norm_bound_; }

  // Rotating-frame rhs: drho = K rho + rho K^dag + sum_r J_r rho J_r^dag.
  void apply(const DensityMatrix& rho, DensityMatrix& drho) const;

 private:
  struct Mode {
    SparseOp a, a_dag;  // jump operator scaled by sqrt(rate), and its adjoint
  };

  long n_ = 0;
  long dim_ = 0;
  double rabi_ = 0.0;
  double norm_bound_ = 0.0;
  std::vector<Mode> modes_;
  SparseOp k_const_, k_dag_;       // -i H - (1/2) sum J^dag J, and adjoint
  mutable DensityMatrix work_;     // scratch for the jump products
};

std::function<void(const DensityMatrix&, DensityMatrix&)> build_generator(
    const ValidatedParams& params, const CollectiveCouplingMatrix& coupling);

struct ExactSample {
  double t;
  DensityMatrix rho;
};

struct ExactTrajectory {
  std::vector<ExactSample> samples;
  ode::StepStats stats;
  double trace_drift = 0.0;       // max |tr rho - 1|
  double positivity_floor = 0.0;  // smallest eigenvalue seen
  double hermiticity_drift = 0.0; // max |rho - rho^dag| entry
};

// Integrates the master equation over the uniform sample grid of spec by
// applying the exact propagator exp(L dt) between samples (scaled-and-squared
// Taylor evaluation, accurate to rounding, so rtol/atol are not consulted)
// and checks the density-matrix invariants (trace within 1e-9 of 1,
// eigenvalues above -1e-9, Hermitian within 1e-10) at every sample; a
// violation aborts with the worst eigenvalue and trace drift in the
// diagnostic. stats counts substeps as accepted and generator applications
// as rhs_evals.
ExactTrajectory evolve(const DensityMatrix& rho0, const Generator& gen,
                       const ode::IntegrationSpec& spec);

struct Reduced {
  std::array<double, 4> p{};
  double s01_abs = 0.0, s12_abs = 0.0, s02_abs = 0.0;
};

// Per-atom averages of the level occupations and coherence magnitudes.
Reduced reduce_observables(const DensityMatrix& rho);

}  // namespace pssim::lindblad
