#pragma once

#include "polaron/grassmann.hpp"
#include "polaron/superlinalg.hpp"

#include <array>

namespace polaron {

// Model parameters; single source of truth for every operator and scalar
// function.  psi_-/psi_+ are the boundary parameters, eta the anisotropy,
// amps the complex amplitudes of the odd boundary generators a+, b+, a-, b-.
struct ModelParams {
  int n_sites = 2;
  cplx eta{0.43, 0.0};
  cplx psi_minus{0.62, 0.31};
  cplx psi_plus{1.07, -0.24};
  std::array<cplx, 4> amps{cplx{1.0}, cplx{1.0}, cplx{1.0}, cplx{1.0}};

  void validate() const;  // throws std::invalid_argument on a bad parameter set
  bool diagonal(double tol = 0.0) const;

  AlgebraElement alpha_plus() const {
    return AlgebraElement::monomial(Mono::ap, amps[0]);
  }
  AlgebraElement beta_plus() const {
    return AlgebraElement::monomial(Mono::bp, amps[1]);
  }
  AlgebraElement alpha_minus() const {
    return AlgebraElement::monomial(Mono::am, amps[2]);
  }
  AlgebraElement beta_minus() const {
    return AlgebraElement::monomial(Mono::bm, amps[3]);
  }
  // G = beta+ alpha- - alpha+ beta-.
  AlgebraElement G() const {
    return grassmann_G(amps[0], amps[1], amps[2], amps[3]);
  }
};

// Scalars and scalar functions derived from the parameters.
struct DerivedScalars {
  cplx eta, psi_minus, psi_plus;
  cplx omega_minus, omega_plus;  // 1/sin(psi-), 1/(2 cos(2eta) sin(psi+))
  cplx hop_t, int_V;             // -csc(2eta), cot(2eta)
  cplx n_plus, n_minus;          // (1/2) csc(2eta) csc(psi+) sin(2eta +- psi+)
  cplx n_zero;                   // (1/2) cot(psi-)

  cplx g(cplx u) const;     // sin(u - 2eta)/sin(2eta)
  cplx zeta(cplx u) const;  // g(u) g(-u)
};

DerivedScalars derive(const ModelParams& p);

// The 4x4 R-matrix divided by sin(2eta); purely complex entries.
SuperMatrix r_matrix(cplx u, cplx eta);

// Max-norm residual of the graded Yang-Baxter equation
// R12(u) R13(u+mu) R23(mu) - R23(mu) R13(u+mu) R12(u) on the triple product.
double ybe_residual(cplx u, cplx mu, cplx eta);
// Max-norm residual of R12(u) R21(-u) - zeta(u) Id.
double unitarity_residual(cplx u, cplx eta);
// Max-norm residual of R21^{st2}(-u-4eta) R21^{st1}(u) - zeta(u+2eta) Id.
double crossing_residual(cplx u, cplx eta);
// Max-norm residual of R(u+pi) + sigma^z_1 R(u) sigma^z_1.
double periodicity_residual(cplx u, cplx eta);

// Boundary reflection matrices on the auxiliary space (Grassmann entries).
SuperMatrix k_minus(cplx u, const ModelParams& p);
SuperMatrix k_plus(cplx u, const ModelParams& p);

// det(K) of a 2x2 supermatrix; the odd off-diagonal entries drop out of the
// boundary determinants because a+b+ = a-b- = 0.
AlgebraElement det2(const SuperMatrix& k);

// Monodromies on sites 1..N (factors 0..N-1) with the auxiliary space last:
// T(u) = R_{N0} ... R_{10},  That(u) = R_{01} ... R_{0N}.
SuperMatrix monodromy(cplx u, const ModelParams& p);
SuperMatrix hat_monodromy(cplx u, const ModelParams& p);

// Super transfer matrix t(u) = str_0 { K+(u) T(u) K-(u) That(u) }.
SuperMatrix transfer(cplx u, const ModelParams& p);

// Fock-space fermion operators on 2^N, site 1 = first tensor factor (most
// significant bit), with an explicit Jordan-Wigner sign string.
enum class JwString { left, right };
Eigen::MatrixXcd fermion_annihilator(int site, int n_sites,
                                     JwString s = JwString::left);
Eigen::MatrixXcd fermion_creator(int site, int n_sites,
                                 JwString s = JwString::left);
Eigen::MatrixXcd number_op(int site, int n_sites);
Eigen::MatrixXcd parity_op(int n_sites);  // (-1)^{total particle number}

// Full open-chain Hamiltonian H_bulk + H_diag + H_nondiag as a supermatrix
// over the N-site graded space.  The nondiagonal boundary terms are particle
// sources and sinks at sites 1 and N with odd algebra amplitudes
// csc(psi-) alpha-, csc(psi-) beta-, csc(psi+) alpha+, csc(psi+) beta+, in
// the sign and string convention under which (d/du t)|_0 = 2H + const.
SuperMatrix hamiltonian(const ModelParams& p);
// Bulk + diagonal boundary part only (complex matrix).
Eigen::MatrixXcd hamiltonian_diagonal_part(const ModelParams& p);

struct TransferDerivative {
  SuperMatrix h_num;         // (t'(0) - const)/2
  AlgebraElement constant;   // additive constant, fixed by trace matching
  double stencil_mismatch;   // relative difference of the two refinements
};

// Numerical u-derivative of the transfer matrix at 0 (fourth order central
// differences plus one Richardson refinement).  Throws if the two stencils
// disagree by more than 1e-6 relative.
TransferDerivative hamiltonian_from_transfer(const ModelParams& p,
                                             double step = 1e-3);

// || s * sin(2 eps)^{2N} t(u; eta=eps) - [semiclassical form] || / scale with
// the sign s fixed by the eta->0 limit of the construction; O(eps).
double semiclassical_residual(cplx u, const ModelParams& p,
                              double epsilon = 1e-5);

struct AsymptoticResult {
  double rel_residual;   // deviation of t/prefactor from the leading operator
  bool g_leading;        // false when the G coefficient vanishes (diagonal)
};

// Leading large-z behaviour of t at u = x - iY, compared against the
// predicted prefactor times G Prod_j (nbar_j - e^{2i eta} n_j)(n_j + e^{2i eta} nbar_j).
// All comparisons are formed on ratios.
AsymptoticResult asymptotic_residual(const ModelParams& p, double y1 = 20.0,
                                     double y2 = 25.0, double x = 0.3);

// Commutation residual ||[t(u), t(v)]|| / scale.
double transfer_commutation_residual(cplx u, cplx v, const ModelParams& p);

}  // namespace polaron
