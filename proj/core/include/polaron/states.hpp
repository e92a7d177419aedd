#pragma once

#include "polaron/model.hpp"

#include <map>
#include <string>

namespace polaron {

// Closed forms of the M=0 eigenvector amplitudes:
//   b+_l = -sin(psi- + (l-1) 2eta) / sin((N-1) 2eta + psi- + psi+)
//   b-_l = -sin(psi+ + (N-l) 2eta) / sin((N-1) 2eta + psi- + psi+)
//   B_kl = [sin((N-1) 2eta + S)/sin((N-2) 2eta + S)] (b+_{k+1} b-_l + b-_k b+_{l-1}).
struct VacuumCoefficients {
  std::vector<cplx> b_plus, b_minus;  // 1-based site index stored at [site-1]
  Eigen::MatrixXcd big_b;             // B(k-1, l-1) for k < l, 0 elsewhere
};

// Throws std::domain_error at the resonant denominators.
VacuumCoefficients vacuum_coefficients(const ModelParams& p);

// lambda_nondiag = csc(psi-) b+_1 = csc(psi+) b-_N = -1/sin((N-1)2eta+psi-+psi+).
cplx vacuum_lambda_nondiag(const ModelParams& p);
// lambda_diag = V(N-1) + N+ + (1/2) cot(psi-): the Fock vacuum energy.
cplx vacuum_lambda_diag(const ModelParams& p);

// The M=0 eigenvector over the graded Fock space.  The closed-form
// amplitudes enter the one-particle sector with a sign flip relative to the
// bare ansatz: this compensates the all-positive boundary term convention of
// hamiltonian() (see that function's comment), so that
// H |Psi> = (lambda_diag + G lambda_nondiag) |Psi> holds with lambda_nondiag
// = csc(psi-) b+_1 exactly.
SuperVector vacuum_state(const ModelParams& p);

// max-norm of H|Psi> - (lambda_diag + G lambda_nondiag)|Psi>.
double vacuum_check(const ModelParams& p);

// Same coefficients from the linear relations the eigenproblem induces
// sector by sector (six b-relations, seven B-relation families), solved as
// dense systems; independent of the closed forms.  lambda_diag is supplied.
VacuumCoefficients oracle_recursion(const ModelParams& p, cplx lambda_diag);

// JSON dump: basis occupation string -> monomial coefficient map.
std::string vacuum_state_json(const ModelParams& p);

// --- generic-M structure of eigenvectors --------------------------------------

struct AnsatzProjection {
  int m_sector;
  // Norms of the nine allowed (monomial, particle-sector) blocks.
  std::map<std::string, double> block_norms;
  double leakage;  // largest amplitude outside the allowed blocks
};

// Decomposes an eigenvector over (monomial x particle sector) blocks and
// measures the population outside the nine blocks of the generic-M pattern:
// {1, a+b-, b+a-} x |M>, {b+, b-} x |M+1>, b+b- x |M+2>,
// {a+, a-} x |M-1>, a+a- x |M-2>.
AnsatzProjection project_generic_ansatz(const SuperVector& vec, int m_sector,
                                        int n_sites);

}  // namespace polaron
