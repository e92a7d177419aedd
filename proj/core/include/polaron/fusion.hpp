#pragma once

#include "polaron/model.hpp"

#include <functional>
#include <map>
#include <optional>

namespace polaron {

// Super quantum determinant Delta(u) = zeta^{2N}(u+2eta) g(-2u-6eta) g(2u+2eta)
// det K+(u) det K-(u+2eta).  Grassmann-free by nilpotency of the boundary
// generators; returned as the complex body.
cplx quantum_determinant(cplx u, const ModelParams& p);

// Delta(u)/zeta(2u+4eta); throws std::domain_error at the zeta zero.
cplx tilde_delta(cplx u, const ModelParams& p);

// Fused transfer matrices t^(n), with t^(0) = Id, t^(1) = -t(u) and
// t^(n+1)(u) = t^(n)(u) t^(1)(u + n 2eta) + Delta~(u + (n-1) 2eta) t^(n-1)(u).
// Results are memoized per (n, u).
class FusedTransfer {
 public:
  explicit FusedTransfer(ModelParams p) : params_(std::move(p)) {}

  const SuperMatrix& operator()(int n, cplx u);
  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  std::map<std::pair<int, std::pair<double, double>>, SuperMatrix> cache_;
};

// Anisotropy of the level-n truncation, eta_n = (pi/2)/(n+1).
double eta_root_of_unity(int n);

// Scalar functions entering the truncation identity at eta = eta_n, built
// from the boundary h-functions (det_rep_h below):
//   phi_tau_n(u) = -h(u) h~(u + 2(n-1) eta_n),
//   phi_id_n(u)  = (-1)^{n+1} [ prod_{k=0..n} h(u+2k eta_n)
//                             + prod_{k=-1..n-1} h~(u+2k eta_n) ].
// The alternating sign is the parity of the cyclic determinant expansion
// that ties the truncated hierarchy to the TQ representation.
struct TruncationScalars {
  int n;
  ModelParams params;  // eta already set to eta_n

  cplx phi_id(cplx u) const;
  cplx phi_tau(cplx u) const;
};

TruncationScalars truncation_scalars(int n, ModelParams p);

// || t^(n+1)(u, eta_n) - phi_id Id + phi_tau t^(n-1)(u + 2 eta_n) || / scale.
// The model parameters' eta is replaced by eta_n.  Throws for n < 1.
double truncation_residual(int n, cplx u, const ModelParams& p);

// h-function of the determinant representation,
// h(u) = (sin(u+2eta)/sin 2eta)^{2N} sin(2u+4eta)/sin(2u+2eta) g-(u) g+(u)
// with g-+(u) = omega-+ sin(u + psi-+), and h~(u) = h(-u-4eta).
cplx det_rep_h(cplx u, const ModelParams& p);
cplx det_rep_h_tilde(cplx u, const ModelParams& p);

// Residuals of the three consistency conditions tying h, h~ to the quantum
// determinant and the truncation functions at eta = eta_n.
struct HConsistency {
  double delta;    // h(u+2eta) h~(u-2eta) + Delta~(u)
  double phi_tau;  // h(u) h~(u+2(n-1)eta) + phi_tau_n(u)
  double phi_id;   // prod h + prod h~ - phi_id_n(u)
};
HConsistency h_consistency(int n, cplx u, const ModelParams& p);

// Cyclic tridiagonal determinant of the representation: (n+1)x(n+1) with
// Lambda(u+2k eta) on the diagonal and -h_k, -h~_k off-diagonals.  The
// samples supply Lambda(u + 2k eta) for k = 0..n.  Rows are normalized by
// their max element before expanding.
AlgebraElement det_rep_determinant(cplx u, const ModelParams& p, int n,
                                   const std::vector<AlgebraElement>& samples);
// max |component| of the normalized determinant.
double det_rep_residual(cplx u, const ModelParams& p, int n,
                        const std::vector<AlgebraElement>& samples);

// kappa(u) entering the Q^(n) definition.
cplx kappa_tq(cplx u, const ModelParams& p);

struct QRecursion {
  std::vector<cplx> grid;                 // u points actually used
  std::vector<std::vector<cplx>> q;       // q[n][i] = Q^(n)(u_i)
  std::vector<double> step_change;        // successive change of the shape
  std::vector<double> ansatz_deviation;   // shape deviation from the ansatz
  int skipped_points = 0;                 // grid points at kappa/Delta~ poles
};

// Q^(n)(u) = Lambda^(n)(u - n 2eta) / prod_{k=0..n} kappa(u - k 2eta), driven
// by the scalar fusion recursion on the eigenvalue evaluator.
//
// Expanding the fused eigenvalue over the TQ solution shows that Q^(n)
// equals Q(u) times an n-dependent scalar times the drifting deficit
// 1/[Q(u - n 2eta) h(-u + n 2eta)], so the raw sequence has no pointwise
// limit for generic eta.  What converges (for grids deep in the lower half
// plane, where the correction terms are exponentially small) is the shape:
// ansatz_deviation[n] measures the u-independence of
//   rho_n(u) = Q^(n)(u) h(-u + n 2eta) Q_ans(u - n 2eta) / Q_ans(u)
// across the grid, which vanishes iff the recursion output is proportional
// to the ansatz Q.
QRecursion q_recursion(int n_max, const std::vector<cplx>& u_grid,
                       const std::function<cplx(cplx)>& eigen_fn,
                       const ModelParams& p,
                       const std::vector<cplx>& ansatz_roots = {},
                       bool have_ansatz = false);

}  // namespace polaron
