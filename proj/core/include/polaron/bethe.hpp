#pragma once

#include "polaron/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace polaron {

// Bethe root data for one transfer-matrix eigenvalue.
struct BetheRoots {
  int m_sector = 0;          // M: number of roots in each tier
  std::vector<cplx> v0;      // first tier (diagonal)
  std::vector<cplx> v1;      // second tier (nondiagonal); empty in diagonal mode
  double residual_diag = 0.0;
  double residual_nondiag = 0.0;
  int iterations = 0;
  bool converged = true;
};

// The h-pair as displayed with the fusion normalization:
//   h-(u) = -omega+ omega- (sin(u+2eta)/sin 2eta)^{2N}
//            sin(2u+4eta)/sin(2u+2eta) sin(u+psi+) sin(u+psi-),
//   h+(u) = -h-(-u-2eta).
// h-(u) = -det_rep_h(u); throws std::domain_error at poles of sin(2u+2eta).
std::pair<cplx, cplx> h_pm(cplx u, const ModelParams& p);

// W coefficient of the f-deformation,
// (-1)^M / sin[psi+ + psi- + (N-2M-1) 2eta]; the sector parity factor is
// fixed by matching the G coefficient of the large-z asymptotics, where the
// leading operator carries (-1)^{particle number}.  Throws std::domain_error
// at the resonance.
cplx bethe_w(int m_sector, const ModelParams& p);

// f+ = W sin(2u+4eta), f- = -W sin(2u).
std::pair<cplx, cplx> f_pm(cplx u, int m_sector, const ModelParams& p);

// prod_l sin(u - v_l) sin(u + v_l + 2eta); 1 for an empty root set.
cplx q_poly(cplx u, std::span<const cplx> roots, cplx eta);

enum class TqMode { diagonal, full };

// Eigenvalue from the TQ equation.  Diagonal mode returns the complex
// Lambda_diag; full mode adds the G part of the deformed equation.  The signs
// are fixed by Lambda(0) = 1 (the normalization t(0) = Id):
//   Lambda_diag(u) = [h(u) Q(u-2eta) + h(-u-2eta) Q(u+2eta)]/Q(u)
// with h = det_rep_h = -h-.  Throws std::domain_error at zeros of Q.
AlgebraElement lambda_tq(cplx u, const BetheRoots& roots, const ModelParams& p,
                         TqMode mode);
cplx lambda_tq_diag(cplx u, const BetheRoots& roots, const ModelParams& p);
// G coefficient of the full eigenvalue.
cplx lambda_tq_g(cplx u, const BetheRoots& roots, const ModelParams& p);

// Residuals of the diagonal Bethe equations in the displayed product form,
// one per root.  Also exposed: the equivalent h-ratio form, for the
// cross-check of the two algebraic routes.
std::vector<cplx> bae_residual_diag(const BetheRoots& roots,
                                    const ModelParams& p);
std::vector<cplx> bae_residual_diag_ratio_form(const BetheRoots& roots,
                                               const ModelParams& p);

// Residuals of the second (nondiagonal) tier in the displayed ratio form at
// each v0 root; requires both tiers.  Near-singular denominators are
// reported through the `singular` flag.
struct NondiagResidual {
  std::vector<cplx> values;
  bool singular = false;
};
NondiagResidual bae_residual_nondiag(const BetheRoots& roots,
                                     const ModelParams& p);

// Polynomial (residue) forms of both tiers, free of poles; these are the
// functions the Newton solver drives to zero.
std::vector<cplx> bae_residue_diag(std::span<const cplx> v0,
                                   const ModelParams& p);
std::vector<cplx> bae_residue_nondiag(std::span<const cplx> v0,
                                      std::span<const cplx> v1, int m_sector,
                                      const ModelParams& p,
                                      const std::function<cplx(cplx)>& lam_diag);

// --- damped Newton on complex root vectors -----------------------------------

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 200;
  double fd_step = 1e-7;
  int max_halvings = 8;
};

struct NewtonResult {
  std::vector<cplx> roots;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;
  std::vector<double> history;  // residual per iteration
};

NewtonResult newton_solve(
    const std::function<std::vector<cplx>(std::span<const cplx>)>& residual_fn,
    std::vector<cplx> seed, const NewtonOptions& opts = {});

// --- full spectrum reproduction ----------------------------------------------

struct EigenRecord {
  cplx lambda_body;            // ED eigenvalue body at u_ref
  cplx lambda_g;               // ED G component at u_ref
  int m_sector = -1;
  std::vector<cplx> v0, v1;
  double body_dev = 0.0;       // max over u samples, TQ vs ED
  double g_dev = 0.0;
  double res_diag = 0.0;       // max |explicit-form BAE residual|
  double res_nondiag = 0.0;
  bool matched = false;
  std::string note;
};

struct SpectrumReport {
  cplx u_ref;
  std::vector<EigenRecord> records;
  int n_matched = 0;
};

struct SpectrumOptions {
  cplx u_ref{0.37, 0.21};
  double body_tol = 1e-8;
  double g_tol = 1e-7;
  int grid_size = 24;     // sample points for the Q/b linear solves
  std::uint64_t seed = 1; // deterministic grid jitter
};

// Diagonalizes t(u_ref), infers the sector M of every eigenvalue from the
// particle number of its body eigenvector, solves both Bethe tiers (Fourier
// polynomial kernel extraction for Q and b, Newton polish on the residue
// forms), and reports the TQ-vs-ED deviation of body and G components on the
// sample grid.  Unmatched eigenvalues stay in the report with a note.
SpectrumReport spectrum_match(const ModelParams& p,
                              const std::vector<cplx>& u_samples,
                              const SpectrumOptions& opts = {});

}  // namespace polaron
