#pragma once

#include "polaron/model.hpp"

namespace polaron {

// Spin-1/2 site operators on the 2^N space, site 1 = first tensor factor.
// Basis per site: index 0 = up (empty in the fermion picture), 1 = down
// (occupied), so n_j = S^-_j S^+_j.
enum class SpinKind { x, y, z, plus, minus };
Eigen::MatrixXcd spin_op(SpinKind k, int site, int n_sites);

struct JwImages {
  std::vector<Eigen::MatrixXcd> creators;      // c_j^dag = e^{i phi_j} S^-_j
  std::vector<Eigen::MatrixXcd> annihilators;  // c_j = e^{-i phi_j} S^+_j
};

// Jordan-Wigner images of the fermion operators in the spin representation,
// with the phase string e^{i phi_j} = prod_{l<j} (1 - 2 S^+_l S^-_l)
// realized as a diagonal sign matrix.
JwImages jw_images(int n_sites);

// XXZ chain with boundary fields matching the bulk + diagonal-boundary
// polaron Hamiltonian, including the additive constants the identification
// produces: sum_j [2t(SxSx + SySy) + 2V SzSz] + 2 N0 Sz_1
// + (N+ + N-)(Sz_N + 1/2) + [V(N-1)/2 - N-] Id.
Eigen::MatrixXcd xxz_hamiltonian(const ModelParams& p);

// Bulk + diagonal boundary Hamiltonian assembled from the jw_images fermion
// operators (the representation in which the XXZ identification is local).
// It is a fermion gauge transform of hamiltonian_diagonal_part: hopping signs
// differ site by site, spectra agree.
Eigen::MatrixXcd polaron_diag_in_jw_rep(const ModelParams& p);

// || polaron_diag_in_jw_rep - H_XXZ ||_max, both sides built independently;
// throws std::invalid_argument when called with nondiagonal amplitudes
// (those terms have no local spin image).
double xxz_equivalence_check(const ModelParams& p);

// Max deviation between the sorted spectra of the two sides.
double xxz_spectrum_deviation(const ModelParams& p);

}  // namespace polaron
