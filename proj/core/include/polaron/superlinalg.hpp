#pragma once

#include "polaron/grassmann.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace polaron {

// Z2-graded index space: a parity (0 bosonic, 1 fermionic) per basis index.
struct GradedSpace {
  std::vector<std::int8_t> par;

  GradedSpace() = default;
  explicit GradedSpace(std::vector<std::int8_t> p) : par(std::move(p)) {}

  // The local space C^{1|1}: index 0 bosonic (empty), index 1 fermionic.
  static GradedSpace qubit() { return GradedSpace({0, 1}); }

  // n-fold graded product of qubits; parity of a multi-index is the number
  // of fermionic factors mod 2.
  static GradedSpace qubits(int n);

  static GradedSpace trivial() { return GradedSpace({0}); }

  std::size_t dim() const { return par.size(); }
  int parity(std::size_t i) const { return par[i]; }

  // Space of the graded tensor product this (x) other.
  GradedSpace tensor(const GradedSpace& other) const;

  bool operator==(const GradedSpace& o) const { return par == o.par; }
};

// Dense matrix over the boundary Grassmann algebra with graded row/column
// index spaces.
struct SuperMatrix {
  GradedSpace rows, cols;
  std::vector<AlgebraElement> a;  // row-major, size rows.dim()*cols.dim()

  SuperMatrix() = default;
  SuperMatrix(GradedSpace r, GradedSpace c)
      : rows(std::move(r)), cols(std::move(c)), a(rows.dim() * cols.dim()) {}

  static SuperMatrix identity(const GradedSpace& s);
  static SuperMatrix from_body(const Eigen::MatrixXcd& m, const GradedSpace& r,
                               const GradedSpace& c);

  std::size_t nrows() const { return rows.dim(); }
  std::size_t ncols() const { return cols.dim(); }

  AlgebraElement& at(std::size_t i, std::size_t j) { return a[i * ncols() + j]; }
  const AlgebraElement& at(std::size_t i, std::size_t j) const {
    return a[i * ncols() + j];
  }

  // Complex matrix of one monomial component; body() is the Mono::one part.
  Eigen::MatrixXcd comp(Mono m) const;
  Eigen::MatrixXcd body() const { return comp(Mono::one); }

  double norm_max() const;

  SuperMatrix& operator+=(const SuperMatrix& o);
  SuperMatrix& operator-=(const SuperMatrix& o);
  SuperMatrix& operator*=(cplx s);

  // Entry (i,j) must have Grassmann parity p(i)+p(j) mod 2 up to tol.
  bool is_grade_consistent(double tol = 1e-12) const;
};

SuperMatrix operator+(SuperMatrix x, const SuperMatrix& y);
SuperMatrix operator-(SuperMatrix x, const SuperMatrix& y);
SuperMatrix operator*(const SuperMatrix& x, const SuperMatrix& y);
SuperMatrix operator*(cplx s, SuperMatrix x);
// Left multiplication by an algebra element (entry-wise g * x_ij).
SuperMatrix operator*(const AlgebraElement& g, SuperMatrix x);

// Vectors over the algebra.
using SuperVector = std::vector<AlgebraElement>;
SuperVector operator*(const SuperMatrix& m, const SuperVector& v);
AlgebraElement dot_row(const SuperVector& row, const SuperVector& v);

// Graded tensor product (A (x)s B)^{ac}_{bd} = (-1)^{[p(a)+p(b)]p(c)} A^a_b B^c_d.
SuperMatrix graded_tensor(const SuperMatrix& A, const SuperMatrix& B);

// Graded permutation on qubit (x) qubit: P^{ac}_{bd} = (-1)^{p(a)p(c)} d^a_d d^c_b.
SuperMatrix graded_permutation();

// Embed an operator acting on the listed tensor slots (0-based, order =
// operator slot order) into the n_sites-fold qubit product.  Built from
// iterated graded tensors and adjacent graded permutations, so odd
// operators acquire the sign strings dictated by the graded product rule.
SuperMatrix graded_embed(const SuperMatrix& op, const std::vector<int>& sites,
                         int n_sites);

// Fast path for a grade-consistent even two-slot operator: bystanders stay
// diagonal and the second slot's odd components pick up the parity string of
// the factors in between.  Slot order may be reversed (conjugates by the
// graded permutation).  Agrees with graded_embed on its domain.
SuperMatrix graded_embed_two_even(const SuperMatrix& op, int first, int second,
                                  int n_sites);

// Supertrace str M = sum_a (-1)^{p(a)} M^a_a.
AlgebraElement supertrace(const SuperMatrix& m);

// Partial supertrace over one tensor factor.  `factors` describes the
// factorization of the row/column space (row space must equal column space).
SuperMatrix partial_supertrace(const SuperMatrix& m,
                               const std::vector<GradedSpace>& factors,
                               std::size_t which);

// Ordinary (sign-free) trace, used by the eigenvalue-sum identity.
AlgebraElement trace(const SuperMatrix& m);

// Graded transpose in one tensor factor, sign (-1)^{p(x)[p(x)+p(y)]} on the
// transposed indices, together with its inverse (sign on the other index).
// The R-matrix crossing identity holds as
//   super_transpose(R21(-u-4eta), f, 1) * super_transpose_inv(R21(u), f, 0)
//     = zeta(u+2eta) Id,
// which is the calibration that fixes this convention pair.
SuperMatrix super_transpose(const SuperMatrix& m,
                            const std::vector<GradedSpace>& factors,
                            std::size_t which);
SuperMatrix super_transpose_inv(const SuperMatrix& m,
                                const std::vector<GradedSpace>& factors,
                                std::size_t which);

// --- dense complex eigensolver over the body --------------------------------

struct BodyEigenpair {
  cplx lambda;
  Eigen::VectorXcd right;
  Eigen::RowVectorXcd left;  // left * M = lambda * left (no conjugation)
  int cluster = -1;          // index of the degeneracy cluster
};

struct BodyEigOptions {
  double cluster_tol = 1e-8;  // relative to spectral scale
};

// Full dense nonsymmetric eigendecomposition with left/right vectors
// biorthogonalized (left_i . right_j = delta_ij) after degeneracy clustering.
// Throws std::runtime_error with conditioning info on failure.
std::vector<BodyEigenpair> body_eig(const Eigen::MatrixXcd& m,
                                    const BodyEigOptions& opts = {});

// --- graded eigensolver ------------------------------------------------------

struct GradedEigenpair {
  cplx lambda_body;
  AlgebraElement lambda_soul;  // body component zero
  SuperVector right_vec, left_vec;
  int degeneracy_block = -1;  // cluster index, -1 if the eigenvalue is simple
  bool flagged = false;       // inconsistent shifted system / unresolved cluster
  std::string flag_reason;

  AlgebraElement lambda() const {
    return AlgebraElement::scalar(lambda_body) + lambda_soul;
  }
};

struct GradedEigOptions {
  double cluster_tol = 1e-8;       // body degeneracy clustering, relative
  double consistency_tol = 1e-8;   // RHS-vs-left-null-space check, relative
};

// Order-by-order diagonalization of M = M0 + V1 + V2 over the algebra.  The
// expansion in Grassmann degree is exact since degree three vanishes.
// Degenerate body clusters are rediagonalized through the cluster effective
// matrix of soul contributions; unresolved clusters come back flagged.
std::vector<GradedEigenpair> graded_eig(const SuperMatrix& m,
                                        const GradedEigOptions& opts = {});

}  // namespace polaron
