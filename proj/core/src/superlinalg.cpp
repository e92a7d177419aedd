#include "polaron/superlinalg.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polaron {

namespace {

constexpr std::array<Mono, 4> kOddMonos = {Mono::ap, Mono::bp, Mono::am,
                                           Mono::bm};
constexpr std::array<Mono, 4> kEvenSoulMonos = {Mono::ap_am, Mono::ap_bm,
                                                Mono::bp_am, Mono::bp_bm};
constexpr std::array<Mono, 8> kSoulMonos = {Mono::ap,    Mono::bp,
                                            Mono::am,    Mono::bm,
                                            Mono::ap_am, Mono::ap_bm,
                                            Mono::bp_am, Mono::bp_bm};

}  // namespace

GradedSpace GradedSpace::qubits(int n) {
  GradedSpace s;
  const std::size_t d = std::size_t{1} << n;
  s.par.resize(d);
  for (std::size_t i = 0; i < d; ++i)
    s.par[i] = static_cast<std::int8_t>(std::popcount(i) & 1);
  return s;
}

GradedSpace GradedSpace::tensor(const GradedSpace& other) const {
  GradedSpace s;
  s.par.reserve(dim() * other.dim());
  for (std::size_t a = 0; a < dim(); ++a)
    for (std::size_t c = 0; c < other.dim(); ++c)
      s.par.push_back(static_cast<std::int8_t>((par[a] + other.par[c]) & 1));
  return s;
}

SuperMatrix SuperMatrix::identity(const GradedSpace& s) {
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    m.at(i, i) = AlgebraElement::scalar(1.0);
  return m;
}

SuperMatrix SuperMatrix::from_body(const Eigen::MatrixXcd& b,
                                   const GradedSpace& r, const GradedSpace& c) {
  if (static_cast<std::size_t>(b.rows()) != r.dim() ||
      static_cast<std::size_t>(b.cols()) != c.dim())
    throw std::invalid_argument("from_body: shape does not match spaces");
  SuperMatrix m(r, c);
  for (std::size_t i = 0; i < r.dim(); ++i)
    for (std::size_t j = 0; j < c.dim(); ++j)
      m.at(i, j) = AlgebraElement::scalar(b(i, j));
  return m;
}

Eigen::MatrixXcd SuperMatrix::comp(Mono mono) const {
  Eigen::MatrixXcd b(nrows(), ncols());
  const int k = static_cast<int>(mono);
  for (std::size_t i = 0; i < nrows(); ++i)
    for (std::size_t j = 0; j < ncols(); ++j) b(i, j) = at(i, j).c[k];
  return b;
}

double SuperMatrix::norm_max() const {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, max_abs(x));
  return m;
}

SuperMatrix& SuperMatrix::operator+=(const SuperMatrix& o) {
  if (a.size() != o.a.size()) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
  return *this;
}
SuperMatrix& SuperMatrix::operator-=(const SuperMatrix& o) {
  if (a.size() != o.a.size()) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
  return *this;
}
SuperMatrix& SuperMatrix::operator*=(cplx s) {
  for (auto& x : a) x *= s;
  return *this;
}

bool SuperMatrix::is_grade_consistent(double tol) const {
  const double scale = std::max(norm_max(), 1e-300);
  for (std::size_t i = 0; i < nrows(); ++i)
    for (std::size_t j = 0; j < ncols(); ++j) {
      const int want = (rows.parity(i) + cols.parity(j)) & 1;
      const auto& x = at(i, j);
      for (int k = 0; k < kAlgebraDim; ++k)
        if ((kMonoDegree[k] & 1) != want && std::abs(x.c[k]) > tol * scale)
          return false;
    }
  return true;
}

SuperMatrix operator+(SuperMatrix x, const SuperMatrix& y) { return x += y; }
SuperMatrix operator-(SuperMatrix x, const SuperMatrix& y) { return x -= y; }
SuperMatrix operator*(cplx s, SuperMatrix x) { return x *= s; }

SuperMatrix operator*(const AlgebraElement& g, SuperMatrix x) {
  for (auto& e : x.a) e = g * e;
  return x;
}

SuperMatrix operator*(const SuperMatrix& x, const SuperMatrix& y) {
  if (x.ncols() != y.nrows()) throw std::invalid_argument("shape mismatch");
  SuperMatrix r(x.rows, y.cols);
  const std::size_t n = x.nrows(), m = y.ncols(), k = x.ncols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const AlgebraElement& xe = x.at(i, l);
      if (max_abs(xe) == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const AlgebraElement& ye = y.at(l, j);
        if (max_abs(ye) == 0.0) continue;
        mul_acc(r.at(i, j), xe, ye);
      }
    }
  return r;
}

SuperVector operator*(const SuperMatrix& m, const SuperVector& v) {
  if (m.ncols() != v.size()) throw std::invalid_argument("shape mismatch");
  SuperVector r(m.nrows());
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j)
      mul_acc(r[i], m.at(i, j), v[j]);
  return r;
}

AlgebraElement dot_row(const SuperVector& row, const SuperVector& v) {
  if (row.size() != v.size()) throw std::invalid_argument("shape mismatch");
  AlgebraElement r;
  for (std::size_t i = 0; i < row.size(); ++i) mul_acc(r, row[i], v[i]);
  return r;
}

SuperMatrix graded_tensor(const SuperMatrix& A, const SuperMatrix& B) {
  SuperMatrix r(A.rows.tensor(B.rows), A.cols.tensor(B.cols));
  const std::size_t br = B.nrows(), bc = B.ncols();
  for (std::size_t a = 0; a < A.nrows(); ++a)
    for (std::size_t b = 0; b < A.ncols(); ++b) {
      const AlgebraElement& ae = A.at(a, b);
      if (max_abs(ae) == 0.0) continue;
      const int pab = (A.rows.parity(a) + A.cols.parity(b)) & 1;
      for (std::size_t c = 0; c < br; ++c)
        for (std::size_t d = 0; d < bc; ++d) {
          const AlgebraElement& be = B.at(c, d);
          if (max_abs(be) == 0.0) continue;
          const double sign = (pab && B.rows.parity(c)) ? -1.0 : 1.0;
          AlgebraElement& dst = r.at(a * br + c, b * bc + d);
          AlgebraElement prod;
          mul_acc(prod, ae, be);
          dst += sign * prod;
        }
    }
  return r;
}

SuperMatrix graded_permutation() {
  const auto q = GradedSpace::qubit();
  SuperMatrix p(q.tensor(q), q.tensor(q));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 2; ++c) {
      const double sign = (a == 1 && c == 1) ? -1.0 : 1.0;
      p.at(a * 2 + c, c * 2 + a) = AlgebraElement::scalar(sign);
    }
  return p;
}

namespace {

// Adjacent graded permutation of qubit factors (pos, pos+1) in an n-fold
// product, as a full-space matrix.
SuperMatrix adjacent_swap(int pos, int n) {
  SuperMatrix s = graded_permutation();
  if (pos > 0) {
    SuperMatrix left = SuperMatrix::identity(GradedSpace::qubits(pos));
    s = graded_tensor(left, s);
  }
  if (pos + 2 < n) {
    SuperMatrix right = SuperMatrix::identity(GradedSpace::qubits(n - pos - 2));
    s = graded_tensor(s, right);
  }
  return s;
}

}  // namespace

SuperMatrix graded_embed(const SuperMatrix& op, const std::vector<int>& sites,
                         int n_sites) {
  const int k = static_cast<int>(sites.size());
  if (op.nrows() != (std::size_t{1} << k) || op.ncols() != op.nrows())
    throw std::invalid_argument("graded_embed: operator dim != 2^#sites");
  std::vector<bool> seen(n_sites, false);
  for (int s : sites) {
    if (s < 0 || s >= n_sites)
      throw std::out_of_range("graded_embed: site index out of range");
    if (seen[s]) throw std::invalid_argument("graded_embed: repeated site");
    seen[s] = true;
  }

  // Operator on the permuted arrangement [sites..., remaining ascending].
  SuperMatrix full = op;
  if (k < n_sites)
    full = graded_tensor(op, SuperMatrix::identity(GradedSpace::qubits(n_sites - k)));

  std::vector<int> order(sites);
  for (int s = 0; s < n_sites; ++s)
    if (!seen[s]) order.push_back(s);

  // Bubble-sort the arrangement into natural order; every adjacent swap of
  // factor positions conjugates by the embedded graded permutation.
  for (int i = 0; i < n_sites; ++i)
    for (int p = 0; p + 1 < n_sites; ++p)
      if (order[p] > order[p + 1]) {
        std::swap(order[p], order[p + 1]);
        const SuperMatrix s = adjacent_swap(p, n_sites);
        full = s * full * s;
      }
  return full;
}

namespace {

SuperMatrix embed_two_even_ordered(const SuperMatrix& op, int i, int j, int n) {
  const auto full = GradedSpace::qubits(n);
  const std::size_t dim = full.dim();
  SuperMatrix r(full, full);
  const int shift_i = n - 1 - i, shift_j = n - 1 - j;
  const std::size_t rest_mask =
      (dim - 1) & ~((std::size_t{1} << shift_i) | (std::size_t{1} << shift_j));
  std::size_t mid_mask = 0;
  for (int k = i + 1; k < j; ++k) mid_mask |= std::size_t{1} << (n - 1 - k);
  std::size_t trail_mask = 0;
  for (int k = j + 1; k < n; ++k) trail_mask |= std::size_t{1} << (n - 1 - k);

  for (std::size_t row = 0; row < dim; ++row) {
    const std::size_t ai = (row >> shift_i) & 1, aj = (row >> shift_j) & 1;
    const std::size_t rest = row & rest_mask;
    const int mid_par = std::popcount(row & mid_mask) & 1;
    const int trail_par = std::popcount(row & trail_mask) & 1;
    for (std::size_t bi = 0; bi < 2; ++bi)
      for (std::size_t bj = 0; bj < 2; ++bj) {
        const AlgebraElement& e = op.at(ai * 2 + aj, bi * 2 + bj);
        if (max_abs(e) == 0.0) continue;
        const std::size_t col = rest | (bi << shift_i) | (bj << shift_j);
        // Strings extend towards later factors: the first slot's odd
        // components string through the bystanders in between, and the total
        // odd parity of the entry strings past the second slot.
        const int ri = (ai + bi) & 1, rj = (aj + bj) & 1;
        int sgn = (mid_par & ri) ^ (trail_par & ((ri + rj) & 1));
        r.at(row, col) = (sgn ? -1.0 : 1.0) * e;
      }
  }
  return r;
}

}  // namespace

SuperMatrix graded_embed_two_even(const SuperMatrix& op, int first, int second,
                                  int n_sites) {
  if (op.nrows() != 4 || op.ncols() != 4)
    throw std::invalid_argument("graded_embed_two_even: expects a 4x4 operator");
  if (first == second || first < 0 || second < 0 || first >= n_sites ||
      second >= n_sites)
    throw std::out_of_range("graded_embed_two_even: bad slots");
  if (first < second) return embed_two_even_ordered(op, first, second, n_sites);
  const SuperMatrix p = graded_permutation();
  return embed_two_even_ordered(p * op * p, second, first, n_sites);
}

AlgebraElement supertrace(const SuperMatrix& m) {
  if (!(m.rows == m.cols))
    throw std::invalid_argument("supertrace: non-square space");
  AlgebraElement r;
  for (std::size_t i = 0; i < m.nrows(); ++i) {
    if (m.rows.parity(i))
      r -= m.at(i, i);
    else
      r += m.at(i, i);
  }
  return r;
}

AlgebraElement trace(const SuperMatrix& m) {
  if (!(m.rows == m.cols))
    throw std::invalid_argument("trace: non-square space");
  AlgebraElement r;
  for (std::size_t i = 0; i < m.nrows(); ++i) r += m.at(i, i);
  return r;
}

namespace {

struct FactorIndex {
  std::vector<std::size_t> dims, strides;

  explicit FactorIndex(const std::vector<GradedSpace>& factors) {
    dims.resize(factors.size());
    strides.resize(factors.size());
    for (std::size_t f = 0; f < factors.size(); ++f) dims[f] = factors[f].dim();
    std::size_t s = 1;
    for (std::size_t f = factors.size(); f-- > 0;) {
      strides[f] = s;
      s *= dims[f];
    }
  }

  std::size_t total() const {
    std::size_t t = 1;
    for (auto d : dims) t *= d;
    return t;
  }

  std::size_t sub(std::size_t flat, std::size_t f) const {
    return (flat / strides[f]) % dims[f];
  }

  std::size_t replace(std::size_t flat, std::size_t f, std::size_t v) const {
    return flat + (v - sub(flat, f)) * strides[f];
  }
};

}  // namespace

SuperMatrix partial_supertrace(const SuperMatrix& m,
                               const std::vector<GradedSpace>& factors,
                               std::size_t which) {
  if (!(m.rows == m.cols))
    throw std::invalid_argument("partial_supertrace: non-square space");
  FactorIndex fi(factors);
  if (fi.total() != m.nrows())
    throw std::invalid_argument("partial_supertrace: factor dims mismatch");
  const auto& tf = factors[which];

  // Remaining space in the original factor order.
  GradedSpace out = GradedSpace::trivial();
  {
    std::vector<GradedSpace> rest;
    for (std::size_t f = 0; f < factors.size(); ++f)
      if (f != which) rest.push_back(factors[f]);
    if (rest.empty())
      out = GradedSpace({0});
    else {
      out = rest[0];
      for (std::size_t f = 1; f < rest.size(); ++f) out = out.tensor(rest[f]);
    }
  }

  SuperMatrix r(out, out);
  // Enumerate full indices whose `which` component is zero, then sum over it.
  std::vector<std::size_t> rows_base;
  for (std::size_t i = 0; i < m.nrows(); ++i)
    if (fi.sub(i, which) == 0) rows_base.push_back(i);
  if (rows_base.size() != r.nrows())
    throw std::logic_error("partial_supertrace: index bookkeeping");

  // Sign (-1)^{p(c)[1 + p(a) + p(b)]}: the weight that makes the partial
  // supertrace of a graded tensor product factorize, str_W(A (x)s B) = A str B.
  for (std::size_t oi = 0; oi < rows_base.size(); ++oi)
    for (std::size_t oj = 0; oj < rows_base.size(); ++oj) {
      const int pab = (r.rows.parity(oi) + r.cols.parity(oj)) & 1;
      AlgebraElement acc;
      for (std::size_t c = 0; c < tf.dim(); ++c) {
        const std::size_t i = fi.replace(rows_base[oi], which, c);
        const std::size_t j = fi.replace(rows_base[oj], which, c);
        if (tf.parity(c) && !pab)
          acc -= m.at(i, j);
        else
          acc += m.at(i, j);
      }
      r.at(oi, oj) = acc;
    }
  return r;
}

namespace {

SuperMatrix super_transpose_impl(const SuperMatrix& m,
                                 const std::vector<GradedSpace>& factors,
                                 std::size_t which, bool inverse) {
  if (!(m.rows == m.cols))
    throw std::invalid_argument("super_transpose: non-square space");
  FactorIndex fi(factors);
  if (fi.total() != m.nrows())
    throw std::invalid_argument("super_transpose: factor dims mismatch");
  const auto& tf = factors[which];
  SuperMatrix r(m.rows, m.cols);
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j) {
      const std::size_t x = fi.sub(i, which);  // new row index in factor
      const std::size_t y = fi.sub(j, which);  // new col index in factor
      const std::size_t oi = fi.replace(i, which, y);
      const std::size_t oj = fi.replace(j, which, x);
      const int px = tf.parity(x), py = tf.parity(y);
      // (-1)^{p(x)[p(x)+p(y)]}, or on the column index for the inverse.
      const bool neg = inverse ? (py && !px) : (px && !py);
      r.at(i, j) = (neg ? -1.0 : 1.0) * m.at(oi, oj);
    }
  return r;
}

}  // namespace

SuperMatrix super_transpose(const SuperMatrix& m,
                            const std::vector<GradedSpace>& factors,
                            std::size_t which) {
  return super_transpose_impl(m, factors, which, false);
}

SuperMatrix super_transpose_inv(const SuperMatrix& m,
                                const std::vector<GradedSpace>& factors,
                                std::size_t which) {
  return super_transpose_impl(m, factors, which, true);
}

// --- body eigensolver --------------------------------------------------------

std::vector<BodyEigenpair> body_eig(const Eigen::MatrixXcd& m,
                                    const BodyEigOptions& opts) {
  const auto n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("body_eig: non-square");
  if (!m.allFinite()) throw std::invalid_argument("body_eig: non-finite entries");
  if (n == 0) return {};

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esT(m.transpose(), true);
  if (es.info() != Eigen::Success || esT.info() != Eigen::Success) {
    std::ostringstream os;
    os << "body_eig: eigensolver failed to converge (dim " << n
       << ", norm " << m.norm() << ")";
    throw std::runtime_error(os.str());
  }

  const auto& lam = es.eigenvalues();
  const auto& lamT = esT.eigenvalues();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(lam(i)));
  if (scale == 0.0) scale = 1.0;

  // Match left eigenvectors (right eigenvectors of m^T) to the eigenvalues.
  std::vector<bool> used(n, false);
  std::vector<int> match(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::max();
    int bj = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(lam(i) - lamT(j));
      if (d < best) {
        best = d;
        bj = static_cast<int>(j);
      }
    }
    match[i] = bj;
    used[bj] = true;
  }

  std::vector<BodyEigenpair> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i].lambda = lam(i);
    out[i].right = es.eigenvectors().col(i);
    out[i].right.normalize();
    out[i].left = esT.eigenvectors().col(match[i]).transpose();
  }

  // Cluster by eigenvalue proximity (union-find).
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(lam(i) - lam(j)) <= opts.cluster_tol * scale)
        parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
  std::vector<int> cluster_id(n, -1);
  int n_clusters = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int root = find(static_cast<int>(i));
    if (cluster_id[root] < 0) cluster_id[root] = n_clusters++;
    out[i].cluster = cluster_id[root];
  }

  // Biorthogonalize cluster by cluster: solve (L_C R_C) L_C' = L_C.
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (out[i].cluster == c) idx.push_back(static_cast<int>(i));
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXcd L(k, n), R(n, k);
    for (int a = 0; a < k; ++a) {
      L.row(a) = out[idx[a]].left;
      R.col(a) = out[idx[a]].right;
    }
    Eigen::MatrixXcd B = L * R;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeThinU |
                                                  Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(k - 1);
    if (!(smin > 1e-10 * std::max(smax, 1.0))) {
      std::ostringstream os;
      os << "body_eig: defective (non-biorthogonalizable) eigenvalue cluster "
         << "of size " << k << " at lambda ~ " << lam(idx[0])
         << "; overlap condition " << smax / std::max(smin, 1e-300);
      throw std::runtime_error(os.str());
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(B);
    const Eigen::MatrixXcd Lp = lu.solve(L);
    for (int a = 0; a < k; ++a) out[idx[a]].left = Lp.row(a);
  }
  return out;
}

// --- graded eigensolver ------------------------------------------------------

namespace {

// Component of a SuperVector as an Eigen vector.
Eigen::VectorXcd vec_comp(const SuperVector& v, Mono m) {
  Eigen::VectorXcd r(v.size());
  const int k = static_cast<int>(m);
  for (std::size_t i = 0; i < v.size(); ++i) r(i) = v[i].c[k];
  return r;
}

SuperVector to_super(const Eigen::VectorXcd& v) {
  SuperVector r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    r[i] = AlgebraElement::scalar(v(i));
  return r;
}

void add_comp(SuperVector& v, Mono m, const Eigen::VectorXcd& x) {
  const int k = static_cast<int>(m);
  for (std::size_t i = 0; i < v.size(); ++i) v[i].c[k] += x(i);
}

struct ClusterBasis {
  std::vector<int> members;     // indices into body pair list
  Eigen::MatrixXcd X;           // n x k right vectors
  Eigen::MatrixXcd Y;           // k x n left rows, Y X = I
};

}  // namespace

std::vector<GradedEigenpair> graded_eig(const SuperMatrix& m,
                                        const GradedEigOptions& opts) {
  if (!(m.rows == m.cols)) throw std::invalid_argument("graded_eig: non-square");
  const Eigen::MatrixXcd M0 = m.body();
  const auto n = M0.rows();
  auto bodies = body_eig(M0, {opts.cluster_tol});

  // Soul component matrices.
  std::array<Eigen::MatrixXcd, kAlgebraDim> compm;
  for (Mono mo : kSoulMonos) compm[static_cast<int>(mo)] = m.comp(mo);

  const double mscale = std::max(m.norm_max(), 1e-300);

  // Group into clusters.
  int n_clusters = 0;
  for (const auto& b : bodies) n_clusters = std::max(n_clusters, b.cluster + 1);
  std::vector<ClusterBasis> clusters(n_clusters);
  for (int i = 0; i < static_cast<int>(bodies.size()); ++i)
    clusters[bodies[i].cluster].members.push_back(i);
  for (auto& c : clusters) {
    const int k = static_cast<int>(c.members.size());
    c.X.resize(n, k);
    c.Y.resize(k, n);
    for (int a = 0; a < k; ++a) {
      c.X.col(a) = bodies[c.members[a]].right;
      c.Y.row(a) = bodies[c.members[a]].left;
    }
  }

  std::vector<GradedEigenpair> out(bodies.size());

  for (auto& cl : clusters) {
    const int k = static_cast<int>(cl.members.size());
    bool cluster_flagged = false;
    std::string cluster_reason;

    if (k > 1) {
      // Rediagonalize the cluster through its soul effective matrix.
      Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(k, k);
      std::array<Eigen::MatrixXcd, kAlgebraDim> eff;
      for (Mono mo : kSoulMonos) {
        const int mi = static_cast<int>(mo);
        eff[mi] = cl.Y * compm[mi] * cl.X;
        S += eff[mi];
      }
      if (S.norm() > 1e-14 * mscale) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(S, true);
        bool ok = es.info() == Eigen::Success;
        Eigen::MatrixXcd R, Rinv;
        if (ok) {
          R = es.eigenvectors();
          Eigen::FullPivLU<Eigen::MatrixXcd> lu(R);
          ok = lu.isInvertible();
          if (ok) Rinv = lu.inverse();
        }
        if (ok) {
          // All soul components must be simultaneously diagonalized.
          for (Mono mo : kSoulMonos) {
            const int mi = static_cast<int>(mo);
            Eigen::MatrixXcd D = Rinv * eff[mi] * R;
            Eigen::MatrixXcd off = D;
            off.diagonal().setZero();
            if (off.norm() > 1e-7 * std::max(D.norm(), mscale)) ok = false;
          }
        }
        if (ok) {
          cl.X = cl.X * R;
          cl.Y = Rinv * cl.Y;
        } else {
          cluster_flagged = true;
          cluster_reason = "unresolved degeneracy: soul effective matrices not "
                           "simultaneously diagonalizable";
        }
      }
    }

    for (int a = 0; a < k; ++a) {
      const int pi = cl.members[a];
      GradedEigenpair& gp = out[pi];
      gp.lambda_body = bodies[pi].lambda;
      gp.degeneracy_block = (k > 1) ? bodies[pi].cluster : -1;
      gp.flagged = cluster_flagged;
      gp.flag_reason = cluster_reason;

      const Eigen::VectorXcd x0 = cl.X.col(a);
      const Eigen::RowVectorXcd y0 = cl.Y.row(a);

      SuperVector xv = to_super(x0);
      SuperVector yv(n);
      for (Eigen::Index i = 0; i < n; ++i)
        yv[i] = AlgebraElement::scalar(y0(i));
      AlgebraElement lam = AlgebraElement::scalar(gp.lambda_body);

      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(
          M0 - gp.lambda_body * Eigen::MatrixXcd::Identity(n, n));

      auto project_off_cluster = [&](Eigen::VectorXcd rhs) {
        for (int b = 0; b < k; ++b) {
          const Eigen::RowVectorXcd yb = cl.Y.row(b);
          const cplx alpha = (yb * rhs)(0);
          const cplx nn = (yb * yb.adjoint())(0);
          rhs -= (alpha / nn) * yb.adjoint();
        }
        return rhs;
      };
      auto gauge_off_cluster = [&](Eigen::VectorXcd v) {
        for (int b = 0; b < k; ++b) {
          const cplx alpha = (cl.Y.row(b) * v)(0);
          v -= alpha * cl.X.col(b);
        }
        return v;
      };

      // One Grassmann degree at a time; the residual of the current partial
      // pair supplies the right-hand sides, so cross-term signs come out of
      // the algebra itself.
      for (const auto& monos :
           {std::vector<Mono>(kOddMonos.begin(), kOddMonos.end()),
            std::vector<Mono>(kEvenSoulMonos.begin(), kEvenSoulMonos.end())}) {
        SuperVector res = m * xv;
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= lam * xv[i];
        for (Mono mo : monos) {
          const Eigen::VectorXcd r = vec_comp(res, mo);
          const cplx lam_m = (y0 * r)(0);
          Eigen::VectorXcd rhs = lam_m * x0 - r;
          const Eigen::VectorXcd rhs_p = project_off_cluster(rhs);
          if ((rhs - rhs_p).norm() >
              opts.consistency_tol * std::max(rhs.norm(), mscale) + 1e-13 * mscale) {
            gp.flagged = true;
            gp.flag_reason = "shifted system inconsistent at monomial " +
                             std::string(mono_name(mo));
          }
          Eigen::VectorXcd v = gauge_off_cluster(cod.solve(rhs_p));
          lam.c[static_cast<int>(mo)] += lam_m;
          add_comp(xv, mo, v);
        }
      }

      // Left vector corrections: same expansion on row vectors.
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> codT(
          (M0 - gp.lambda_body * Eigen::MatrixXcd::Identity(n, n)).transpose());
      for (const auto& monos :
           {std::vector<Mono>(kOddMonos.begin(), kOddMonos.end()),
            std::vector<Mono>(kEvenSoulMonos.begin(), kEvenSoulMonos.end())}) {
        // res_row = yv * M - lam * yv
        SuperVector res(n);
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
          AlgebraElement acc;
          for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
            mul_acc(acc, yv[i], m.at(i, j));
          acc -= lam * yv[j];
          res[j] = acc;
        }
        for (Mono mo : monos) {
          const Eigen::VectorXcd r = vec_comp(res, mo);
          // lam already carries every soul component, so the residual of the
          // partial row vector is the full right-hand side.
          Eigen::VectorXcd rhs = -r;
          // Project off right null directions (columns of X).
          for (int b = 0; b < k; ++b) {
            const Eigen::VectorXcd xb = cl.X.col(b);
            const cplx alpha = (xb.transpose() * rhs)(0);
            const cplx nn = (xb.transpose() * xb.conjugate())(0);
            rhs -= (alpha / nn) * xb.conjugate();
          }
          Eigen::VectorXcd w = codT.solve(rhs);
          for (int b = 0; b < k; ++b) {
            const cplx alpha = (w.transpose() * cl.X.col(b))(0);
            w -= alpha * cl.Y.row(b).transpose();
          }
          add_comp(yv, mo, w);
        }
      }

      gp.lambda_soul = soul(lam);
      gp.right_vec = std::move(xv);
      gp.left_vec = std::move(yv);
    }
  }
  return out;
}

}  // namespace polaron
