#include "polaron/model.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace polaron {

namespace {

using std::sin;
using std::cos;

constexpr cplx kI{0.0, 1.0};

void check_finite_angle(cplx v, const char* what) {
  if (std::abs(sin(v)) < 1e-12) {
    throw std::invalid_argument(std::string("ModelParams: sin(") + what +
                                ") vanishes");
  }
}

}  // namespace

void ModelParams::validate() const {
  if (n_sites < 1) throw std::invalid_argument("ModelParams: n_sites < 1");
  check_finite_angle(2.0 * eta, "2 eta");
  check_finite_angle(psi_minus, "psi-");
  check_finite_angle(psi_plus, "psi+");
  if (std::abs(cos(2.0 * eta)) < 1e-12)
    throw std::invalid_argument("ModelParams: cos(2 eta) vanishes");
}

bool ModelParams::diagonal(double tol) const {
  for (const auto& a : amps)
    if (std::abs(a) > tol) return false;
  return true;
}

cplx DerivedScalars::g(cplx u) const { return sin(u - 2.0 * eta) / sin(2.0 * eta); }
cplx DerivedScalars::zeta(cplx u) const { return g(u) * g(-u); }

DerivedScalars derive(const ModelParams& p) {
  DerivedScalars d;
  d.eta = p.eta;
  d.psi_minus = p.psi_minus;
  d.psi_plus = p.psi_plus;
  d.omega_minus = 1.0 / sin(p.psi_minus);
  d.omega_plus = 1.0 / (2.0 * cos(2.0 * p.eta) * sin(p.psi_plus));
  d.hop_t = -1.0 / sin(2.0 * p.eta);
  d.int_V = cos(2.0 * p.eta) / sin(2.0 * p.eta);
  d.n_plus = 0.5 / sin(2.0 * p.eta) / sin(p.psi_plus) * sin(2.0 * p.eta + p.psi_plus);
  d.n_minus = 0.5 / sin(2.0 * p.eta) / sin(p.psi_plus) * sin(2.0 * p.eta - p.psi_plus);
  d.n_zero = 0.5 * cos(p.psi_minus) / sin(p.psi_minus);
  return d;
}

SuperMatrix r_matrix(cplx u, cplx eta) {
  const cplx s2 = sin(2.0 * eta);
  if (std::abs(s2) < 1e-12)
    throw std::invalid_argument("r_matrix: sin(2 eta) vanishes");
  const auto q = GradedSpace::qubit();
  SuperMatrix r(q.tensor(q), q.tensor(q));
  const cplx a = sin(u + 2.0 * eta) / s2;
  const cplx b = sin(u) / s2;
  r.at(0, 0) = AlgebraElement::scalar(a);
  r.at(1, 1) = AlgebraElement::scalar(b);
  r.at(1, 2) = AlgebraElement::scalar(1.0);
  r.at(2, 1) = AlgebraElement::scalar(1.0);
  r.at(2, 2) = AlgebraElement::scalar(b);
  r.at(3, 3) = AlgebraElement::scalar(-a);
  return r;
}

namespace {

SuperMatrix embed_two(const SuperMatrix& op, int first, int second, int n) {
  return graded_embed_two_even(op, first, second, n);
}

SuperMatrix embed_aux_last(const SuperMatrix& op_aux, int n_sites) {
  return graded_tensor(SuperMatrix::identity(GradedSpace::qubits(n_sites)),
                       op_aux);
}

}  // namespace

double ybe_residual(cplx u, cplx mu, cplx eta) {
  const SuperMatrix r12 = graded_embed(r_matrix(u, eta), {0, 1}, 3);
  const SuperMatrix r13 = graded_embed(r_matrix(u + mu, eta), {0, 2}, 3);
  const SuperMatrix r23 = graded_embed(r_matrix(mu, eta), {1, 2}, 3);
  const SuperMatrix lhs = r12 * r13 * r23;
  const SuperMatrix rhs = r23 * r13 * r12;
  return (lhs - rhs).norm_max();
}

double unitarity_residual(cplx u, cplx eta) {
  const SuperMatrix p = graded_permutation();
  const SuperMatrix r12 = r_matrix(u, eta);
  const SuperMatrix r21 = p * r_matrix(-u, eta) * p;
  const cplx z = derive(ModelParams{1, eta}).zeta(u);
  SuperMatrix d = r12 * r21;
  d -= z * SuperMatrix::identity(d.rows);
  return d.norm_max();
}

double crossing_residual(cplx u, cplx eta) {
  const SuperMatrix p = graded_permutation();
  const std::vector<GradedSpace> ff = {GradedSpace::qubit(), GradedSpace::qubit()};
  const SuperMatrix r21_a = p * r_matrix(-u - 4.0 * eta, eta) * p;
  const SuperMatrix r21_b = p * r_matrix(u, eta) * p;
  const SuperMatrix lhs =
      super_transpose(r21_a, ff, 1) * super_transpose_inv(r21_b, ff, 0);
  const cplx z = derive(ModelParams{1, eta}).zeta(u + 2.0 * eta);
  SuperMatrix d = lhs;
  d -= z * SuperMatrix::identity(d.rows);
  return d.norm_max();
}

double periodicity_residual(cplx u, cplx eta) {
  const double pi = std::acos(-1.0);
  const SuperMatrix lhs = r_matrix(u + pi, eta);
  SuperMatrix rhs = r_matrix(u, eta);
  // sigma^z on the first factor flips the sign of entries with odd first index.
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const int sz = ((r >> 1) & 1) + ((c >> 1) & 1);
      rhs.at(r, c) = ((sz & 1) ? 1.0 : -1.0) * rhs.at(r, c);
    }
  return (lhs - rhs).norm_max();
}

SuperMatrix k_minus(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const auto q = GradedSpace::qubit();
  SuperMatrix k(q, q);
  k.at(0, 0) = AlgebraElement::scalar(d.omega_minus * sin(u + p.psi_minus));
  k.at(1, 1) = AlgebraElement::scalar(-d.omega_minus * sin(u - p.psi_minus));
  k.at(0, 1) = (d.omega_minus * sin(2.0 * u)) * p.alpha_minus();
  k.at(1, 0) = (d.omega_minus * sin(2.0 * u)) * p.beta_minus();
  return k;
}

SuperMatrix k_plus(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const auto q = GradedSpace::qubit();
  const cplx v = u + 2.0 * p.eta;
  SuperMatrix k(q, q);
  k.at(0, 0) = AlgebraElement::scalar(d.omega_plus * sin(v + p.psi_plus));
  k.at(1, 1) = AlgebraElement::scalar(d.omega_plus * sin(v - p.psi_plus));
  k.at(0, 1) = (d.omega_plus * sin(2.0 * u + 4.0 * p.eta)) * p.alpha_plus();
  k.at(1, 0) = (d.omega_plus * sin(2.0 * u + 4.0 * p.eta)) * p.beta_plus();
  return k;
}

AlgebraElement det2(const SuperMatrix& k) {
  if (k.nrows() != 2 || k.ncols() != 2)
    throw std::invalid_argument("det2: expects a 2x2 matrix");
  return k.at(0, 0) * k.at(1, 1) - k.at(0, 1) * k.at(1, 0);
}

SuperMatrix monodromy(cplx u, const ModelParams& p) {
  const int n = p.n_sites;
  const SuperMatrix r = r_matrix(u, p.eta);
  SuperMatrix t = embed_two(r, n - 1, n, n + 1);  // R_{N0}
  for (int j = n - 1; j >= 1; --j) t = t * embed_two(r, j - 1, n, n + 1);
  return t;
}

SuperMatrix hat_monodromy(cplx u, const ModelParams& p) {
  const int n = p.n_sites;
  const SuperMatrix r = r_matrix(u, p.eta);
  SuperMatrix t = embed_two(r, n, 0, n + 1);  // R_{01}
  for (int j = 2; j <= n; ++j) t = t * embed_two(r, n, j - 1, n + 1);
  return t;
}

SuperMatrix transfer(cplx u, const ModelParams& p) {
  const int n = p.n_sites;
  const SuperMatrix kp = embed_aux_last(k_plus(u, p), n);
  const SuperMatrix km = embed_aux_last(k_minus(u, p), n);
  const SuperMatrix prod = kp * monodromy(u, p) * km * hat_monodromy(u, p);
  return partial_supertrace(prod, {GradedSpace::qubits(n), GradedSpace::qubit()},
                            1);
}

// --- Fock-space fermion operators -------------------------------------------

namespace {

int occ(std::size_t state, int site, int n) {
  return static_cast<int>((state >> (n - site)) & 1);
}

}  // namespace

Eigen::MatrixXcd fermion_annihilator(int site, int n_sites, JwString s) {
  const std::size_t dim = std::size_t{1} << n_sites;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t src = 0; src < dim; ++src) {
    if (!occ(src, site, n_sites)) continue;
    int par = 0;
    if (s == JwString::left) {
      for (int l = 1; l < site; ++l) par += occ(src, l, n_sites);
    } else {
      for (int l = site + 1; l <= n_sites; ++l) par += occ(src, l, n_sites);
    }
    const std::size_t dst = src & ~(std::size_t{1} << (n_sites - site));
    m(dst, src) = (par & 1) ? -1.0 : 1.0;
  }
  return m;
}

Eigen::MatrixXcd fermion_creator(int site, int n_sites, JwString s) {
  return fermion_annihilator(site, n_sites, s).transpose();
}

Eigen::MatrixXcd number_op(int site, int n_sites) {
  const std::size_t dim = std::size_t{1} << n_sites;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = occ(i, site, n_sites);
  return m;
}

Eigen::MatrixXcd parity_op(int n_sites) {
  const std::size_t dim = std::size_t{1} << n_sites;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    m(i, i) = (std::popcount(i) & 1) ? -1.0 : 1.0;
  return m;
}

Eigen::MatrixXcd hamiltonian_diagonal_part(const ModelParams& p) {
  const int n = p.n_sites;
  const auto d = derive(p);
  const std::size_t dim = std::size_t{1} << n;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 1; j < n; ++j) {
    const auto cdag_j = fermion_creator(j, n);
    const auto cdag_j1 = fermion_creator(j + 1, n);
    const auto c_j = fermion_annihilator(j, n);
    const auto c_j1 = fermion_annihilator(j + 1, n);
    const auto nj = number_op(j, n), nj1 = number_op(j + 1, n);
    h += -d.hop_t * (cdag_j1 * c_j + cdag_j * c_j1) +
         d.int_V * (nj1 * nj + (id - nj1) * (id - nj));
  }
  h += d.n_plus * (id - number_op(n, n)) - d.n_minus * number_op(n, n) +
       d.n_zero * (id - 2.0 * number_op(1, n));
  return h;
}

SuperMatrix hamiltonian(const ModelParams& p) {
  const int n = p.n_sites;
  const auto d = derive(p);
  const auto phys = GradedSpace::qubits(n);
  SuperMatrix h = SuperMatrix::from_body(hamiltonian_diagonal_part(p), phys, phys);

  // Boundary source/sink terms.  Right-string odd operators with all four
  // amplitudes positive: this is the combination t'(0) = 2H + const produces
  // once the matrix entries are algebra elements that commute with the
  // operator matrix elements.  (Bookkeepings that anticommute the Grassmann
  // amplitudes through the odd operators render the same terms as
  // csc(psi-)(alpha- c_1 - beta- c1^dag) with left strings.)
  const JwString str = JwString::right;
  const cplx csc_m = 1.0 / sin(p.psi_minus);
  const cplx csc_p = 1.0 / sin(p.psi_plus);
  const auto term = [&](const AlgebraElement& amp, const Eigen::MatrixXcd& op) {
    return amp * SuperMatrix::from_body(op, phys, phys);
  };
  h += term(csc_m * p.alpha_minus(), fermion_annihilator(1, n, str));
  h += term(csc_m * p.beta_minus(), fermion_creator(1, n, str));
  h += term(csc_p * p.alpha_plus(), fermion_annihilator(n, n, str));
  h += term(csc_p * p.beta_plus(), fermion_creator(n, n, str));
  return h;
}

TransferDerivative hamiltonian_from_transfer(const ModelParams& p, double step) {
  const auto stencil = [&](double hh) {
    SuperMatrix d = transfer(cplx(-2.0 * hh, 0.0), p);
    d -= 8.0 * transfer(cplx(-hh, 0.0), p);
    d += 8.0 * transfer(cplx(hh, 0.0), p);
    d -= transfer(cplx(2.0 * hh, 0.0), p);
    d *= 1.0 / (12.0 * hh);
    return d;
  };
  const SuperMatrix d1 = stencil(step);
  const SuperMatrix d2 = stencil(step / 2.0);
  SuperMatrix dref = 16.0 / 15.0 * d2;
  dref -= 1.0 / 15.0 * d1;

  const double mismatch = (d2 - d1).norm_max() / std::max(dref.norm_max(), 1e-300);
  if (mismatch > 1e-6) {
    throw std::runtime_error(
        "hamiltonian_from_transfer: derivative stencils disagree, relative "
        "mismatch " +
        std::to_string(mismatch));
  }

  const std::size_t dim = dref.nrows();
  const AlgebraElement tr_t = trace(dref);
  const AlgebraElement tr_h = trace(hamiltonian(p));
  const AlgebraElement constant =
      (1.0 / static_cast<double>(dim)) * (tr_t - 2.0 * tr_h);

  SuperMatrix h = dref;
  for (std::size_t i = 0; i < dim; ++i) h.at(i, i) -= constant;
  h *= 0.5;
  return {std::move(h), constant, mismatch};
}

double semiclassical_residual(cplx u, const ModelParams& p, double epsilon) {
  ModelParams q = p;
  q.eta = cplx(epsilon, 0.0);
  const int n = p.n_sites;
  const SuperMatrix t = transfer(u, q);

  // (sin 2eta)^{2N} t(u) tends to minus the finite semiclassical form.
  const cplx norm = -std::pow(sin(2.0 * q.eta), 2 * n);
  SuperMatrix lhs = norm * t;

  const cplx su = sin(u), cu = cos(u);
  const cplx pref = std::pow(su, 2 * n) / (sin(p.psi_plus) * sin(p.psi_minus));
  const auto phys = GradedSpace::qubits(n);
  SuperMatrix rhs = (pref * 2.0 * su * su * cu * cu) *
                    (p.G() * SuperMatrix::from_body(parity_op(n), phys, phys));
  const cplx idc = cu * cu * sin(p.psi_minus) * sin(p.psi_plus) +
                   su * su * cos(p.psi_minus) * cos(p.psi_plus);
  rhs -= (pref * idc) * SuperMatrix::identity(phys);

  return (lhs - rhs).norm_max() / std::max(rhs.norm_max(), 1e-300);
}

AsymptoticResult asymptotic_residual(const ModelParams& p, double y1, double y2,
                                     double x) {
  const int n = p.n_sites;
  const auto d = derive(p);
  const auto phys = GradedSpace::qubits(n);

  const AlgebraElement g = p.G();
  const bool g_nonzero = max_abs(g) > 0.0;

  // Leading operator: G prod_j (nbar_j - e^{2i eta} n_j)(n_j + e^{2i eta} nbar_j).
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(dim, dim);
  const cplx e2 = std::exp(2.0 * kI * p.eta);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  for (int j = 1; j <= n; ++j) {
    const auto nj = number_op(j, n);
    op = op * ((id - nj) - e2 * nj) * (nj + e2 * (id - nj));
  }
  const SuperMatrix target = g * SuperMatrix::from_body(op, phys, phys);
  const double target_scale = std::max(target.norm_max(), 1e-300);

  double worst = 0.0;
  for (double y : {y1, y2}) {
    const cplx u = cplx(x, -y);
    const cplx z = std::exp(kI * u);
    const cplx pref = std::pow(z / (2.0 * kI * sin(2.0 * p.eta)), 2 * n) *
                      (d.omega_plus * d.omega_minus / 4.0) * z * z * z * z *
                      std::exp(4.0 * kI * p.eta);
    SuperMatrix t = transfer(u, p);
    t *= 1.0 / pref;
    if (!g_nonzero) {
      // No G-leading term: report the size of what is left after dividing by
      // the would-be prefactor, relative to the identity scale.
      worst = std::max(worst, t.norm_max());
      continue;
    }
    worst = std::max(worst, (t - target).norm_max() / target_scale);
  }
  return {worst, g_nonzero};
}

double transfer_commutation_residual(cplx u, cplx v, const ModelParams& p) {
  const SuperMatrix tu = transfer(u, p);
  const SuperMatrix tv = transfer(v, p);
  const SuperMatrix c = tu * tv - tv * tu;
  return c.norm_max() /
         std::max(tu.norm_max() * tv.norm_max(), 1e-300);
}

}  // namespace polaron
