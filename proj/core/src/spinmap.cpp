#include "polaron/spinmap.hpp"

#include <algorithm>
#include <stdexcept>

namespace polaron {

namespace {

constexpr cplx kI{0.0, 1.0};

Eigen::MatrixXcd local_spin(SpinKind k) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  switch (k) {
    case SpinKind::plus:
      m(0, 1) = 1.0;
      break;
    case SpinKind::minus:
      m(1, 0) = 1.0;
      break;
    case SpinKind::x:
      m(0, 1) = 0.5;
      m(1, 0) = 0.5;
      break;
    case SpinKind::y:
      m(0, 1) = -0.5 * kI;
      m(1, 0) = 0.5 * kI;
      break;
    case SpinKind::z:
      m(0, 0) = 0.5;
      m(1, 1) = -0.5;
      break;
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

}  // namespace

Eigen::MatrixXcd spin_op(SpinKind k, int site, int n_sites) {
  if (site < 1 || site > n_sites) throw std::out_of_range("spin_op: bad site");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int j = 1; j <= n_sites; ++j)
    m = kron(m, j == site ? local_spin(k) : Eigen::MatrixXcd::Identity(2, 2));
  return m;
}

JwImages jw_images(int n_sites) {
  JwImages jw;
  const std::size_t dim = std::size_t{1} << n_sites;
  Eigen::MatrixXcd string = Eigen::MatrixXcd::Identity(dim, dim);
  for (int j = 1; j <= n_sites; ++j) {
    jw.creators.push_back(string * spin_op(SpinKind::minus, j, n_sites));
    jw.annihilators.push_back(string * spin_op(SpinKind::plus, j, n_sites));
    // Extend the phase string: e^{i pi S+_j S-_j} = 1 - 2 S+_j S-_j.
    string = string * (Eigen::MatrixXcd::Identity(dim, dim) -
                       2.0 * spin_op(SpinKind::plus, j, n_sites) *
                           spin_op(SpinKind::minus, j, n_sites));
  }
  return jw;
}

Eigen::MatrixXcd xxz_hamiltonian(const ModelParams& p) {
  const int n = p.n_sites;
  const auto d = derive(p);
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 1; j < n; ++j) {
    h += 2.0 * d.hop_t *
             (spin_op(SpinKind::x, j, n) * spin_op(SpinKind::x, j + 1, n) +
              spin_op(SpinKind::y, j, n) * spin_op(SpinKind::y, j + 1, n)) +
         2.0 * d.int_V * spin_op(SpinKind::z, j, n) *
             spin_op(SpinKind::z, j + 1, n);
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  h += 2.0 * d.n_zero * spin_op(SpinKind::z, 1, n);
  h += (d.n_plus + d.n_minus) * (spin_op(SpinKind::z, n, n) + 0.5 * id);
  // Constants the fermion-to-spin identification produces on top of the
  // bare XXZ form: V/2 per bond and -N- from the right boundary.
  h += (0.5 * d.int_V * static_cast<double>(n - 1) - d.n_minus) * id;
  return h;
}

Eigen::MatrixXcd polaron_diag_in_jw_rep(const ModelParams& p) {
  const int n = p.n_sites;
  const auto d = derive(p);
  const auto jw = jw_images(n);
  const std::size_t dim = std::size_t{1} << n;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const auto num = [&](int j) {
    return Eigen::MatrixXcd(jw.creators[j - 1] * jw.annihilators[j - 1]);
  };
  for (int j = 1; j < n; ++j) {
    h += -d.hop_t * (jw.creators[j] * jw.annihilators[j - 1] +
                     jw.creators[j - 1] * jw.annihilators[j]) +
         d.int_V * (num(j + 1) * num(j) + (id - num(j + 1)) * (id - num(j)));
  }
  h += d.n_plus * (id - num(n)) - d.n_minus * num(n) +
       d.n_zero * (id - 2.0 * num(1));
  return h;
}

double xxz_equivalence_check(const ModelParams& p) {
  if (!p.diagonal())
    throw std::invalid_argument(
        "xxz_equivalence_check: nondiagonal boundary amplitudes have no "
        "local spin-chain image");
  const Eigen::MatrixXcd diff = polaron_diag_in_jw_rep(p) - xxz_hamiltonian(p);
  return diff.cwiseAbs().maxCoeff();
}

double xxz_spectrum_deviation(const ModelParams& p) {
  if (!p.diagonal())
    throw std::invalid_argument("xxz_spectrum_deviation: diagonal limit only");
  const auto ev = [](const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<cplx> v(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    return v;
  };
  const auto a = ev(hamiltonian_diagonal_part(p));
  const auto b = ev(xxz_hamiltonian(p));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace polaron
