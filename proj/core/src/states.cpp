#include "polaron/states.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace polaron {

namespace {

using std::sin;

// Basis index of the occupation with the listed sites filled (site 1 = most
// significant bit, matching the graded tensor layout).
std::size_t occ_index(std::initializer_list<int> sites, int n) {
  std::size_t idx = 0;
  for (int s : sites) idx |= std::size_t{1} << (n - s);
  return idx;
}

}  // namespace

VacuumCoefficients vacuum_coefficients(const ModelParams& p) {
  const int n = p.n_sites;
  const cplx e2 = 2.0 * p.eta;
  const cplx sum_psi = p.psi_minus + p.psi_plus;
  const cplx den1 = sin(static_cast<double>(n - 1) * e2 + sum_psi);
  if (std::abs(den1) < 1e-12)
    throw std::domain_error("vacuum_coefficients: resonance at (N-1)2eta+psi-+psi+");
  VacuumCoefficients vc;
  vc.b_plus.resize(n);
  vc.b_minus.resize(n);
  for (int l = 1; l <= n; ++l) {
    vc.b_plus[l - 1] = -sin(p.psi_minus + static_cast<double>(l - 1) * e2) / den1;
    vc.b_minus[l - 1] = -sin(p.psi_plus + static_cast<double>(n - l) * e2) / den1;
  }
  vc.big_b = Eigen::MatrixXcd::Zero(n, n);
  if (n >= 2) {
    const cplx den2 = sin(static_cast<double>(n - 2) * e2 + sum_psi);
    if (std::abs(den2) < 1e-12)
      throw std::domain_error(
          "vacuum_coefficients: resonance at (N-2)2eta+psi-+psi+");
    const cplx pref = den1 / den2;
    for (int k = 1; k <= n; ++k)
      for (int l = k + 1; l <= n; ++l)
        vc.big_b(k - 1, l - 1) = pref * (vc.b_plus[k] * vc.b_minus[l - 1] +
                                         vc.b_minus[k - 1] * vc.b_plus[l - 2]);
  }
  return vc;
}

cplx vacuum_lambda_nondiag(const ModelParams& p) {
  const auto vc = vacuum_coefficients(p);
  return vc.b_plus[0] / sin(p.psi_minus);
}

cplx vacuum_lambda_diag(const ModelParams& p) {
  const auto d = derive(p);
  return d.int_V * static_cast<double>(p.n_sites - 1) + d.n_plus + d.n_zero;
}

SuperVector vacuum_state(const ModelParams& p) {
  const int n = p.n_sites;
  const auto vc = vacuum_coefficients(p);
  const std::size_t dim = std::size_t{1} << n;
  SuperVector v(dim);
  v[0] = AlgebraElement::scalar(1.0);
  for (int i = 1; i <= n; ++i) {
    AlgebraElement amp = (-vc.b_plus[i - 1]) * p.beta_plus() +
                         (-vc.b_minus[i - 1]) * p.beta_minus();
    v[occ_index({i}, n)] = amp;
  }
  const AlgebraElement bb = p.beta_plus() * p.beta_minus();
  for (int k = 1; k <= n; ++k)
    for (int l = k + 1; l <= n; ++l)
      v[occ_index({k, l}, n)] = vc.big_b(k - 1, l - 1) * bb;
  return v;
}

double vacuum_check(const ModelParams& p) {
  const SuperVector psi = vacuum_state(p);
  const SuperMatrix h = hamiltonian(p);
  const AlgebraElement lam = AlgebraElement::scalar(vacuum_lambda_diag(p)) +
                             vacuum_lambda_nondiag(p) * p.G();
  SuperVector r = h * psi;
  double worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= lam * psi[i];
    worst = std::max(worst, max_abs(r[i]));
  }
  return worst;
}

VacuumCoefficients oracle_recursion(const ModelParams& p, cplx lambda_diag) {
  const int n = p.n_sites;
  if (n < 2) throw std::invalid_argument("oracle_recursion: needs N >= 2");
  const auto d = derive(p);
  const cplx t = d.hop_t;
  const cplx v = d.int_V;
  const cplx half_cot = d.n_zero;
  const cplx csc_m = 1.0 / sin(p.psi_minus);
  const cplx csc_p = 1.0 / sin(p.psi_plus);
  const cplx lam = lambda_diag;

  // One-particle sectors: N x N tridiagonal systems.
  const auto solve_b = [&](bool plus) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (int l = 1; l <= n; ++l) {
      const int r = l - 1;
      cplx diag;
      if (l == 1)
        diag = v * static_cast<double>(n - 2) - half_cot + d.n_plus - lam;
      else if (l == n)
        diag = v * static_cast<double>(n - 2) + half_cot - d.n_minus - lam;
      else
        diag = v * static_cast<double>(n - 3) + half_cot + d.n_plus - lam;
      a(r, r) = diag;
      if (l > 1) a(r, l - 2) = -t;
      if (l < n) a(r, l) = -t;
    }
    // Inhomogeneities from H_nondiag acting on the Fock vacuum.
    if (plus)
      rhs(n - 1) = csc_p;
    else
      rhs(0) = csc_m;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible())
      throw std::domain_error("oracle_recursion: singular one-particle system");
    Eigen::VectorXcd sol = lu.solve(rhs);
    return sol;
  };
  // n=2 corner: site 1 and site N rows coincide with the generic pattern.
  const Eigen::VectorXcd bp = solve_b(true);
  const Eigen::VectorXcd bm = solve_b(false);

  VacuumCoefficients vc;
  vc.b_plus.assign(bp.data(), bp.data() + n);
  vc.b_minus.assign(bm.data(), bm.data() + n);
  vc.big_b = Eigen::MatrixXcd::Zero(n, n);

  // Two-particle sector: one relation per pair (k < l).
  const int np = n * (n - 1) / 2;
  const auto idx = [&](int k, int l) {  // 1-based, k < l
    return (k - 1) * n - (k * (k + 1)) / 2 + l - 1;
  };
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(np, np);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(np);
  const auto xi = [&](int q, int sign_plus) {
    return lam + (sign_plus ? 1.0 : -1.0) * half_cot -
           v * static_cast<double>(n - q);
  };
  const auto add = [&](int row, int k, int l, cplx coef) {
    if (k < 1 || l > n || k >= l) return;  // absent basis state
    a(row, idx(k, l)) += coef;
  };

  for (int k = 1; k <= n; ++k)
    for (int l = k + 1; l <= n; ++l) {
      const int row = idx(k, l);
      if (k == 1 && l == n) {
        a(row, row) += xi(3, 1) + d.n_minus;
        add(row, 1, n - 1, t);
        add(row, 2, n, t);
        rhs(row) = -(vc.b_plus[n - 1] * csc_m + vc.b_minus[0] * csc_p);
      } else if (k == 1 && l == 2) {
        a(row, row) += xi(2, 1) - d.n_plus;
        add(row, 1, 3, t);
        rhs(row) = -vc.b_plus[1] * csc_m;
      } else if (k == n - 1 && l == n) {
        a(row, row) += xi(2, 0) + d.n_minus;
        add(row, n - 2, n, t);
        rhs(row) = -vc.b_minus[n - 2] * csc_p;
      } else if (l == n) {  // 1 < k < N-1
        a(row, row) += xi(4, 0) + d.n_minus;
        add(row, k - 1, n, t);
        add(row, k + 1, n, t);
        add(row, k, n - 1, t);
        rhs(row) = -vc.b_minus[k - 1] * csc_p;
      } else if (k == 1) {  // 2 < l < N
        a(row, row) += xi(4, 1) - d.n_plus;
        add(row, 1, l - 1, t);
        add(row, 1, l + 1, t);
        add(row, 2, l, t);
        rhs(row) = -vc.b_plus[l - 1] * csc_m;
      } else if (l == k + 1) {  // 1 < k < N-1 adjacent interior
        a(row, row) += xi(3, 0) - d.n_plus;
        add(row, k - 1, k + 1, t);
        add(row, k, k + 2, t);
      } else {  // interior, non-adjacent
        a(row, row) += xi(5, 0) - d.n_plus;
        add(row, k - 1, l, t);
        add(row, k + 1, l, t);
        add(row, k, l - 1, t);
        add(row, k, l + 1, t);
      }
    }

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible())
    throw std::domain_error("oracle_recursion: singular two-particle system");
  const Eigen::VectorXcd sol = lu.solve(rhs);
  for (int k = 1; k <= n; ++k)
    for (int l = k + 1; l <= n; ++l) vc.big_b(k - 1, l - 1) = sol(idx(k, l));
  return vc;
}

std::string vacuum_state_json(const ModelParams& p) {
  const int n = p.n_sites;
  const SuperVector v = vacuum_state(p);
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (max_abs(v[i]) == 0.0) continue;
    std::string key(n, '0');
    for (int s = 1; s <= n; ++s)
      if ((i >> (n - s)) & 1) key[s - 1] = '1';
    j[key] = nlohmann::json::parse(to_json_string(v[i]));
  }
  return j.dump();
}

AnsatzProjection project_generic_ansatz(const SuperVector& vec, int m_sector,
                                        int n_sites) {
  AnsatzProjection out;
  out.m_sector = m_sector;
  out.leakage = 0.0;

  const auto allowed_sector = [&](Mono mo) -> int {
    switch (mo) {
      case Mono::one:
      case Mono::ap_bm:
      case Mono::bp_am:
        return m_sector;
      case Mono::bp:
      case Mono::bm:
        return m_sector + 1;
      case Mono::bp_bm:
        return m_sector + 2;
      case Mono::ap:
      case Mono::am:
        return m_sector - 1;
      case Mono::ap_am:
        return m_sector - 2;
    }
    return -1000;
  };

  double scale = 0.0;
  for (const auto& e : vec) scale = std::max(scale, max_abs(e));
  if (scale == 0.0) scale = 1.0;

  for (int mi = 0; mi < kAlgebraDim; ++mi) {
    const Mono mo = static_cast<Mono>(mi);
    const int want = allowed_sector(mo);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      const int pc = std::popcount(i);
      const double mag = std::abs(vec[i].c[mi]);
      if (pc == want)
        norm2 += mag * mag;
      else
        out.leakage = std::max(out.leakage, mag / scale);
    }
    if (want >= 0 && want <= n_sites) {
      std::string key = std::string(mono_name(mo)) + "@M";
      const int off = want - m_sector;
      if (off > 0) key += "+" + std::to_string(off);
      if (off < 0) key += std::to_string(off);
      out.block_norms[key] = std::sqrt(norm2);
    }
  }
  return out;
}

}  // namespace polaron
