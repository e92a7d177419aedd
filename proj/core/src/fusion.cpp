#include "polaron/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace polaron {

namespace {

using std::sin;

cplx ipow(cplx b, int e) {
  cplx r = 1.0;
  for (int k = 0; k < e; ++k) r *= b;
  return r;
}

}  // namespace

cplx quantum_determinant(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const cplx e2 = 2.0 * p.eta;
  const AlgebraElement dkp = det2(k_plus(u, p));
  const AlgebraElement dkm = det2(k_minus(u + e2, p));
  // The boundary determinants are Grassmann-free (a+b+ = a-b- = 0).
  return ipow(d.zeta(u + e2), 2 * p.n_sites) * d.g(-2.0 * u - 3.0 * e2) *
         d.g(2.0 * u + e2) * body(dkp) * body(dkm);
}

cplx tilde_delta(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const cplx z = d.zeta(2.0 * u + 4.0 * p.eta);
  if (std::abs(z) < 1e-12)
    throw std::domain_error("tilde_delta: zeta(2u+4eta) vanishes at this u");
  return quantum_determinant(u, p) / z;
}

const SuperMatrix& FusedTransfer::operator()(int n, cplx u) {
  if (n < 0) throw std::invalid_argument("FusedTransfer: n < 0");
  const auto key = std::make_pair(n, std::make_pair(u.real(), u.imag()));
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  SuperMatrix value;
  if (n == 0) {
    value = SuperMatrix::identity(GradedSpace::qubits(params_.n_sites));
  } else if (n == 1) {
    value = -1.0 * transfer(u, params_);
  } else {
    const cplx e2 = 2.0 * params_.eta;
    const SuperMatrix& tn = (*this)(n - 1, u);
    const SuperMatrix& t1 = (*this)(1, u + static_cast<double>(n - 1) * e2);
    const SuperMatrix& tm = (*this)(n - 2, u);
    value = tn * t1;
    const cplx dd = tilde_delta(u + static_cast<double>(n - 2) * e2, params_);
    SuperMatrix tail = tm;
    tail *= dd;
    value += tail;
  }
  return cache_.emplace(key, std::move(value)).first->second;
}

double eta_root_of_unity(int n) {
  return (std::acos(-1.0) / 2.0) / static_cast<double>(n + 1);
}

TruncationScalars truncation_scalars(int n, ModelParams p) {
  p.eta = eta_root_of_unity(n);
  return TruncationScalars{n, std::move(p)};
}

cplx TruncationScalars::phi_id(cplx u) const {
  const cplx e2 = 2.0 * params.eta;
  cplx prod_h = 1.0, prod_ht = 1.0;
  for (int k = 0; k <= n; ++k)
    prod_h *= det_rep_h(u + static_cast<double>(k) * e2, params);
  for (int k = -1; k <= n - 1; ++k)
    prod_ht *= det_rep_h_tilde(u + static_cast<double>(k) * e2, params);
  const double sgn = (n % 2) ? 1.0 : -1.0;
  return sgn * (prod_h + prod_ht);
}

cplx TruncationScalars::phi_tau(cplx u) const {
  const cplx e2 = 2.0 * params.eta;
  return -det_rep_h(u, params) *
         det_rep_h_tilde(u + static_cast<double>(n - 1) * e2, params);
}

double truncation_residual(int n, cplx u, const ModelParams& p) {
  if (n < 1) throw std::invalid_argument("truncation_residual: n must be >= 1");
  const auto ts = truncation_scalars(n, p);
  FusedTransfer ft(ts.params);
  const cplx e2 = 2.0 * ts.params.eta;
  const SuperMatrix& lhs = ft(n + 1, u);
  SuperMatrix rhs = SuperMatrix::identity(lhs.rows);
  rhs *= ts.phi_id(u);
  SuperMatrix tail = ft(n - 1, u + e2);
  tail *= ts.phi_tau(u);
  rhs -= tail;
  const double scale = std::max({lhs.norm_max(), rhs.norm_max(), 1e-300});
  return (lhs - rhs).norm_max() / scale;
}

cplx det_rep_h(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const cplx e2 = 2.0 * p.eta;
  const cplx gm = d.omega_minus * sin(u + p.psi_minus);
  const cplx gp = d.omega_plus * sin(u + p.psi_plus);
  return ipow(sin(u + e2) / sin(e2), 2 * p.n_sites) *
         (sin(2.0 * u + 2.0 * e2) / sin(2.0 * u + e2)) * gm * gp;
}

cplx det_rep_h_tilde(cplx u, const ModelParams& p) {
  return det_rep_h(-u - 4.0 * p.eta, p);
}

HConsistency h_consistency(int n, cplx u, const ModelParams& base) {
  auto ts = truncation_scalars(n, base);
  const ModelParams& p = ts.params;
  const cplx e2 = 2.0 * p.eta;
  HConsistency r{};

  const cplx lhs1 = det_rep_h(u + e2, p) * det_rep_h_tilde(u - e2, p);
  r.delta = std::abs(lhs1 + tilde_delta(u, p)) /
            std::max({std::abs(lhs1), 1.0});

  const cplx lhs2 = det_rep_h(u, p) *
                    det_rep_h_tilde(u + static_cast<double>(n - 1) * e2, p);
  const cplx pt = ts.phi_tau(u);
  r.phi_tau = std::abs(lhs2 + pt) / std::max({std::abs(lhs2), std::abs(pt), 1.0});

  cplx prod_h = 1.0, prod_ht = 1.0;
  for (int k = 0; k <= n; ++k)
    prod_h *= det_rep_h(u + static_cast<double>(k) * e2, p);
  for (int k = -1; k <= n - 1; ++k)
    prod_ht *= det_rep_h_tilde(u + static_cast<double>(k) * e2, p);
  const cplx pid = ((n % 2) ? 1.0 : -1.0) * ts.phi_id(u);
  r.phi_id = std::abs(prod_h + prod_ht - pid) /
             std::max({std::abs(prod_h), std::abs(prod_ht), std::abs(pid), 1.0});
  return r;
}

namespace {

AlgebraElement alg_det(std::vector<AlgebraElement> m, int n) {
  // Cofactor expansion; entries are even and commute.
  if (n == 1) return m[0];
  AlgebraElement det;
  std::vector<AlgebraElement> minor((n - 1) * (n - 1));
  for (int c = 0; c < n; ++c) {
    for (int i = 1; i < n; ++i) {
      int jj = 0;
      for (int j = 0; j < n; ++j) {
        if (j == c) continue;
        minor[(i - 1) * (n - 1) + jj++] = m[i * n + j];
      }
    }
    AlgebraElement term = m[c] * alg_det(minor, n - 1);
    if (c % 2)
      det -= term;
    else
      det += term;
  }
  return det;
}

}  // namespace

AlgebraElement det_rep_determinant(cplx u, const ModelParams& p, int n,
                                   const std::vector<AlgebraElement>& samples) {
  if (static_cast<int>(samples.size()) != n + 1)
    throw std::invalid_argument("det_rep_determinant: need n+1 samples");
  const cplx e2 = 2.0 * p.eta;
  const int dim = n + 1;
  std::vector<AlgebraElement> m(dim * dim);
  auto at = [&](int i, int j) -> AlgebraElement& { return m[i * dim + j]; };
  auto hk = [&](int k) { return det_rep_h(u + static_cast<double>(k) * e2, p); };
  auto htk = [&](int k) {
    return det_rep_h_tilde(u + static_cast<double>(k) * e2, p);
  };
  for (int k = 0; k <= n; ++k) at(k, k) = samples[k];
  at(0, 1 % dim) += AlgebraElement::scalar(-htk(-1));
  at(0, n) += AlgebraElement::scalar(-hk(0));
  for (int k = 1; k < n; ++k) {
    at(k, k - 1) += AlgebraElement::scalar(-hk(k));
    at(k, k + 1) += AlgebraElement::scalar(-htk(k - 1));
  }
  if (n >= 1) {
    at(n, 0) += AlgebraElement::scalar(-htk(n - 1));
    at(n, n - 1) += AlgebraElement::scalar(-hk(n));
  }
  // Row scaling keeps the wildly different h magnitudes in check.
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s = std::max(s, max_abs(at(i, j)));
    if (s > 0.0)
      for (int j = 0; j < dim; ++j) at(i, j) *= 1.0 / s;
  }
  return alg_det(m, dim);
}

double det_rep_residual(cplx u, const ModelParams& p, int n,
                        const std::vector<AlgebraElement>& samples) {
  return max_abs(det_rep_determinant(u, p, n, samples));
}

cplx kappa_tq(cplx u, const ModelParams& p) {
  const auto d = derive(p);
  const cplx e2 = 2.0 * p.eta;
  return d.omega_minus * d.omega_plus *
         ipow(-sin(u - e2) / sin(e2), 2 * p.n_sites) *
         (sin(2.0 * u - 2.0 * e2) / sin(2.0 * u - e2)) * sin(u - p.psi_minus) *
         sin(u - p.psi_plus);
}

QRecursion q_recursion(int n_max, const std::vector<cplx>& u_grid,
                       const std::function<cplx(cplx)>& eigen_fn,
                       const ModelParams& p,
                       const std::vector<cplx>& ansatz_roots,
                       bool have_ansatz) {
  const cplx e2 = 2.0 * p.eta;
  QRecursion out;

  for (cplx u : u_grid) {
    bool ok = true;
    for (int k = 0; k <= n_max && ok; ++k)
      if (std::abs(kappa_tq(u - static_cast<double>(k) * e2, p)) < 1e-8)
        ok = false;
    // Poles of Delta~ along the needed argument line disqualify the point too.
    const auto d = derive(p);
    for (int j = -2 * n_max - 1; j <= n_max && ok; ++j)
      if (std::abs(d.zeta(2.0 * (u + static_cast<double>(j) * e2) +
                          4.0 * p.eta)) < 1e-10)
        ok = false;
    if (ok)
      out.grid.push_back(u);
    else
      ++out.skipped_points;
  }

  const int g = static_cast<int>(out.grid.size());
  out.q.assign(n_max + 1, std::vector<cplx>(g));

  using lcplx = std::complex<long double>;
  for (int gi = 0; gi < g; ++gi) {
    const cplx u = out.grid[gi];
    // The fused products overflow double range on deep grids, so the
    // recursion accumulates in extended precision.
    std::vector<cplx> lam_cache(2 * n_max + 1);
    for (int j = -n_max; j <= n_max; ++j)
      lam_cache[j + n_max] = eigen_fn(u + static_cast<double>(j) * e2);
    auto lam = [&](int j) { return lcplx(lam_cache[j + n_max]); };

    lcplx kprod = lcplx(kappa_tq(u, p));
    for (int n = 0; n <= n_max; ++n) {
      // T[k] = Lambda^(k)(u - n 2eta) for the current diagonal m = n.
      lcplx tkm1 = 1.0L;               // Lambda^(0)
      lcplx tk = -lam(-n);             // Lambda^(1)(u - n 2eta)
      if (n == 0) {
        out.q[0][gi] = static_cast<cplx>(1.0L / kprod);
        continue;
      }
      for (int k = 1; k < n; ++k) {
        const lcplx t1 = -lam(k - n);  // Lambda^(1)(u + (k-n) 2eta)
        const lcplx dd =
            lcplx(tilde_delta(u + static_cast<double>(k - 1 - n) * e2, p));
        const lcplx next = tk * t1 + dd * tkm1;
        tkm1 = tk;
        tk = next;
      }
      kprod *= lcplx(kappa_tq(u - static_cast<double>(n) * e2, p));
      out.q[n][gi] = static_cast<cplx>(tk / kprod);
    }
  }

  // Convergence is measured on the scale-free shape: the fused Q^(n) carries
  // a per-level scalar factor together with the drifting deficit
  // 1/[Q(u - n 2eta) h(-u + n 2eta)] (visible in the closed form of the
  // fused eigenvalues), so the object that settles is
  //   rho_n(u) = Q^(n)(u) h(-u + n 2eta) Q(u - n 2eta) / Q(u)
  // normalized at a reference grid point.
  const auto q_ans = [&](cplx u) {
    cplx qa = 1.0;
    for (cplx v : ansatz_roots) qa *= sin(u - v) * sin(u + v + e2);
    return qa;
  };
  if (have_ansatz && g >= 2) {
    std::vector<std::vector<cplx>> rho(n_max + 1, std::vector<cplx>(g));
    for (int n = 0; n <= n_max; ++n)
      for (int gi = 0; gi < g; ++gi) {
        const cplx u = out.grid[gi];
        rho[n][gi] = out.q[n][gi] *
                     det_rep_h(-u + static_cast<double>(n) * e2, p) *
                     q_ans(u - static_cast<double>(n) * e2) / q_ans(u);
      }
    out.ansatz_deviation.assign(n_max + 1, 0.0);
    out.step_change.assign(n_max + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
      double dev = 0.0;
      for (int gi = 1; gi < g; ++gi)
        dev = std::max(dev, std::abs(rho[n][gi] / rho[n][0] - 1.0));
      out.ansatz_deviation[n] = dev;
      if (n >= 1) {
        double st = 0.0;
        for (int gi = 0; gi < g; ++gi)
          st = std::max(st, std::abs(rho[n][gi] / rho[n][0] -
                                     rho[n - 1][gi] / rho[n - 1][0]));
        out.step_change[n] = st;
      }
    }
  } else {
    out.step_change.assign(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
      double worst = 0.0;
      for (int gi = 0; gi < g; ++gi)
        worst = std::max(worst,
                         std::abs(out.q[n][gi] + out.q[n - 1][gi]));
      out.step_change[n] = worst;
    }
  }
  return out;
}

}  // namespace polaron
