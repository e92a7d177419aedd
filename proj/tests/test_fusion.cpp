#include "polaron/fusion.hpp"
#include "polaron/bethe.hpp"

#include <doctest.h>

using namespace polaron;

namespace {

ModelParams generic_params(int n = 2) {
  ModelParams p;
  p.n_sites = n;
  p.eta = {0.43, 0.0};
  p.psi_minus = {0.62, 0.31};
  p.psi_plus = {1.07, -0.24};
  p.amps = {cplx{0.8, 0.1}, cplx{0.5, -0.3}, cplx{1.1, 0.2}, cplx{0.7, 0.4}};
  return p;
}

// Projector-based eigenvalue evaluator over the commuting body family.
struct Tracker {
  ModelParams p;
  Eigen::VectorXcd x;
  Eigen::RowVectorXcd w;
  cplx ov;

  cplx operator()(cplx u) const {
    SuperMatrix t = transfer(u, p);
    return (w * t.body() * x)(0) / ov;
  }
};

std::vector<Tracker> trackers(const ModelParams& p, cplx u_ref) {
  std::vector<Tracker> out;
  for (const auto& pr : body_eig(transfer(u_ref, p).body())) {
    Tracker t{p, pr.right, pr.left, (pr.left * pr.right)(0)};
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("quantum determinant") {
  const auto p = generic_params();
  const cplx u{0.37, 0.21};
  // Grassmann-free by construction; factorizations against the h pair.
  const auto [hm, hp] = h_pm(u, p);
  const cplx dd = tilde_delta(u, p);
  CHECK(std::abs(hp * h_pm(u + 2.0 * p.eta, p).first - dd) <=
        1e-12 * std::abs(dd));
  CHECK(std::abs(-det_rep_h(u + 2.0 * p.eta, p) *
                     det_rep_h(-u - 2.0 * p.eta, p) -
                 dd) <= 1e-12 * std::abs(dd));
  // Links to kappa.
  CHECK(std::abs(hp - kappa_tq(u + 2.0 * p.eta, p)) <= 1e-12 * std::abs(hp));
  CHECK(std::abs(hm - tilde_delta(u - 2.0 * p.eta, p) / kappa_tq(u, p)) <=
        1e-12 * std::abs(hm));
}

TEST_CASE("fused transfer matrices") {
  const auto p = generic_params(2);
  FusedTransfer ft(p);
  const cplx u{0.37, 0.21};
  CHECK((ft(0, u) - SuperMatrix::identity(GradedSpace::qubits(2))).norm_max() ==
        0.0);
  SuperMatrix mt = transfer(u, p);
  mt *= -1.0;
  CHECK((ft(1, u) - mt).norm_max() == 0.0);

  // The fused family commutes with t(v).
  const auto tv = transfer(cplx{-0.52, 0.18}, p);
  for (int n : {2, 3}) {
    const auto& tn = ft(n, u);
    const auto c = tn * tv - tv * tn;
    CHECK(c.norm_max() <= 1e-9 * tn.norm_max() * tv.norm_max());
  }
}

TEST_CASE("eigenvalue recursion in the shifted form") {
  const auto p = generic_params(2);
  const cplx e2 = 2.0 * p.eta;
  const cplx u{0.63, 0.2};
  auto trs = trackers(p, cplx{0.37, 0.21});
  for (const auto& tr : trs) {
    // Fused eigenvalues from the scalar recursion.
    const int nmax = 4;
    std::vector<cplx> lam(nmax + 1);
    for (int n = 0; n <= nmax; ++n) {
      // Lambda^(n)(u - n 2eta)
      const cplx v = u - static_cast<double>(n) * e2;
      cplx tkm1 = 1.0, tk = -tr(v);
      for (int k = 1; k < n; ++k) {
        const cplx t1 = -tr(v + static_cast<double>(k) * e2);
        const cplx ddv = tilde_delta(v + static_cast<double>(k - 1) * e2, p);
        const cplx next = tk * t1 + ddv * tkm1;
        tkm1 = tk;
        tk = next;
      }
      lam[n] = (n == 0) ? 1.0 : tk;
    }
    for (int n : {1, 2, 3}) {
      const cplx lhs = -tr(u);
      const cplx rhs = lam[n + 1] / lam[n] -
                       tilde_delta(u - e2, p) * lam[n - 1] / lam[n];
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("truncation identity at roots of unity") {
  const cplx u{0.37, 0.21};
  for (int n : {1, 2, 3}) CHECK(truncation_residual(n, u, generic_params(2)) <= 1e-9);
  for (int n : {1, 2}) CHECK(truncation_residual(n, u, generic_params(3)) <= 1e-9);

  auto pd = generic_params(2);
  pd.amps = {0, 0, 0, 0};
  for (int n : {1, 2, 3}) CHECK(truncation_residual(n, u, pd) <= 1e-9);

  CHECK_THROWS_AS(truncation_residual(0, u, generic_params(2)),
                  std::invalid_argument);
}

TEST_CASE("h consistency conditions") {
  const auto p = generic_params(2);
  for (int n : {1, 2, 3})
    for (cplx u : {cplx{0.37, 0.21}, cplx{0.9, -0.33}}) {
      const auto hc = h_consistency(n, u, p);
      CHECK(hc.delta <= 1e-10);
      CHECK(hc.phi_tau <= 1e-10);
      CHECK(hc.phi_id <= 1e-10);
    }
}

TEST_CASE("determinant representation vanishes on ED eigenvalues") {
  const cplx u{0.41, 0.23};
  for (int n : {1, 2}) {
    auto p = generic_params(2);
    p.eta = eta_root_of_unity(n);
    const cplx e2 = 2.0 * p.eta;
    auto ed0 = graded_eig(transfer(u, p));
    for (std::size_t s = 0; s < ed0.size(); ++s) {
      Eigen::RowVectorXcd w(ed0[s].left_vec.size());
      Eigen::VectorXcd x(ed0[s].right_vec.size());
      for (std::size_t i = 0; i < ed0[s].right_vec.size(); ++i) {
        x(i) = body(ed0[s].right_vec[i]);
        w(i) = body(ed0[s].left_vec[i]);
      }
      const cplx ov = (w * x)(0);
      std::vector<AlgebraElement> samples;
      for (int k = 0; k <= n; ++k) {
        const cplx uk = u + static_cast<double>(k) * e2;
        // Track this eigenstate by body projection and take the full
        // (body + soul) eigenvalue of the matching graded pair.
        SuperMatrix tk_mat = transfer(uk, p);
        const cplx body_k = (w * tk_mat.body() * x)(0) / ov;
        auto edk = graded_eig(tk_mat);
        double best = 1e300;
        AlgebraElement lam;
        for (const auto& g : edk) {
          const double d2 = std::abs(g.lambda_body - body_k);
          if (d2 < best) {
            best = d2;
            lam = g.lambda();
          }
        }
        samples.push_back(lam);
      }
      CHECK(det_rep_residual(u, p, n, samples) <= 1e-8);

      // Anti-test: a relatively perturbed eigenvalue does not annihilate it.
      auto bad = samples;
      bad[0] *= cplx(1.05);
      CHECK(det_rep_residual(u, p, n, bad) > 1e-3);
    }
  }
}

TEST_CASE("Q recursion shape converges to the diagonal ansatz") {
  auto p = generic_params(2);
  p.eta = {0.37, 0.0};
  p.amps = {0, 0, 0, 0};
  auto rep = spectrum_match(p, {cplx{0.52, 0.12}});
  auto trs = trackers(p, rep.u_ref);
  auto bodies = body_eig(transfer(rep.u_ref, p).body());

  for (const auto& rec : rep.records) {
    const Tracker* tr = nullptr;
    for (std::size_t i = 0; i < bodies.size(); ++i)
      if (std::abs(bodies[i].lambda - rec.lambda_body) < 1e-9) tr = &trs[i];
    REQUIRE(tr != nullptr);
    std::vector<cplx> grid;
    for (int j = 0; j < 6; ++j) grid.push_back(cplx(0.1 + 0.23 * j, -12.0));
    const auto qr = q_recursion(13, grid, *tr, p, rec.v0, true);
    REQUIRE(qr.grid.size() >= 3);
    for (int n = 3; n <= 12; ++n) CHECK(qr.ansatz_deviation[n] <= 1e-8);
  }
}
