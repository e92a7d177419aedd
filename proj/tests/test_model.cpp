#include "polaron/model.hpp"
#include "polaron/spinmap.hpp"

#include <doctest.h>

#include <random>

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

std::mt19937_64 rng(99);
cplx rand_u() {
  std::uniform_real_distribution<double> d(-1.2, 1.2);
  return {d(rng), 0.5 * d(rng)};
}

}  // namespace

TEST_CASE("R matrix at u = 0 is the graded permutation") {
  const auto r0 = r_matrix(0.0, cplx{0.43, 0.0});
  CHECK((r0 - graded_permutation()).norm_max() <= 1e-15);
}

TEST_CASE("Yang-Baxter, unitarity, crossing, periodicity") {
  for (int it = 0; it < 5; ++it) {
    const cplx u = rand_u(), mu = rand_u();
    const cplx eta{0.2 + 0.1 * it, 0.02 * it};
    CHECK(ybe_residual(u, mu, eta) <= 1e-12);
    CHECK(unitarity_residual(u, eta) <= 1e-12);
    CHECK(crossing_residual(u, eta) <= 1e-12);
    CHECK(periodicity_residual(u, eta) <= 1e-12);
  }
  // Free-fermion anisotropy and the permutation point.
  CHECK(ybe_residual(0.0, rand_u(), cplx{0.3, 0.0}) <= 1e-12);
  CHECK(ybe_residual(rand_u(), rand_u(), std::acos(-1.0) / 4.0) <= 1e-12);
}

TEST_CASE("boundary matrices") {
  const auto p = generic_params();
  CHECK((k_minus(0.0, p) - SuperMatrix::identity(GradedSpace::qubit()))
            .norm_max() <= 1e-14);

  const auto d = derive(p);
  for (int it = 0; it < 4; ++it) {
    const cplx u = rand_u();
    const auto det_m = det2(k_minus(u, p));
    // Determinants carry no Grassmann part: the a-b- and a+b+ products vanish.
    CHECK(max_abs(soul(det_m)) == 0.0);
    const cplx want = -d.omega_minus * d.omega_minus * std::sin(u + p.psi_minus) *
                      std::sin(u - p.psi_minus);
    CHECK(std::abs(body(det_m) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
    CHECK(max_abs(soul(det2(k_plus(u, p)))) == 0.0);
  }
}

TEST_CASE("monodromies") {
  auto p = generic_params(1);
  // N = 1: T(u) is the single R factor.
  const auto t = monodromy(0.37, p);
  const auto r = r_matrix(0.37, p.eta);
  CHECK((t - r).norm_max() <= 1e-14);

  // T(0) That(0) = zeta(0)^N Id = Id.
  p = generic_params(3);
  const auto prod = monodromy(0.0, p) * hat_monodromy(0.0, p);
  CHECK((prod - SuperMatrix::identity(GradedSpace::qubits(4))).norm_max() <=
        1e-13);
}

TEST_CASE("transfer matrix identities") {
  const double pi = std::acos(-1.0);
  for (int n : {2, 3}) {
    const auto p = generic_params(n);
    const auto id = SuperMatrix::identity(GradedSpace::qubits(n));
    CHECK((transfer(0.0, p) - id).norm_max() <= 1e-13);

    const cplx u = rand_u(), v = rand_u();
    const auto tu = transfer(u, p);
    const double scale = tu.norm_max();
    CHECK((transfer(-u - 2.0 * p.eta, p) - tu).norm_max() <= 1e-12 * scale);
    CHECK((transfer(u + pi, p) - tu).norm_max() <= 1e-12 * scale);
    CHECK(transfer_commutation_residual(u, v, p) <= 1e-12);
  }
}

TEST_CASE("graded eigenvalues of t: no odd part, degree two proportional to G") {
  const auto p = generic_params(2);
  const cplx u{0.37, 0.21};
  auto pairs = graded_eig(transfer(u, p));
  const cplx amp_bpam = p.amps[1] * p.amps[2];
  const cplx amp_apbm = p.amps[0] * p.amps[3];
  double scale = 0.0;
  for (const auto& g : pairs) scale = std::max(scale, std::abs(g.lambda_body));
  for (const auto& g : pairs) {
    CHECK(max_abs(parity_project(g.lambda_soul, 1)) <= 1e-10 * scale);
    CHECK(std::abs(component(g.lambda_soul, Mono::ap_am)) <= 1e-10 * scale);
    CHECK(std::abs(component(g.lambda_soul, Mono::bp_bm)) <= 1e-10 * scale);
    const cplx g1 = component(g.lambda_soul, Mono::bp_am) / amp_bpam;
    const cplx g2 = -component(g.lambda_soul, Mono::ap_bm) / amp_apbm;
    CHECK(std::abs(g1 - g2) <= 1e-10 * std::max(1.0, std::abs(g1)));
  }
}

TEST_CASE("embedded hopping equals the Fock construction") {
  // Two-site hopping block c1^dag c2 on sites (1,2) of a three-site chain.
  const auto q = GradedSpace::qubit();
  SuperMatrix cdag_local(q, q), c_local(q, q);
  cdag_local.at(1, 0) = AlgebraElement::scalar(1.0);
  c_local.at(0, 1) = AlgebraElement::scalar(1.0);
  const auto hop = graded_tensor(cdag_local, c_local);
  const auto embedded = graded_embed(hop, {0, 1}, 3);
  const Eigen::MatrixXcd fock =
      fermion_creator(1, 3) * fermion_annihilator(2, 3);
  CHECK((embedded.body() - fock).cwiseAbs().maxCoeff() <= 1e-14);
  // Odd single-site operators reproduce the right-string representation.
  const auto c2 = graded_embed(c_local, {1}, 3);
  CHECK((c2.body() - fermion_annihilator(2, 3, JwString::right))
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
}

TEST_CASE("hamiltonian basics") {
  for (int n : {2, 3, 4}) {
    const auto p = generic_params(n);
    const auto d = derive(p);
    const auto h = hamiltonian(p);
    CHECK(h.is_grade_consistent(1e-13));
    const cplx want = d.int_V * static_cast<double>(n - 1) + d.n_plus + d.n_zero;
    CHECK(max_abs(h.at(0, 0) - AlgebraElement::scalar(want)) <= 1e-13);
  }
  // Diagonal part of H at N=2 is isospectral with the XXZ image.
  auto p = generic_params(2);
  p.amps = {0, 0, 0, 0};
  CHECK(xxz_spectrum_deviation(p) <= 1e-12);
}

TEST_CASE("transfer derivative reproduces the hamiltonian") {
  for (int n : {2, 3}) {
    const auto p = generic_params(n);
    const auto td = hamiltonian_from_transfer(p);
    const auto h = hamiltonian(p);
    CHECK((td.h_num - h).norm_max() <= 1e-6 * std::max(1.0, h.norm_max()));
    CHECK(max_abs(parity_project(td.constant, 1)) <= 1e-10);
  }
  // Diagonal limit.
  auto p = generic_params(2);
  p.amps = {0, 0, 0, 0};
  const auto td = hamiltonian_from_transfer(p);
  CHECK((td.h_num - hamiltonian(p)).norm_max() <= 1e-6);
}

TEST_CASE("semiclassical limit") {
  const auto p = generic_params(2);
  const double r1 = semiclassical_residual(cplx{0.7, 0.0}, p, 1e-5);
  const double r2 = semiclassical_residual(cplx{0.7, 0.0}, p, 2e-5);
  CHECK(r1 <= 1e-3);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));  // linear in epsilon

  auto pd = p;
  pd.amps = {0, 0, 0, 0};
  CHECK(semiclassical_residual(cplx{0.7, 0.0}, pd, 1e-5) <= 1e-3);
}

TEST_CASE("large-z asymptotics") {
  const auto p = generic_params(2);
  const auto r = asymptotic_residual(p);
  CHECK(r.g_leading);
  CHECK(r.rel_residual <= 1e-6);

  auto pd = p;
  pd.amps = {0, 0, 0, 0};
  const auto rd = asymptotic_residual(pd);
  CHECK(!rd.g_leading);
}

TEST_CASE("parameter validation") {
  ModelParams p = generic_params();
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = generic_params();
  p.psi_minus = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = generic_params();
  p.eta = std::acos(-1.0) / 4.0;  // omega+ normalization diverges
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
