#include "polaron/superlinalg.hpp"

#include <doctest.h>

#include <random>

using namespace polaron;

namespace {

std::mt19937_64 rng(1234);

cplx crand() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

// Random supermatrix; if `consistent`, entries carry only monomials whose
// parity matches the index parity.
SuperMatrix random_super(const GradedSpace& s, bool consistent,
                         double soul_scale = 1.0) {
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j) {
      AlgebraElement e;
      for (int k = 0; k < kAlgebraDim; ++k) {
        if (consistent &&
            (kMonoDegree[k] & 1) != ((s.parity(i) + s.parity(j)) & 1))
          continue;
        e.c[k] = crand() * (kMonoDegree[k] > 0 ? soul_scale : 1.0);
      }
      m.at(i, j) = e;
    }
  return m;
}

// Homogeneous supermatrix of combined parity pi: entry (i,j) carries only
// monomials of degree parity p(i)+p(j)+pi mod 2.
SuperMatrix random_homogeneous(const GradedSpace& s, int pi) {
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j) {
      const int want = (s.parity(i) + s.parity(j) + pi) & 1;
      AlgebraElement e;
      for (int k = 0; k < kAlgebraDim; ++k)
        if ((kMonoDegree[k] & 1) == want) e.c[k] = crand();
      m.at(i, j) = e;
    }
  return m;
}

// Operator of definite parity p: supported on index positions of parity p
// with entries of Grassmann parity p.
SuperMatrix random_op_parity(const GradedSpace& s, int p) {
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j) {
      if (((s.parity(i) + s.parity(j)) & 1) != p) continue;
      AlgebraElement e;
      for (int k = 0; k < kAlgebraDim; ++k)
        if ((kMonoDegree[k] & 1) == p) e.c[k] = crand();
      m.at(i, j) = e;
    }
  return m;
}

double diff(const SuperMatrix& a, const SuperMatrix& b) {
  return (a - b).norm_max();
}

}  // namespace

TEST_CASE("graded tensor basics") {
  const auto q = GradedSpace::qubit();
  const auto id = SuperMatrix::identity(q);
  CHECK(diff(graded_tensor(id, id), SuperMatrix::identity(q.tensor(q))) == 0.0);

  // Purely bosonic row/col support reduces to the ordinary Kronecker block.
  SuperMatrix a(q, q);
  a.at(0, 0) = AlgebraElement::scalar(cplx{0.3, 0.7});
  auto b = random_super(q, false);
  const auto t = graded_tensor(a, b);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < 2; ++d)
      CHECK(max_abs(t.at(c, d) - a.at(0, 0) * b.at(c, d)) == 0.0);

  // Sign rule: p(a)=p(b)=0, p(c)=1 no sign; p(a)=1, p(b)=0, p(c)=1 gives -1.
  SuperMatrix e00(q, q), e10(q, q), e11_col(q, q);
  e00.at(0, 0) = AlgebraElement::scalar(1.0);
  e10.at(1, 0) = AlgebraElement::scalar(1.0);
  SuperMatrix f(q, q);
  f.at(1, 0) = AlgebraElement::scalar(1.0);  // p(c)=1 row support
  CHECK(component(graded_tensor(e00, f).at(0 * 2 + 1, 0 * 2 + 0), Mono::one) ==
        cplx(1.0));
  CHECK(component(graded_tensor(e10, f).at(1 * 2 + 1, 0 * 2 + 0), Mono::one) ==
        cplx(-1.0));
}

TEST_CASE("graded tensor is associative") {
  const auto q = GradedSpace::qubit();
  for (int it = 0; it < 10; ++it) {
    const auto a = random_super(q, false);
    const auto b = random_super(q, false);
    const auto c = random_super(q, false);
    CHECK(diff(graded_tensor(graded_tensor(a, b), c),
               graded_tensor(a, graded_tensor(b, c))) <= 1e-14);
  }
}

TEST_CASE("multiplicativity with graded sign") {
  // (A (x)s B)(C (x)s D) = (-1)^{p(B)p(C)} (AC (x)s BD) for operators B, C of
  // definite parity (support parity equal to entry parity).
  const auto q = GradedSpace::qubit();
  for (int pb = 0; pb < 2; ++pb)
    for (int pc = 0; pc < 2; ++pc) {
      const auto a = random_op_parity(q, 0);
      const auto b = random_op_parity(q, pb);
      const auto c = random_op_parity(q, pc);
      const auto d = random_op_parity(q, 1);
      const double sign = (pb && pc) ? -1.0 : 1.0;
      const auto lhs = graded_tensor(a, b) * graded_tensor(c, d);
      SuperMatrix rhs = graded_tensor(a * c, b * d);
      rhs *= sign;
      CHECK(diff(lhs, rhs) <= 1e-13);
    }
}

TEST_CASE("graded embed") {
  const auto q = GradedSpace::qubit();
  // Identity embeds to identity.
  const auto id2 = SuperMatrix::identity(q.tensor(q));
  CHECK(diff(graded_embed(id2, {1, 3}, 4),
             SuperMatrix::identity(GradedSpace::qubits(4))) <= 1e-14);

  // Adjacent two-site operator on a two-site chain is the operator itself.
  const auto op = random_super(q.tensor(q), false);
  CHECK(diff(graded_embed(op, {0, 1}, 2), op) == 0.0);

  // Fast even-operator path agrees with the general swap-based embedding,
  // in both slot orders and with bystanders in between.
  const auto even_op = random_homogeneous(q.tensor(q), 0);
  for (auto [i, j] : {std::pair{0, 2}, {1, 3}, {0, 3}, {2, 0}, {3, 1}}) {
    CAPTURE(i);
    CAPTURE(j);
    CHECK(diff(graded_embed(even_op, {i, j}, 4),
               graded_embed_two_even(even_op, i, j, 4)) <= 1e-13);
  }

  // Embedding respects products of single-slot operators.
  const auto x = random_homogeneous(q, 1);
  const auto y = random_homogeneous(q, 1);
  const auto xy = graded_embed(x, {0}, 3) * graded_embed(y, {2}, 3);
  const auto xy2 = graded_embed(graded_tensor(x, y), {0, 2}, 3);
  CHECK(diff(xy, xy2) <= 1e-13);

  CHECK_THROWS_AS(graded_embed(x, {5}, 3), std::out_of_range);
}

TEST_CASE("odd single-slot embedding carries the string to later factors") {
  // X odd at slot s acquires (-1)^{parity of slots > s}; this is the sign
  // distribution the graded product rule produces.
  const auto q = GradedSpace::qubit();
  SuperMatrix cdag(q, q);
  cdag.at(1, 0) = AlgebraElement::scalar(1.0);
  const auto e = graded_embed(cdag, {0}, 2);
  // row (1,c), col (0,c): sign (-1)^{p(c)}
  CHECK(component(e.at(2, 0), Mono::one) == cplx(1.0));
  CHECK(component(e.at(3, 1), Mono::one) == cplx(-1.0));
  const auto e2 = graded_embed(cdag, {1}, 2);
  CHECK(component(e2.at(1, 0), Mono::one) == cplx(1.0));
  CHECK(component(e2.at(3, 2), Mono::one) == cplx(1.0));
}

TEST_CASE("supertrace") {
  const auto q = GradedSpace::qubit();
  CHECK(max_abs(supertrace(SuperMatrix::identity(q))) == 0.0);

  SuperMatrix d(q, q);
  const auto x = AlgebraElement::monomial(Mono::ap, cplx{0.2, 0.4});
  const auto y = AlgebraElement::scalar(cplx{1.0, -2.0});
  d.at(0, 0) = x;
  d.at(1, 1) = y;
  CHECK(max_abs(supertrace(d) - (x - y)) == 0.0);

  // Partial supertrace over the auxiliary of A (x)s Id vanishes.
  const auto a = random_super(q.tensor(q), false);
  const auto big = graded_tensor(a, SuperMatrix::identity(q));
  const auto pt = partial_supertrace(big, {q, q, q}, 2);
  CHECK(pt.norm_max() <= 1e-15);

  // Partial supertrace of a graded tensor product factorizes, for any A.
  const auto ae = random_super(q, false);
  const auto b = random_super(q, true);
  const auto pt2 = partial_supertrace(graded_tensor(ae, b), {q, q}, 1);
  SuperMatrix expect = ae;
  const auto strb = supertrace(b);
  for (auto& e : expect.a) e = e * strb;
  CHECK(diff(pt2, expect) <= 1e-14);
}

TEST_CASE("supertrace cyclicity with graded sign") {
  const auto s = GradedSpace::qubits(2);
  for (int pi = 0; pi < 2; ++pi) {
    const auto a = random_homogeneous(s, pi);
    const auto b = random_homogeneous(s, pi);
    const double sign = pi ? -1.0 : 1.0;
    const auto lhs = supertrace(a * b);
    const auto rhs = sign * supertrace(b * a);
    CHECK(max_abs(lhs - rhs) <= 1e-13);
  }
}

TEST_CASE("super transpose involution on bosonic support") {
  const auto q = GradedSpace::qubit();
  SuperMatrix m(q.tensor(q), q.tensor(q));
  // Support only where both factor-0 indices are bosonic: flats 0 and 1.
  m.at(0, 0) = AlgebraElement::scalar(crand());
  m.at(0, 1) = AlgebraElement::scalar(crand());
  m.at(1, 0) = AlgebraElement::scalar(crand());
  const std::vector<GradedSpace> ff = {q, q};
  const auto t1 = super_transpose(super_transpose(m, ff, 0), ff, 0);
  CHECK(diff(t1, m) == 0.0);

  // Double super transpose on both factors conjugates by the parity.
  const auto g = random_super(q.tensor(q), true);
  auto tt = super_transpose(super_transpose(g, ff, 0), ff, 0);
  tt = super_transpose(super_transpose(tt, ff, 1), ff, 1);
  SuperMatrix conj = g;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const int pi = g.rows.parity(i), pj = g.cols.parity(j);
      conj.at(i, j) = (((pi + pj) & 1) ? -1.0 : 1.0) * g.at(i, j);
    }
  CHECK(diff(tt, conj) <= 1e-15);
}

TEST_CASE("body_eig") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  auto pairs = body_eig(d);
  std::vector<double> evs = {pairs[0].lambda.real(), pairs[1].lambda.real()};
  std::sort(evs.begin(), evs.end());
  CHECK(evs[0] == doctest::Approx(1.0));
  CHECK(evs[1] == doctest::Approx(2.0));

  // Random 8x8: eigenvalue sum equals the trace, left/right biorthogonal.
  Eigen::MatrixXcd m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = crand();
  auto ps = body_eig(m);
  cplx sum = 0.0;
  for (const auto& p : ps) sum += p.lambda;
  CHECK(std::abs(sum - m.trace()) <= 1e-10 * m.norm());
  for (const auto& pi : ps)
    for (const auto& pj : ps) {
      const cplx ov = (pi.left * pj.right)(0);
      const cplx want = (&pi == &pj) ? 1.0 : 0.0;
      CHECK(std::abs(ov - want) <= 1e-8);
    }

  // Jordan-like defective matrix: documented failure mode.
  Eigen::MatrixXcd jm(2, 2);
  jm << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(body_eig(jm), std::runtime_error);
}

TEST_CASE("graded_eig on lambda Id + G Id") {
  const auto s = GradedSpace::qubits(2);
  const cplx lam{0.7, -0.3};
  const auto g = grassmann_G(1.0, 1.0, 1.0, 1.0);
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    m.at(i, i) = AlgebraElement::scalar(lam) + g;
  auto pairs = graded_eig(m);
  REQUIRE(pairs.size() == s.dim());
  for (const auto& p : pairs) {
    CHECK(std::abs(p.lambda_body - lam) <= 1e-12);
    CHECK(max_abs(p.lambda_soul - g) <= 1e-12);
  }
}

TEST_CASE("graded_eig reduces to body_eig on body-only input") {
  const auto s = GradedSpace::qubits(2);
  SuperMatrix m(s, s);
  for (std::size_t i = 0; i < s.dim(); ++i)
    m.at(i, i) = AlgebraElement::scalar(cplx(1.0 + static_cast<double>(i), 0.5));
  auto pairs = graded_eig(m);
  for (const auto& p : pairs) {
    CHECK(max_abs(p.lambda_soul) == 0.0);
    CHECK(!p.flagged);
  }
}

TEST_CASE("graded_eig eigenvalue sum equals trace for even souls") {
  // With purely even soul components the second-order cross terms cancel in
  // the sum; with odd entries present the sum-of-eigenvalues identity does
  // not hold over the algebra (the 2x2 [[a, theta],[phi, b]] example breaks it).
  const auto s = GradedSpace::qubits(3);
  SuperMatrix m = random_super(s, true, 0.3);
  for (auto& e : m.a)
    for (int k = 0; k < kAlgebraDim; ++k)
      if (kMonoDegree[k] & 1) e.c[k] = 0.0;
  auto pairs = graded_eig(m);
  AlgebraElement sum;
  for (const auto& p : pairs) sum += p.lambda();
  CHECK(max_abs(sum - trace(m)) <= 1e-9 * m.norm_max() * s.dim());
}

TEST_CASE("graded_eig residuals") {
  const auto s = GradedSpace::qubits(3);
  const auto m = random_super(s, true, 0.3);
  auto pairs = graded_eig(m);
  REQUIRE(pairs.size() == s.dim());
  const double scale = m.norm_max();

  for (const auto& p : pairs) {
    CHECK(!p.flagged);
    // Residuals component by component, exact through degree two.
    SuperVector mv = m * p.right_vec;
    for (std::size_t i = 0; i < mv.size(); ++i)
      mv[i] -= p.lambda() * p.right_vec[i];
    double r = 0.0;
    for (const auto& e : mv) r = std::max(r, max_abs(e));
    CHECK(r <= 1e-9 * scale);

    // Left residual: w M = lambda w.
    SuperVector wm(s.dim());
    for (std::size_t j = 0; j < s.dim(); ++j) {
      AlgebraElement acc;
      for (std::size_t i = 0; i < s.dim(); ++i)
        mul_acc(acc, p.left_vec[i], m.at(i, j));
      acc -= p.lambda() * p.left_vec[j];
      wm[j] = acc;
    }
    double rl = 0.0;
    for (const auto& e : wm) rl = std::max(rl, max_abs(e));
    CHECK(rl <= 1e-9 * scale);
  }
}
