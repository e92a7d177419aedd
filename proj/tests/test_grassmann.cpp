#include "polaron/grassmann.hpp"

#include <doctest.h>

#include <random>

using namespace polaron;

namespace {

AlgebraElement random_element(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AlgebraElement x;
  for (int i = 0; i < kAlgebraDim; ++i) x.c[i] = cplx(u(rng), u(rng));
  return x;
}

double rel_err(const AlgebraElement& a, const AlgebraElement& b, double scale) {
  return max_abs(a - b) / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("generator products reorder with signs") {
  const auto ap = AlgebraElement::monomial(Mono::ap);
  const auto bp = AlgebraElement::monomial(Mono::bp);
  const auto am = AlgebraElement::monomial(Mono::am);
  const auto bm = AlgebraElement::monomial(Mono::bm);

  CHECK(component(ap * bm, Mono::ap_bm) == cplx(1.0));
  CHECK(max_abs(ap * bm - AlgebraElement::monomial(Mono::ap_bm)) == 0.0);

  CHECK(max_abs(bm * ap + AlgebraElement::monomial(Mono::ap_bm)) == 0.0);

  // Forbidden pairs and nilpotency.
  CHECK(is_zero(ap * bp, 0.0));
  CHECK(is_zero(am * bm, 0.0));
  CHECK(is_zero(ap * ap, 0.0));
  CHECK(is_zero(bp * am * bm, 0.0));
}

TEST_CASE("addition and scaling are coefficient-wise") {
  const auto ap = AlgebraElement::monomial(Mono::ap);
  CHECK(component(ap + ap, Mono::ap) == cplx(2.0));
  std::mt19937_64 rng(7);
  const auto x = random_element(rng);
  CHECK(is_zero(0.0 * x, 0.0));
  CHECK(is_zero(x + (-1.0) * x, 0.0));
}

TEST_CASE("grassmann_G") {
  const auto g = grassmann_G(1.0, 1.0, 1.0, 1.0);
  CHECK(component(g, Mono::bp_am) == cplx(1.0));
  CHECK(component(g, Mono::ap_bm) == cplx(-1.0));
  CHECK(component(g, Mono::ap_am) == cplx(0.0));

  // Both degree-2 coefficients vanish when the partner amplitudes are zero.
  CHECK(is_zero(grassmann_G(2.0, 0.0, 3.0, 0.0), 0.0));

  // G is built from products of the generators and squares to zero.
  const auto bp = AlgebraElement::monomial(Mono::bp, cplx{0.5, 0.2});
  const auto am = AlgebraElement::monomial(Mono::am, cplx{-1.1, 0.4});
  const auto ap = AlgebraElement::monomial(Mono::ap, cplx{0.3, -0.7});
  const auto bm = AlgebraElement::monomial(Mono::bm, cplx{0.9, 0.1});
  const auto g2 = bp * am - ap * bm;
  CHECK(max_abs(g2 - grassmann_G(cplx{0.3, -0.7}, cplx{0.5, 0.2},
                                 cplx{-1.1, 0.4}, cplx{0.9, 0.1})) < 1e-15);
  CHECK(is_zero(g2 * g2, 1e-15));
}

TEST_CASE("component, body, parity projection") {
  auto x = AlgebraElement::monomial(Mono::ap_bm);
  x += AlgebraElement::scalar(3.0);
  CHECK(component(x, Mono::ap_bm) == cplx(1.0));
  CHECK(body(AlgebraElement::scalar(3.0) + AlgebraElement::monomial(Mono::ap)) ==
        cplx(3.0));
  const auto odd = parity_project(
      AlgebraElement::monomial(Mono::ap) + AlgebraElement::scalar(1.0), 1);
  CHECK(max_abs(odd - AlgebraElement::monomial(Mono::ap)) == 0.0);
}

TEST_CASE("associativity and distributivity") {
  std::mt19937_64 rng(42);
  for (int it = 0; it < 200; ++it) {
    const auto x = random_element(rng);
    const auto y = random_element(rng);
    const auto z = random_element(rng);
    const double scale = max_abs(x) * max_abs(y) * max_abs(z) + 1.0;
    CHECK(rel_err((x * y) * z, x * (y * z), scale) <= 1e-14);
    CHECK(rel_err(x * (y + z), x * y + x * z, scale) <= 1e-14);
  }
}

TEST_CASE("anticommutation and parity structure") {
  const Mono gens[] = {Mono::ap, Mono::bp, Mono::am, Mono::bm};
  for (auto g1 : gens)
    for (auto g2 : gens) {
      if (g1 == g2) continue;
      const auto a = AlgebraElement::monomial(g1);
      const auto b = AlgebraElement::monomial(g2);
      CHECK(is_zero(a * b + b * a, 0.0));
    }

  std::mt19937_64 rng(3);
  for (int it = 0; it < 100; ++it) {
    const auto x = random_element(rng);
    const auto e = parity_project(random_element(rng), 0);
    const double scale = (max_abs(x) + 1.0) * (max_abs(e) + 1.0);
    // Even elements commute with everything.
    CHECK(rel_err(e * x, x * e, scale) <= 1e-14);
  }
}

TEST_CASE("soul is nilpotent of order three") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 100; ++it) {
    const auto s = soul(random_element(rng));
    CHECK(is_zero(s * s * s, 1e-14 * (1.0 + max_abs(s) * max_abs(s) * max_abs(s))));
  }
}

TEST_CASE("G is central") {
  std::mt19937_64 rng(23);
  const auto g = grassmann_G(cplx{0.7, 0.1}, cplx{-0.3, 0.8}, cplx{1.2, -0.5},
                             cplx{0.4, 0.9});
  for (int it = 0; it < 100; ++it) {
    const auto x = random_element(rng);
    CHECK(rel_err(g * x, x * g, max_abs(g) * max_abs(x) + 1.0) <= 1e-15);
  }
}

TEST_CASE("json round trip") {
  std::mt19937_64 rng(5);
  const auto x = random_element(rng);
  const auto y = algebra_from_json_string(to_json_string(x));
  CHECK(max_abs(x - y) <= 1e-15);
  CHECK(to_json_string(AlgebraElement::monomial(Mono::bp_bm)) ==
        "{\"b+b-\":[1.0,0.0]}");
}
