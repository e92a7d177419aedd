#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>

namespace polaron {

using cplx = std::complex<double>;

// Basis monomials of the boundary Grassmann algebra.  The four odd
// generators a+, b+, a-, b- anticommute pairwise and obey a+*b+ = 0 and
// a-*b- = 0, so every product of three or more generators vanishes and the
// algebra is spanned by the nine monomials below (canonical generator order
// a+ < b+ < a- < b-).
enum class Mono : int {
  one = 0,
  ap = 1,
  bp = 2,
  am = 3,
  bm = 4,
  ap_am = 5,
  ap_bm = 6,
  bp_am = 7,
  bp_bm = 8,
};

inline constexpr int kAlgebraDim = 9;

// Degree (number of generators) of each monomial.
inline constexpr std::array<int, kAlgebraDim> kMonoDegree = {0, 1, 1, 1, 1,
                                                             2, 2, 2, 2};

namespace detail {

// Generator content of each monomial as a bitmask: bit 0 = a+, bit 1 = b+,
// bit 2 = a-, bit 3 = b-.
inline constexpr std::array<int, kAlgebraDim> kMonoMask = {
    0b0000, 0b0001, 0b0010, 0b0100, 0b1000,
    0b0101, 0b1001, 0b0110, 0b1010};

struct MulEntry {
  int idx;     // resulting monomial, -1 if the product vanishes
  int sign;    // +1 or -1
};

constexpr int mask_to_index(int mask) {
  for (int i = 0; i < kAlgebraDim; ++i)
    if (kMonoMask[i] == mask) return i;
  return -1;
}

constexpr MulEntry mono_product(int i, int j) {
  const int mi = kMonoMask[i];
  const int mj = kMonoMask[j];
  if (mi & mj) return {-1, 0};  // repeated generator
  const int u = mi | mj;
  if ((u & 0b0011) == 0b0011) return {-1, 0};  // a+ b+ pair forbidden
  if ((u & 0b1100) == 0b1100) return {-1, 0};  // a- b- pair forbidden
  // Sign from sorting the concatenation (mi generators, then mj) into
  // canonical ascending order: count inversions across the two halves.
  int swaps = 0;
  for (int g2 = 0; g2 < 4; ++g2) {
    if (!(mj & (1 << g2))) continue;
    for (int g1 = g2 + 1; g1 < 4; ++g1)
      if (mi & (1 << g1)) ++swaps;
  }
  return {mask_to_index(u), (swaps % 2 == 0) ? 1 : -1};
}

constexpr std::array<std::array<MulEntry, kAlgebraDim>, kAlgebraDim>
make_mul_table() {
  std::array<std::array<MulEntry, kAlgebraDim>, kAlgebraDim> t{};
  for (int i = 0; i < kAlgebraDim; ++i)
    for (int j = 0; j < kAlgebraDim; ++j) t[i][j] = mono_product(i, j);
  return t;
}

inline constexpr auto kMulTable = make_mul_table();

}  // namespace detail

// Element of the nine-dimensional boundary Grassmann algebra with complex
// coefficients.  Pure value type; all operations are total.
struct AlgebraElement {
  std::array<cplx, kAlgebraDim> c{};

  AlgebraElement() = default;

  static AlgebraElement zero() { return {}; }

  static AlgebraElement scalar(cplx v) {
    AlgebraElement x;
    x.c[0] = v;
    return x;
  }

  static AlgebraElement monomial(Mono m, cplx amp = 1.0) {
    AlgebraElement x;
    x.c[static_cast<int>(m)] = amp;
    return x;
  }

  cplx& operator[](Mono m) { return c[static_cast<int>(m)]; }
  const cplx& operator[](Mono m) const { return c[static_cast<int>(m)]; }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    for (int i = 0; i < kAlgebraDim; ++i) c[i] += o.c[i];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    for (int i = 0; i < kAlgebraDim; ++i) c[i] -= o.c[i];
    return *this;
  }
  AlgebraElement& operator*=(cplx s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

inline AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) {
  return a += b;
}
inline AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) {
  return a -= b;
}
inline AlgebraElement operator-(const AlgebraElement& a) {
  AlgebraElement r;
  for (int i = 0; i < kAlgebraDim; ++i) r.c[i] = -a.c[i];
  return r;
}
inline AlgebraElement operator*(cplx s, AlgebraElement a) { return a *= s; }
inline AlgebraElement operator*(AlgebraElement a, cplx s) { return a *= s; }

// Accumulate x*y into dest (generator products reordered with sign).
inline void mul_acc(AlgebraElement& dest, const AlgebraElement& x,
                    const AlgebraElement& y) {
  for (int i = 0; i < kAlgebraDim; ++i) {
    const cplx xi = x.c[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < kAlgebraDim; ++j) {
      const cplx yj = y.c[j];
      if (yj == 0.0) continue;
      const auto e = detail::kMulTable[i][j];
      if (e.idx < 0) continue;
      dest.c[e.idx] += static_cast<double>(e.sign) * xi * yj;
    }
  }
}

inline AlgebraElement operator*(const AlgebraElement& x,
                                const AlgebraElement& y) {
  AlgebraElement r;
  mul_acc(r, x, y);
  return r;
}

inline cplx body(const AlgebraElement& x) { return x.c[0]; }

inline AlgebraElement soul(AlgebraElement x) {
  x.c[0] = 0.0;
  return x;
}

inline cplx component(const AlgebraElement& x, Mono m) {
  return x.c[static_cast<int>(m)];
}

// Keep only monomials of the requested parity (0 = even, 1 = odd).
inline AlgebraElement parity_project(const AlgebraElement& x, int parity) {
  AlgebraElement r;
  for (int i = 0; i < kAlgebraDim; ++i)
    if (kMonoDegree[i] % 2 == parity) r.c[i] = x.c[i];
  return r;
}

inline double max_abs(const AlgebraElement& x) {
  double m = 0.0;
  for (const auto& v : x.c) m = std::max(m, std::abs(v));
  return m;
}

inline bool is_zero(const AlgebraElement& x, double tol = 1e-12) {
  return max_abs(x) <= tol;
}

inline bool is_body_only(const AlgebraElement& x, double tol = 0.0) {
  for (int i = 1; i < kAlgebraDim; ++i)
    if (std::abs(x.c[i]) > tol) return false;
  return true;
}

// The even combination b+. a-. {b+a-} - a+. b-. {a+b-} entering every
// transfer matrix eigenvalue; it squares to zero and is central.
inline AlgebraElement grassmann_G(cplx amp_ap, cplx amp_bp, cplx amp_am,
                                  cplx amp_bm) {
  AlgebraElement g;
  g[Mono::bp_am] = amp_bp * amp_am;
  g[Mono::ap_bm] = -(amp_ap * amp_bm);
  return g;
}

// JSON object mapping monomial keys ("1", "a+", ..., "b+b-") to [re, im].
std::string to_json_string(const AlgebraElement& x);
AlgebraElement algebra_from_json_string(const std::string& s);
const char* mono_name(Mono m);

}  // namespace polaron
