#include "polaron/grassmann.hpp"

#include <json.hpp>

#include <stdexcept>

namespace polaron {

namespace {
constexpr std::array<const char*, kAlgebraDim> kMonoNames = {
    "1", "a+", "b+", "a-", "b-", "a+a-", "a+b-", "b+a-", "b+b-"};
}

const char* mono_name(Mono m) { return kMonoNames[static_cast<int>(m)]; }

std::string to_json_string(const AlgebraElement& x) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int i = 0; i < kAlgebraDim; ++i) {
    if (x.c[i] == 0.0) continue;
    j[kMonoNames[i]] = {x.c[i].real(), x.c[i].imag()};
  }
  return j.dump();
}

AlgebraElement algebra_from_json_string(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  AlgebraElement x;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int idx = -1;
    for (int i = 0; i < kAlgebraDim; ++i)
      if (it.key() == kMonoNames[i]) idx = i;
    if (idx < 0) throw std::invalid_argument("unknown monomial key: " + it.key());
    const auto& v = it.value();
    x.c[idx] = cplx(v.at(0).get<double>(), v.at(1).get<double>());
  }
  return x;
}

}  // namespace polaron
