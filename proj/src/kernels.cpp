#include "varlab/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace varlab::kernels {

#if VARLAB_HAVE_AVX2
const Table& avx2_table();
#endif

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if VARLAB_HAVE_AVX2
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  if (!available(isa)) throw std::invalid_argument("kernels: ISA not available on this CPU");
#if VARLAB_HAVE_AVX2
  if (isa == Isa::avx2) return avx2_table();
#endif
  return scalar_table();
}

const Table& active() {
  static const Table& chosen = [] () -> const Table& {
    const char* env = std::getenv("VARLAB_ISA");
    if (env != nullptr && std::string(env) == "scalar") return scalar_table();
    if (available(Isa::avx2)) return table(Isa::avx2);
    return scalar_table();
  }();
  return chosen;
}

std::string_view name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace varlab::kernels
