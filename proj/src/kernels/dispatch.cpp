#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "powerlab/kernels.hpp"

namespace powerlab::kernels {
namespace {

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &scalar::table();
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (__builtin_cpu_supports("avx2")) return &avx2::table();
#endif
      return nullptr;
    case Backend::Neon:
#if defined(__aarch64__)
      return &neon::table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* forced = std::getenv("POWERLAB_KERNELS")) {
    const KernelTable* t = table_for(parse_backend(forced));
    if (t == nullptr) {
      throw std::invalid_argument(std::string("POWERLAB_KERNELS: backend not supported: ") +
                                  forced);
    }
    return t;
  }
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (const KernelTable* t = table_for(b)) return t;
  }
  return &scalar::table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool backend_supported(Backend backend) { return table_for(backend) != nullptr; }

void select_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (t == nullptr) {
    throw std::invalid_argument("kernel backend not supported on this CPU: " +
                                std::string(backend_name(backend)));
  }
  slot().store(t, std::memory_order_release);
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

}  // namespace powerlab::kernels
