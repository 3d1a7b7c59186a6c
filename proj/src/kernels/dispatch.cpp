#include <atomic>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace pothole::kernels {
namespace {

constexpr KernelTable kScalar{
    Isa::scalar,
    &scalar::sum3,
    &scalar::centered_moments,
    &scalar::road_residual_row,
    &scalar::quadratic_residuals,
    &scalar::count_inliers,
    &scalar::normal_sums,
};

#if defined(POTHOLE_HAVE_AVX2)
constexpr KernelTable kAvx2{
    Isa::avx2,
    &avx2::sum3,
    &avx2::centered_moments,
    &avx2::road_residual_row,
    &avx2::quadratic_residuals,
    &avx2::count_inliers,
    &avx2::normal_sums,
};
#endif

const KernelTable* initial_table() noexcept {
  if (std::getenv("POTHOLE_FORCE_SCALAR") != nullptr) return &kScalar;
  if (const KernelTable* t = table_for(Isa::avx2)) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return &kScalar;
    case Isa::avx2:
#if defined(POTHOLE_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
      return nullptr;
  }
  return nullptr;
}

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active().isa; }

bool select(Isa isa) noexcept {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace pothole::kernels
