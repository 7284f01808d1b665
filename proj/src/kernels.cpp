#include "erl/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "erl/error.hpp"

namespace erl::kernels {

namespace scalar {

void weighted_abs_sum(const AbsTerm* terms, std::size_t nterms, double offset, const double* xs,
                      std::size_t n, double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = offset;
    for (std::size_t k = 0; k < nterms; ++k) {
      const double r = terms[k].slope * xs[j] - terms[k].center;
      acc += terms[k].weight * std::fabs(r);
    }
    out[j] = acc;
  }
}

void add_min_select(const double* f, const double* a, const std::int32_t* ia, const double* b,
                    const std::int32_t* ib, std::size_t n, double* out, std::int32_t* arg) {
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = a[i] <= b[i];
    out[i] = f[i] + (left ? a[i] : b[i]);
    arg[i] = left ? ia[i] : ib[i];
  }
}

void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out) {
  for (int r = 0; r < rows; ++r) out[r] = bias[r];
  for (int c = 0; c < cols; ++c) {
    const double xc = x[c];
    const double* col = w + static_cast<std::ptrdiff_t>(c) * rows;
    for (int r = 0; r < rows; ++r) out[r] += col[r] * xc;
  }
  if (relu) {
    for (int r = 0; r < rows; ++r) out[r] = out[r] > 0.0 ? out[r] : 0.0;
  }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(ERL_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("ERL_ISA")) {
    if (std::string_view(env) == "scalar") return Isa::kScalar;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

void check_sizes(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) throw DimensionError(std::string("kernel ") + what + ": span size mismatch");
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool avx2_available() { return cpu_has_avx2(); }

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2_available()) throw UnsupportedError("AVX2 kernels unavailable on this CPU/build");
  isa_slot().store(isa, std::memory_order_relaxed);
}

void weighted_abs_sum(std::span<const AbsTerm> terms, double offset, std::span<const double> xs,
                      std::span<double> out) {
  check_sizes(xs.size(), out.size(), "weighted_abs_sum");
#if defined(ERL_HAVE_AVX2_TU)
  if (active_isa() == Isa::kAvx2) {
    avx2::weighted_abs_sum(terms.data(), terms.size(), offset, xs.data(), xs.size(), out.data());
    return;
  }
#endif
  scalar::weighted_abs_sum(terms.data(), terms.size(), offset, xs.data(), xs.size(), out.data());
}

void add_min_select(std::span<const double> f, std::span<const double> a,
                    std::span<const std::int32_t> ia, std::span<const double> b,
                    std::span<const std::int32_t> ib, std::span<double> out,
                    std::span<std::int32_t> arg) {
  const auto n = f.size();
  check_sizes(n, a.size(), "add_min_select");
  check_sizes(n, ia.size(), "add_min_select");
  check_sizes(n, b.size(), "add_min_select");
  check_sizes(n, ib.size(), "add_min_select");
  check_sizes(n, out.size(), "add_min_select");
  check_sizes(n, arg.size(), "add_min_select");
#if defined(ERL_HAVE_AVX2_TU)
  if (active_isa() == Isa::kAvx2) {
    avx2::add_min_select(f.data(), a.data(), ia.data(), b.data(), ib.data(), n, out.data(), arg.data());
    return;
  }
#endif
  scalar::add_min_select(f.data(), a.data(), ia.data(), b.data(), ib.data(), n, out.data(), arg.data());
}

void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out) {
#if defined(ERL_HAVE_AVX2_TU)
  if (active_isa() == Isa::kAvx2) {
    avx2::dense_affine(w, rows, cols, x, bias, relu, out);
    return;
  }
#endif
  scalar::dense_affine(w, rows, cols, x, bias, relu, out);
}

}  // namespace erl::kernels
