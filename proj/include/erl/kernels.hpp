#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant chosen at runtime. Both variants perform the same floating
// point operations in the same order, so results are bit-identical.
//
// Set ERL_ISA=scalar in the environment to pin the scalar path.

#include <cstdint>
#include <span>

namespace erl::kernels {

enum class Isa { kScalar, kAvx2 };

const char* isa_name(Isa isa);
bool avx2_available();
Isa active_isa();
// Throws UnsupportedError if the CPU (or build) lacks the requested ISA.
void set_isa(Isa isa);

// weight * |slope * x - center|
struct AbsTerm {
  double weight;
  double slope;
  double center;
};

// out[j] = offset + sum_k terms[k].weight * |terms[k].slope * xs[j] - terms[k].center|
// Terms are accumulated in order.
void weighted_abs_sum(std::span<const AbsTerm> terms, double offset, std::span<const double> xs,
                      std::span<double> out);

// out[i] = f[i] + min(a[i], b[i]); arg[i] = a[i] <= b[i] ? ia[i] : ib[i].
void add_min_select(std::span<const double> f, std::span<const double> a,
                    std::span<const std::int32_t> ia, std::span<const double> b,
                    std::span<const std::int32_t> ib, std::span<double> out,
                    std::span<std::int32_t> arg);

// out = W x + bias (optionally rectified). W is rows x cols, column-major.
void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out);

namespace scalar {
void weighted_abs_sum(const AbsTerm* terms, std::size_t nterms, double offset, const double* xs,
                      std::size_t n, double* out);
void add_min_select(const double* f, const double* a, const std::int32_t* ia, const double* b,
                    const std::int32_t* ib, std::size_t n, double* out, std::int32_t* arg);
void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out);
}  // namespace scalar

namespace avx2 {
void weighted_abs_sum(const AbsTerm* terms, std::size_t nterms, double offset, const double* xs,
                      std::size_t n, double* out);
void add_min_select(const double* f, const double* a, const std::int32_t* ia, const double* b,
                    const std::int32_t* ib, std::size_t n, double* out, std::int32_t* arg);
void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out);
}  // namespace avx2

}  // namespace erl::kernels
