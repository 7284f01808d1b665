// AVX2 variants of the kernels in kernels.cpp. Built with -mavx2 and
// -ffp-contract=off; keep Eigen out of this translation unit.
#include "erl/kernels.hpp"

#if defined(ERL_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>

namespace erl::kernels::avx2 {

void weighted_abs_sum(const AbsTerm* terms, std::size_t nterms, double offset, const double* xs,
                      std::size_t n, double* out) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d voff = _mm256_set1_pd(offset);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d x = _mm256_loadu_pd(xs + j);
    __m256d acc = voff;
    for (std::size_t k = 0; k < nterms; ++k) {
      const __m256d r = _mm256_sub_pd(_mm256_mul_pd(_mm256_set1_pd(terms[k].slope), x),
                                      _mm256_set1_pd(terms[k].center));
      const __m256d a = _mm256_andnot_pd(sign_mask, r);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(terms[k].weight), a));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = offset;
    for (std::size_t k = 0; k < nterms; ++k) {
      acc += terms[k].weight * std::fabs(terms[k].slope * xs[j] - terms[k].center);
    }
    out[j] = acc;
  }
}

void add_min_select(const double* f, const double* a, const std::int32_t* ia, const double* b,
                    const std::int32_t* ib, std::size_t n, double* out, std::int32_t* arg) {
  // Gathers the low 32 bits of each 64-bit mask lane into a 128-bit int mask.
  const __m256i pick = _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d le = _mm256_cmp_pd(va, vb, _CMP_LE_OQ);
    const __m256d m = _mm256_blendv_pd(vb, va, le);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(f + i), m));
    const __m128i mask32 =
        _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(_mm256_castpd_si256(le), pick));
    const __m128i via = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + i));
    const __m128i vib = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + i));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(arg + i), _mm_blendv_epi8(vib, via, mask32));
  }
  for (; i < n; ++i) {
    const bool left = a[i] <= b[i];
    out[i] = f[i] + (left ? a[i] : b[i]);
    arg[i] = left ? ia[i] : ib[i];
  }
}

void dense_affine(const double* w, int rows, int cols, const double* x, const double* bias, bool relu,
                  double* out) {
  const __m256d zero = _mm256_setzero_pd();
  int r = 0;
  for (; r + 4 <= rows; r += 4) {
    __m256d acc = _mm256_loadu_pd(bias + r);
    for (int c = 0; c < cols; ++c) {
      const __m256d col = _mm256_loadu_pd(w + static_cast<std::ptrdiff_t>(c) * rows + r);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[c])));
    }
    if (relu) acc = _mm256_max_pd(acc, zero);
    _mm256_storeu_pd(out + r, acc);
  }
  for (; r < rows; ++r) {
    double acc = bias[r];
    for (int c = 0; c < cols; ++c) acc += w[static_cast<std::ptrdiff_t>(c) * rows + r] * x[c];
    out[r] = relu ? (acc > 0.0 ? acc : 0.0) : acc;
  }
}

}  // namespace erl::kernels::avx2

#endif  // ERL_HAVE_AVX2_TU
