// Built with -mavx2 (and never -mfma): the vector bodies must round exactly
// like the scalar reference.

#include <esaccel/kernels.hpp>

#include "kernel_math.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace esaccel::kernels::avx2 {

#if defined(__AVX2__)

namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) noexcept {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline __m256d max_abs4(__m256d a, __m256d b, __m256d c, __m256d d) noexcept {
    return _mm256_max_pd(_mm256_max_pd(abs_pd(a), abs_pd(b)), _mm256_max_pd(abs_pd(c), abs_pd(d)));
}

inline __m256d max_abs3(__m256d a, __m256d b, __m256d c) noexcept {
    return _mm256_max_pd(_mm256_max_pd(abs_pd(a), abs_pd(b)), abs_pd(c));
}

inline __m256d nan_pd() noexcept { return _mm256_set1_pd(detail::kNaN); }

// Lanes where |den| > tol keep num / den, the rest become NaN. A NaN
// denominator compares false and is rejected as well.
inline __m256d guarded_div(__m256d num, __m256d den, __m256d tol) noexcept {
    const __m256d ok = _mm256_cmp_pd(abs_pd(den), tol, _CMP_GT_OQ);
    return _mm256_blendv_pd(nan_pd(), _mm256_div_pd(num, den), ok);
}

inline __m256d l_basic(__m256d x0, __m256d x1, __m256d x2, __m256d theta) noexcept {
    const __m256d tol = _mm256_mul_pd(_mm256_set1_pd(kDegeneracyTolerance), max_abs3(x0, x1, x2));
    const __m256d d01 = _mm256_sub_pd(x0, x1);
    const __m256d d12 = _mm256_sub_pd(x1, x2);
    const __m256d den = _mm256_sub_pd(d01, _mm256_mul_pd(theta, d12));
    const __m256d corr = _mm256_mul_pd(_mm256_mul_pd(theta, _mm256_sub_pd(x2, x1)), _mm256_sub_pd(x0, x2));
    return _mm256_add_pd(x2, guarded_div(corr, den, tol));
}

inline __m256d l_drift_zeroth(__m256d h0, __m256d h1, __m256d h2, __m256d growth) noexcept {
    const __m256d tol = _mm256_mul_pd(_mm256_set1_pd(kDegeneracyTolerance), max_abs3(h0, h1, h2));
    const __m256d d01 = _mm256_sub_pd(h0, h1);
    const __m256d d12 = _mm256_sub_pd(h1, h2);
    const __m256d den = _mm256_sub_pd(d12, _mm256_mul_pd(growth, d01));
    const __m256d corr = _mm256_mul_pd(d12, _mm256_sub_pd(h0, h2));
    return _mm256_add_pd(h2, guarded_div(corr, den, tol));
}

}  // namespace

bool compiled() noexcept { return true; }

void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out) {
    const std::size_t n = in.x0.size();
    const __m256d upper = _mm256_set1_pd(kGUpper);
    const __m256d lower = _mm256_set1_pd(kGLower);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d four = _mm256_set1_pd(4.0);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d x0 = _mm256_loadu_pd(in.x0.data() + i);
        const __m256d x1 = _mm256_loadu_pd(in.x1.data() + i);
        const __m256d x2 = _mm256_loadu_pd(in.x2.data() + i);
        const __m256d x3 = _mm256_loadu_pd(in.x3.data() + i);

        // cross ratio with degeneracy guard
        const __m256d tol = _mm256_mul_pd(_mm256_set1_pd(kDegeneracyTolerance),
                                          max_abs4(x0, x1, x2, x3));
        const __m256d d12 = _mm256_sub_pd(x1, x2);
        const __m256d d03 = _mm256_sub_pd(x0, x3);
        const __m256d nondegenerate =
            _mm256_and_pd(_mm256_cmp_pd(abs_pd(d12), tol, _CMP_GT_OQ),
                          _mm256_cmp_pd(abs_pd(d03), tol, _CMP_GT_OQ));
        const __m256d raw = _mm256_div_pd(
            _mm256_mul_pd(_mm256_sub_pd(x0, x1), _mm256_sub_pd(x2, x3)), _mm256_mul_pd(d12, d03));
        const __m256d above = _mm256_and_pd(_mm256_cmp_pd(raw, upper, _CMP_GT_OQ), nondegenerate);
        const __m256d below = _mm256_and_pd(_mm256_cmp_pd(raw, lower, _CMP_LT_OQ), nondegenerate);
        __m256d g = _mm256_blendv_pd(nan_pd(), raw, nondegenerate);
        g = _mm256_blendv_pd(g, upper, above);
        g = _mm256_blendv_pd(g, lower, below);
        const __m256d clamped = _mm256_or_pd(above, below);

        // theta, minus branch
        const __m256d two_g = _mm256_mul_pd(two, g);
        const __m256d gm1 = _mm256_sub_pd(g, one);
        const __m256d disc =
            _mm256_sub_pd(_mm256_mul_pd(gm1, gm1), _mm256_mul_pd(_mm256_mul_pd(four, g), g));
        const __m256d admissible = _mm256_andnot_pd(
            clamped, _mm256_and_pd(_mm256_and_pd(_mm256_cmp_pd(g, zero, _CMP_NEQ_OQ),
                                                 _mm256_cmp_pd(g, upper, _CMP_LT_OQ)),
                                   _mm256_cmp_pd(disc, zero, _CMP_GE_OQ)));
        const __m256d root = _mm256_sqrt_pd(_mm256_max_pd(disc, zero));
        const __m256d theta_raw = _mm256_sub_pd(_mm256_div_pd(_mm256_sub_pd(one, g), two_g),
                                                _mm256_div_pd(root, two_g));
        const __m256d in_range = _mm256_and_pd(_mm256_cmp_pd(theta_raw, zero, _CMP_GT_OQ),
                                               _mm256_cmp_pd(theta_raw, one, _CMP_LT_OQ));
        const __m256d theta = _mm256_blendv_pd(nan_pd(), theta_raw, _mm256_and_pd(admissible, in_range));

        _mm256_storeu_pd(out.g.data() + i, g);
        _mm256_storeu_pd(out.theta.data() + i, theta);
        _mm256_storeu_pd(out.l.data() + i, l_basic(x0, x1, x2, theta));
        const int mask = _mm256_movemask_pd(clamped);
        for (std::size_t k = 0; k < kLanes; ++k) {
            out.clamped[i + k] = static_cast<std::uint8_t>((mask >> k) & 1);
        }
    }
    for (; i < n; ++i) {
        const auto gr = detail::cross_ratio(in.x0[i], in.x1[i], in.x2[i], in.x3[i]);
        out.g[i] = gr.g;
        out.clamped[i] = gr.clamped ? 1 : 0;
        const double theta = gr.clamped ? detail::kNaN : detail::theta_from_g(gr.g);
        out.theta[i] = theta;
        out.l[i] = detail::l_basic(in.x0[i], in.x1[i], in.x2[i], theta);
    }
}

void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l) {
    const std::size_t n = x0.size();
    const __m256d th = _mm256_set1_pd(theta);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = l_basic(_mm256_loadu_pd(x0.data() + i), _mm256_loadu_pd(x1.data() + i),
                                  _mm256_loadu_pd(x2.data() + i), th);
        _mm256_storeu_pd(l.data() + i, v);
    }
    for (; i < n; ++i) l[i] = detail::l_basic(x0[i], x1[i], x2[i], theta);
}

void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l) {
    const std::size_t n = h0.size();
    const __m256d a = _mm256_set1_pd(growth);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = l_drift_zeroth(_mm256_loadu_pd(h0.data() + i), _mm256_loadu_pd(h1.data() + i),
                                         _mm256_loadu_pd(h2.data() + i), a);
        _mm256_storeu_pd(l.data() + i, v);
    }
    for (; i < n; ++i) l[i] = detail::l_drift_zeroth(h0[i], h1[i], h2[i], growth);
}

#else  // no AVX2 code generation on this target

bool compiled() noexcept { return false; }

void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out) {
    scalar::extract_basic(in, out);
}
void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l) {
    scalar::extract_l_fixed_theta(x0, x1, x2, theta, l);
}
void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l) {
    scalar::extract_drift_zeroth(h0, h1, h2, growth, l);
}

#endif

}  // namespace esaccel::kernels::avx2
