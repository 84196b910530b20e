#include <esaccel/kernels.hpp>

#include "kernel_math.hpp"

namespace esaccel::kernels::scalar {

void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out) {
    const std::size_t n = in.x0.size();
    for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t i = 0; i < x0.size(); ++i) l[i] = detail::l_basic(x0[i], x1[i], x2[i], theta);
}

void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l) {
    for (std::size_t i = 0; i < h0.size(); ++i) {
        l[i] = detail::l_drift_zeroth(h0[i], h1[i], h2[i], growth);
    }
}

}  // namespace esaccel::kernels::scalar
