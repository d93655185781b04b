#include "noisydro/utility.hpp"
#include "noisydro/errors.hpp"

#include <cmath>

namespace noisydro {

double shifted_snr_value(double w, double x) {
    return 1.0 + w * x;
}

double shifted_snr_dw(double w, double x) {
    (void)w;
    return x;
}

void FairnessUtility::validate() const {
    if (!(alpha >= 0.0)) throw invalid_input_error("FairnessUtility: alpha must be >= 0");
    if (!(alpha_tol > 0.0)) throw invalid_input_error("FairnessUtility: alpha_tol must be > 0");
    if (n == 0) throw invalid_input_error("FairnessUtility: n must be >= 1");
    if (entity.value == nullptr || entity.dw == nullptr)
        throw invalid_input_error("FairnessUtility: entity utility hooks must be set");
}

void Allocation::validate() const {
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw invalid_input_error("Allocation: negative weight");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw invalid_input_error("Allocation: weights do not sum to 1");
}

Allocation make_allocation(std::vector<double> w) {
    Allocation a{std::move(w)};
    a.validate();
    return a;
}

double aggregate_utility(const FairnessUtility& u, std::span<const double> w,
                         std::span<const double> x) {
    if (w.size() != x.size() || w.size() != u.n)
        throw invalid_input_error("aggregate_utility: dimension mismatch");
    const bool log_branch = std::abs(u.alpha - 1.0) <= u.alpha_tol;
    const bool shifted = u.uses_shifted_snr();
    double total = 0.0;
    for (std::size_t i = 0; i < u.n; ++i) {
        // log1p keeps the default u_i = 1 + w x exact near zero; custom
        // entity utilities go through plain log.
        double lg;
        if (shifted) {
            const double wx = w[i] * x[i];
            if (!(1.0 + wx > 0.0))
                throw utility_domain_error("aggregate_utility: entity utility <= 0");
            lg = std::log1p(wx);
        } else {
            const double ui = u.entity.value(w[i], x[i]);
            if (!(ui > 0.0))
                throw utility_domain_error("aggregate_utility: entity utility <= 0");
            lg = std::log(ui);
        }
        if (log_branch) {
            total += lg;
        } else {
            // expm1((1-alpha) log u_i) / (1-alpha) avoids both cancellation
            // near alpha = 1 and underflow at large alpha.
            total += std::expm1((1.0 - u.alpha) * lg) / (1.0 - u.alpha);
        }
    }
    return total;
}

double aggregate_utility(const FairnessUtility& u, const Allocation& w,
                         const std::vector<double>& x) {
    return aggregate_utility(u, std::span<const double>(w.w), std::span<const double>(x));
}

void utility_gradient(const FairnessUtility& u, std::span<const double> w,
                      std::span<const double> x, std::span<double> out) {
    if (w.size() != x.size() || w.size() != u.n || out.size() != u.n)
        throw invalid_input_error("utility_gradient: dimension mismatch");
    const bool shifted = u.uses_shifted_snr();
    // component i: du_i/dw_i * u_i^(-alpha), identical across both branches
    for (std::size_t i = 0; i < u.n; ++i) {
        if (shifted) {
            const double wx = w[i] * x[i];
            if (!(1.0 + wx > 0.0))
                throw utility_domain_error("utility_gradient: entity utility <= 0");
            out[i] = x[i] * std::exp(-u.alpha * std::log1p(wx));
        } else {
            const double ui = u.entity.value(w[i], x[i]);
            if (!(ui > 0.0))
                throw utility_domain_error("utility_gradient: entity utility <= 0");
            out[i] = u.entity.dw(w[i], x[i]) * std::exp(-u.alpha * std::log(ui));
        }
    }
}

std::vector<double> utility_gradient(const FairnessUtility& u, const Allocation& w,
                                     const std::vector<double>& x) {
    std::vector<double> out(u.n);
    utility_gradient(u, std::span<const double>(w.w), std::span<const double>(x),
                     std::span<double>(out));
    return out;
}

} // namespace noisydro
