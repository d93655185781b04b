#pragma once
#include <cstddef>
#include <span>
#include <vector>

namespace noisydro {

// Shifted-SNR entity utility u_i = 1 + w_i x_i and its w-derivative.
double shifted_snr_value(double w, double x);
double shifted_snr_dw(double w, double x);

// Per-entity inner utility; must stay positive on the problem domain. Only
// the shifted-SNR instance ships, but the hook accepts any smooth pair.
struct EntityUtility {
    double (*value)(double w, double x) = &shifted_snr_value;
    double (*dw)(double w, double x) = &shifted_snr_dw;
};

// Alpha-fairness aggregate utility over entity utilities. alpha = 0 is
// utilitarian, alpha = 1 proportional fairness, large alpha approaches
// max-min.
struct FairnessUtility {
    double alpha = 0.0;
    std::size_t n = 0;
    double alpha_tol = 1e-9; // switch width around alpha = 1 for the log branch
    EntityUtility entity{};

    bool uses_shifted_snr() const { return entity.value == &shifted_snr_value; }
    void validate() const;
};

// Point on the simplex {w >= 0, sum w = 1}.
struct Allocation {
    std::vector<double> w;

    std::size_t size() const { return w.size(); }
    void validate() const;
};

Allocation make_allocation(std::vector<double> w);

// sum_i U_i with U_i = ((1 + w_i x_i)^(1-alpha) - 1) / (1-alpha), or
// log(1 + w_i x_i) within alpha_tol of alpha = 1. Throws
// utility_domain_error when any 1 + w_i x_i <= 0.
double aggregate_utility(const FairnessUtility& u, std::span<const double> w,
                         std::span<const double> x);
double aggregate_utility(const FairnessUtility& u, const Allocation& w,
                         const std::vector<double>& x);

// Component i: x_i * (1 + w_i x_i)^(-alpha); consistent across both branches.
void utility_gradient(const FairnessUtility& u, std::span<const double> w,
                      std::span<const double> x, std::span<double> out);
std::vector<double> utility_gradient(const FairnessUtility& u, const Allocation& w,
                                     const std::vector<double>& x);

} // namespace noisydro
