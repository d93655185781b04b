#pragma once
#include "noisydro/rng.hpp"
#include "noisydro/support.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace noisydro {

enum class NoiseFamily { Dirac, Uniform, TruncatedNormal, Softmax, Bernoulli, Binomial, Poisson };

const char* noise_family_name(NoiseFamily f);

// Family-specific parameters; unused fields stay at their defaults.
struct KernelParams {
    double a = 0.0;            // lower support bound, or step size for the counting families
    double b = 0.0;            // upper support bound
    double mu = 0.0;           // truncated normal mean
    double sigma = 0.0;        // truncated normal stddev
    double p = 0.0;            // Bernoulli/Binomial success probability
    int m = 0;                 // Binomial trial count
    double lambda_rate = 0.0;  // Poisson rate
    int k_max = 0;             // recorded Poisson truncation point
    double diam = 0.0;         // softmax normalizer diam(X)
    int levels = 0;            // per-dimension grid cardinality for continuous families
};

// Discrete additive noise kernel O(.|x): a finite offset set E with a pmf.
// Noise is i.i.d. across dimensions, so offsets form a product grid and the
// pmf is the product of per-dimension masses.
struct NoiseKernel {
    NoiseFamily family = NoiseFamily::Dirac;
    std::vector<std::vector<double>> offsets; // distinct, lexicographically sorted
    std::vector<double> probs;                // nonnegative, sums to 1 within 1e-12
    std::size_t dim = 0;
    KernelParams params;

    std::size_t size() const { return offsets.size(); }
    void validate() const;
};

struct KernelBias {
    std::vector<double> bias_vector;
    double bias_norm = 0.0; // l1 norm of bias_vector
};

NoiseKernel make_dirac(std::size_t dim);

// Uniform pmf over a `levels`-point grid per dimension on [a, b]^dim.
// levels == 1 collapses to the single offset (a+b)/2.
NoiseKernel make_uniform(double a, double b, int levels, std::size_t dim);

// Normal density discretized on the [a, b]^dim grid and renormalized.
NoiseKernel make_truncated_normal(double mu, double sigma, double a, double b,
                                  int levels, std::size_t dim);

// probs proportional to exp(||e||_1 / diam) over the [a, b]^dim grid.
NoiseKernel make_softmax(double a, double b, int levels, std::size_t dim, double diam);

// Per-dimension pmf over {0, a}: P(a) = p.
NoiseKernel make_bernoulli(double p, double a, std::size_t dim);

// Per-dimension pmf over {0, a, ..., m*a}: C(m,k) p^k (1-p)^(m-k).
NoiseKernel make_binomial(double p, int m, double a, std::size_t dim);

// Per-dimension pmf over {0, a, ..., k_max*a}: exp(-rate) rate^k / k!,
// renormalized after truncation at k_max.
NoiseKernel make_poisson(double lambda_rate, double a, int k_max, std::size_t dim);

// Same pmf with every offset translated by `shift`. Used to center a kernel
// or to impose a known bias.
NoiseKernel shift_kernel(const NoiseKernel& k, const std::vector<double>& shift);

// Mean-preserving variant: offsets shifted by minus the kernel mean.
NoiseKernel recenter(const NoiseKernel& k);

// sum_e probs(e) * ||x + e - xhat||_1.
double expected_transport_cost(const NoiseKernel& k, const std::vector<double>& x,
                               const std::vector<double>& xhat);

// Mean offset and its l1 norm (the bias delta).
KernelBias kernel_mean(const NoiseKernel& k);

// Deduplicated sorted set {x + e : x in grid, e in offsets}.
SupportGrid noisy_support(const NoiseKernel& k, const SupportGrid& grid);

// Draws one offset with its pmf probability; deterministic given rng state.
std::vector<double> sample_noise(const NoiseKernel& k, Rng& rng);

} // namespace noisydro
