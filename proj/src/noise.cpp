#include "noisydro/noise.hpp"
#include "noisydro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noisydro {

const char* noise_family_name(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::Dirac: return "dirac";
        case NoiseFamily::Uniform: return "uniform";
        case NoiseFamily::TruncatedNormal: return "truncated_normal";
        case NoiseFamily::Softmax: return "softmax";
        case NoiseFamily::Bernoulli: return "bernoulli";
        case NoiseFamily::Binomial: return "binomial";
        case NoiseFamily::Poisson: return "poisson";
    }
    return "?";
}

void NoiseKernel::validate() const {
    if (offsets.empty() || offsets.size() != probs.size())
        throw invalid_input_error("NoiseKernel: offsets/probs size mismatch");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw invalid_input_error("NoiseKernel: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw invalid_input_error("NoiseKernel: probabilities do not sum to 1");
    for (const auto& e : offsets)
        if (e.size() != dim) throw invalid_input_error("NoiseKernel: offset dimension mismatch");
    auto sorted = offsets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw invalid_input_error("NoiseKernel: duplicate offsets");
    if (family == NoiseFamily::Dirac) {
        if (offsets.size() != 1 || probs[0] != 1.0)
            throw invalid_input_error("NoiseKernel: Dirac must be a unit mass at one offset");
        for (double v : offsets[0])
            if (v != 0.0) throw invalid_input_error("NoiseKernel: Dirac offset must be zero");
    }
}

namespace {

// Expands per-dimension (values, weights) into the product kernel; weights
// are renormalized over the whole offset set.
NoiseKernel product_kernel(NoiseFamily family, std::size_t dim,
                           const std::vector<double>& axis_values,
                           const std::vector<double>& axis_weights,
                           KernelParams params) {
    NoiseKernel k;
    k.family = family;
    k.dim = dim;
    k.params = params;

    const std::size_t levels = axis_values.size();
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> e(dim);
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            e[i] = axis_values[idx[i]];
            w *= axis_weights[idx[i]];
        }
        k.offsets.push_back(e);
        k.probs.push_back(w);
        std::size_t d = dim;
        bool done = true;
        while (d > 0) {
            --d;
            if (++idx[d] < levels) { done = false; break; }
            idx[d] = 0;
        }
        if (done) break;
    }

    const double total = std::accumulate(k.probs.begin(), k.probs.end(), 0.0);
    if (!(total > 0.0)) throw invalid_input_error("noise kernel: zero total mass");
    for (auto& p : k.probs) p /= total;
    k.validate();
    return k;
}

std::vector<double> uniform_axis(double a, double b, int levels) {
    if (levels < 1) throw invalid_input_error("noise kernel: levels must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(levels));
    if (levels == 1) {
        v[0] = 0.5 * (a + b);
    } else {
        for (int l = 0; l < levels; ++l)
            v[static_cast<std::size_t>(l)] = a + (b - a) * static_cast<double>(l) / (levels - 1);
    }
    return v;
}

void check_support_bounds(double a, double b) {
    if (!(a > -1.0)) throw invalid_bounds_error("noise kernel: need a > -1");
    if (!(a < b)) throw invalid_bounds_error("noise kernel: need a < b");
}

} // namespace

NoiseKernel make_dirac(std::size_t dim) {
    NoiseKernel k;
    k.family = NoiseFamily::Dirac;
    k.dim = dim;
    k.offsets = {std::vector<double>(dim, 0.0)};
    k.probs = {1.0};
    k.validate();
    return k;
}

NoiseKernel make_uniform(double a, double b, int levels, std::size_t dim) {
    check_support_bounds(a, b);
    const auto axis = uniform_axis(a, b, levels);
    const std::vector<double> weights(axis.size(), 1.0);
    KernelParams params;
    params.a = a;
    params.b = b;
    params.levels = levels;
    return product_kernel(NoiseFamily::Uniform, dim, axis, weights, params);
}

NoiseKernel make_truncated_normal(double mu, double sigma, double a, double b,
                                  int levels, std::size_t dim) {
    if (!(sigma > 0.0)) throw invalid_input_error("truncated normal: sigma must be > 0");
    check_support_bounds(a, b);
    const auto axis = uniform_axis(a, b, levels);
    std::vector<double> weights(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double z = (axis[i] - mu) / sigma;
        weights[i] = std::exp(-0.5 * z * z);
    }
    KernelParams params;
    params.a = a;
    params.b = b;
    params.mu = mu;
    params.sigma = sigma;
    params.levels = levels;
    return product_kernel(NoiseFamily::TruncatedNormal, dim, axis, weights, params);
}

NoiseKernel make_softmax(double a, double b, int levels, std::size_t dim, double diam) {
    if (!(diam > 0.0)) throw invalid_input_error("softmax kernel: diam must be > 0");
    check_support_bounds(a, b);
    const auto axis = uniform_axis(a, b, levels);
    // exp(||e||_1 / diam) factorizes over dimensions on a product grid.
    std::vector<double> weights(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i)
        weights[i] = std::exp(std::abs(axis[i]) / diam);
    KernelParams params;
    params.a = a;
    params.b = b;
    params.diam = diam;
    params.levels = levels;
    return product_kernel(NoiseFamily::Softmax, dim, axis, weights, params);
}

NoiseKernel make_bernoulli(double p, double a, std::size_t dim) {
    if (!(p >= 0.0 && p <= 1.0)) throw invalid_input_error("bernoulli kernel: p outside [0, 1]");
    if (!(a >= 0.0)) throw invalid_input_error("bernoulli kernel: a must be >= 0");
    KernelParams params;
    params.a = a;
    params.p = p;
    if (a == 0.0)
        return product_kernel(NoiseFamily::Bernoulli, dim, {0.0}, {1.0}, params);
    return product_kernel(NoiseFamily::Bernoulli, dim, {0.0, a}, {1.0 - p, p}, params);
}

NoiseKernel make_binomial(double p, int m, double a, std::size_t dim) {
    if (!(p >= 0.0 && p <= 1.0)) throw invalid_input_error("binomial kernel: p outside [0, 1]");
    if (m < 1) throw invalid_input_error("binomial kernel: m must be >= 1");
    if (!(a >= 0.0)) throw invalid_input_error("binomial kernel: a must be >= 0");
    std::vector<double> values, weights;
    // Pascal-row binomial coefficients; m stays small so this is exact.
    double coeff = 1.0;
    for (int kk = 0; kk <= m; ++kk) {
        values.push_back(static_cast<double>(kk) * a);
        weights.push_back(coeff * std::pow(p, kk) * std::pow(1.0 - p, m - kk));
        coeff = coeff * static_cast<double>(m - kk) / static_cast<double>(kk + 1);
    }
    KernelParams params;
    params.a = a;
    params.p = p;
    params.m = m;
    if (a == 0.0) return product_kernel(NoiseFamily::Binomial, dim, {0.0}, {1.0}, params);
    return product_kernel(NoiseFamily::Binomial, dim, values, weights, params);
}

NoiseKernel make_poisson(double lambda_rate, double a, int k_max, std::size_t dim) {
    if (!(lambda_rate > 0.0)) throw invalid_input_error("poisson kernel: rate must be > 0");
    if (!(a >= 0.0)) throw invalid_input_error("poisson kernel: a must be >= 0");
    if (k_max < 0) throw invalid_input_error("poisson kernel: k_max must be >= 0");
    std::vector<double> values, weights;
    double term = std::exp(-lambda_rate); // k = 0
    for (int kk = 0; kk <= k_max; ++kk) {
        values.push_back(static_cast<double>(kk) * a);
        weights.push_back(term);
        term *= lambda_rate / static_cast<double>(kk + 1);
    }
    KernelParams params;
    params.a = a;
    params.lambda_rate = lambda_rate;
    params.k_max = k_max;
    if (a == 0.0) return product_kernel(NoiseFamily::Poisson, dim, {0.0}, {1.0}, params);
    // Renormalization (rather than folding tail mass into k_max) keeps the
    // pmf shape of the untruncated distribution.
    return product_kernel(NoiseFamily::Poisson, dim, values, weights, params);
}

NoiseKernel shift_kernel(const NoiseKernel& k, const std::vector<double>& shift) {
    if (shift.size() != k.dim) throw invalid_input_error("shift_kernel: dimension mismatch");
    NoiseKernel out = k;
    bool moved = false;
    for (auto& e : out.offsets)
        for (std::size_t i = 0; i < k.dim; ++i) {
            e[i] += shift[i];
            moved = moved || shift[i] != 0.0;
        }
    // A displaced point mass no longer satisfies the Dirac invariant; it is
    // the same object as a one-level uniform kernel.
    if (moved && out.family == NoiseFamily::Dirac) out.family = NoiseFamily::Uniform;
    out.validate();
    return out;
}

NoiseKernel recenter(const NoiseKernel& k) {
    const auto bias = kernel_mean(k);
    std::vector<double> shift(k.dim);
    for (std::size_t i = 0; i < k.dim; ++i) shift[i] = -bias.bias_vector[i];
    return shift_kernel(k, shift);
}

double expected_transport_cost(const NoiseKernel& k, const std::vector<double>& x,
                               const std::vector<double>& xhat) {
    if (x.size() != k.dim || xhat.size() != k.dim)
        throw invalid_input_error("expected_transport_cost: dimension mismatch");
    double total = 0.0;
    for (std::size_t e = 0; e < k.offsets.size(); ++e) {
        double dist = 0.0;
        for (std::size_t i = 0; i < k.dim; ++i)
            dist += std::abs(x[i] + k.offsets[e][i] - xhat[i]);
        total += k.probs[e] * dist;
    }
    return total;
}

KernelBias kernel_mean(const NoiseKernel& k) {
    KernelBias bias;
    bias.bias_vector.assign(k.dim, 0.0);
    for (std::size_t e = 0; e < k.offsets.size(); ++e)
        for (std::size_t i = 0; i < k.dim; ++i)
            bias.bias_vector[i] += k.probs[e] * k.offsets[e][i];
    bias.bias_norm = 0.0;
    for (double v : bias.bias_vector) bias.bias_norm += std::abs(v);
    return bias;
}

SupportGrid noisy_support(const NoiseKernel& k, const SupportGrid& grid) {
    if (k.dim != grid.dim) throw invalid_input_error("noisy_support: dimension mismatch");
    SupportGrid out;
    out.dim = grid.dim;
    out.points.reserve(grid.size() * k.size());
    std::vector<double> p(grid.dim);
    for (const auto& x : grid.points) {
        for (const auto& e : k.offsets) {
            for (std::size_t i = 0; i < grid.dim; ++i) p[i] = x[i] + e[i];
            out.points.push_back(p);
        }
    }
    std::sort(out.points.begin(), out.points.end());
    out.points.erase(std::unique(out.points.begin(), out.points.end()), out.points.end());
    out.lo.assign(out.dim, 0.0);
    out.hi.assign(out.dim, 0.0);
    for (std::size_t i = 0; i < out.dim; ++i) {
        double lo = out.points.front()[i], hi = lo;
        for (const auto& q : out.points) {
            lo = std::min(lo, q[i]);
            hi = std::max(hi, q[i]);
        }
        out.lo[i] = lo;
        out.hi[i] = hi;
    }
    out.validate();
    return out;
}

std::vector<double> sample_noise(const NoiseKernel& k, Rng& rng) {
    const double u = rng.next_u01();
    double cum = 0.0;
    for (std::size_t e = 0; e < k.offsets.size(); ++e) {
        cum += k.probs[e];
        if (u < cum) return k.offsets[e];
    }
    return k.offsets.back();
}

} // namespace noisydro
