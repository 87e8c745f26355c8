#pragma once

#include <cstdint>
#include <string_view>

#include "cp2d/pdmodel.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d {

/// ∂/∂θ of the partition log-likelihood.
double grad_theta(double alpha, double theta, std::uint64_t n, std::uint64_t k);

/// ∂/∂α of the partition log-likelihood. The multiplicity term enters as
/// Σ_i r_i [ψ(1-α) - ψ(i-α)], the sign obtained by differentiating the
/// (1-α)_{i-1} factors directly.
double grad_alpha(double alpha, double theta, std::uint64_t k, const MultiplicitySpectrum& spectrum);

/// Second derivatives of the partition log-likelihood in (α, θ).
struct PartitionHessian {
    double aa = 0.0;
    double at = 0.0;
    double tt = 0.0;
};

PartitionHessian partition_hessian(double alpha, double theta, std::uint64_t n, std::uint64_t k,
                                   const MultiplicitySpectrum& spectrum);

/// newton: projected Newton ascent with backtracking, started from the same
/// point and confined to the same admissible region as the momentum rule.
/// momentum: the first-order rule with bisection on sign flips and domain
/// resets, driven by alpha_step, theta_step and eta.
enum class OptimizerMethod { newton, momentum };

OptimizerMethod parse_optimizer_method(std::string_view name);
std::string_view to_string(OptimizerMethod method);

struct OptimizerSettings {
    OptimizerMethod method = OptimizerMethod::newton;
    double alpha0 = 0.3;
    double alpha_step = 1e-4;  // I_alpha
    double theta_step = 1.0;   // I_theta
    double eta = 0.9;          // momentum retention
    double tolerance = 1e-7;   // on the gradient norm
    std::uint64_t max_iterations = 100000;
    int max_corrections = 50;
};

struct OptimizerState {
    double alpha = 0.3;
    double theta = 1.0;
    double v_alpha = 0.0;
    double v_theta = 0.0;
    double eta = 0.9;
    double step_alpha = 1e-4;
    double step_theta = 1.0;
    int correction_count = 0;
};

struct FitReport {
    AuthorParams params;
    bool converged = false;
    std::uint64_t iterations = 0;
    double final_gradient_norm = 0.0;
    int resets_used = 0;
    bool at_boundary = false;  // stopped on the admissible-region border
};

/// Maximize the partition likelihood of the spectrum over (α, θ).
/// Always returns a report; `converged` is false when the iteration cap or
/// the correction cap ended the search.
FitReport fit_author(const MultiplicitySpectrum& spectrum, const OptimizerSettings& settings = {});

inline FitReport fit_author(const CountTable& counts, const OptimizerSettings& settings = {}) {
    return fit_author(multiplicity_spectrum(counts), settings);
}

}  // namespace cp2d
