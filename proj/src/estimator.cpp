#include "cp2d/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "cp2d/special.hpp"

namespace cp2d {

// Both gradients use the shifted forms ψ(θ/α + k) - ψ(θ/α + 1) and
// ψ(θ + n) - ψ(θ + 1), which agree with the textbook expressions for θ > 0 and
// remain defined for θ in (-α, 0].

double grad_theta(double alpha, double theta, std::uint64_t n, std::uint64_t k) {
    const double ratio = theta / alpha;
    return (digamma(ratio + static_cast<double>(k)) - digamma(ratio + 1.0)) / alpha -
           (digamma(theta + static_cast<double>(n)) - digamma(theta + 1.0));
}

double grad_alpha(double alpha, double theta, std::uint64_t k, const MultiplicitySpectrum& spectrum) {
    const double ratio = theta / alpha;
    double value = static_cast<double>(k - 1) / alpha -
                   theta / (alpha * alpha) *
                       (digamma(ratio + static_cast<double>(k)) - digamma(ratio + 1.0));
    const double psi_one = digamma(1.0 - alpha);
    for (const auto& [mult, count] : spectrum.r) {
        if (mult <= 1) continue;
        value += static_cast<double>(count) * (psi_one - digamma(static_cast<double>(mult) - alpha));
    }
    return value;
}

namespace {

constexpr double k_alpha_low_reset = 0.01;
constexpr double k_alpha_high_reset = 0.99;
constexpr double k_theta_reset_gap = 0.1;
constexpr double k_alpha_low_clamp = 0.001;
constexpr double k_alpha_high_clamp = 0.999;
constexpr double k_theta_clamp_gap = 0.01;
// Iterations without any parameter change before declaring a numerical fixed point.
constexpr int k_stall_limit = 64;

bool same_sign(double a, double b) { return (a > 0.0) == (b > 0.0); }

FitReport fit_momentum(const MultiplicitySpectrum& spectrum, const OptimizerSettings& settings) {
    const std::uint64_t k = spectrum.distinct();
    const std::uint64_t n = spectrum.total();

    OptimizerState s;
    s.alpha = settings.alpha0;
    s.theta = static_cast<double>(k);
    s.eta = settings.eta;
    s.step_alpha = settings.alpha_step;
    s.step_theta = settings.theta_step;

    FitReport report;
    bool have_prev = false;
    double prev_alpha = 0.0, prev_theta = 0.0, prev_ga = 0.0, prev_gt = 0.0;
    int stalled = 0;

    for (std::uint64_t iter = 0; iter < settings.max_iterations; ++iter) {
        report.iterations = iter + 1;
        const double ga = grad_alpha(s.alpha, s.theta, k, spectrum);
        const double gt = grad_theta(s.alpha, s.theta, n, k);
        report.final_gradient_norm = std::hypot(ga, gt);
        if (report.final_gradient_norm < settings.tolerance) {
            report.converged = true;
            break;
        }

        double next_alpha, next_theta;
        if (have_prev && !same_sign(ga, prev_ga)) {
            next_alpha = 0.5 * (s.alpha + prev_alpha);
            s.v_alpha *= 0.5;
        } else {
            s.v_alpha = s.eta * s.v_alpha + ga;
            next_alpha = s.alpha + s.step_alpha * s.v_alpha;
        }
        if (have_prev && !same_sign(gt, prev_gt)) {
            next_theta = 0.5 * (s.theta + prev_theta);
            s.v_theta *= 0.5;
        } else {
            s.v_theta = s.eta * s.v_theta + gt;
            next_theta = s.theta + s.step_theta * s.v_theta;
        }
        prev_alpha = s.alpha;
        prev_theta = s.theta;
        prev_ga = ga;
        prev_gt = gt;
        have_prev = true;

        const bool alpha_out = !(next_alpha > 0.0 && next_alpha < 1.0);
        const double alpha_for_theta =
            alpha_out ? (next_alpha >= 1.0 ? k_alpha_high_reset : k_alpha_low_reset) : next_alpha;
        const bool theta_out = !(next_theta > -alpha_for_theta);
        if (alpha_out || theta_out) {
            if (s.correction_count >= settings.max_corrections) {
                s.alpha = std::clamp(std::isnan(next_alpha) ? s.alpha : next_alpha,
                                     k_alpha_low_clamp, k_alpha_high_clamp);
                s.theta = std::max(std::isnan(next_theta) ? s.theta : next_theta,
                                   -s.alpha + k_theta_clamp_gap);
                break;
            }
            ++s.correction_count;
            s.eta *= 0.5;
            if (alpha_out) {
                next_alpha = alpha_for_theta;
                s.step_alpha *= 0.5;
                s.v_alpha = 0.0;
            }
            if (theta_out) {
                next_theta = -next_alpha + k_theta_reset_gap;
                s.step_theta *= 0.5;
                s.v_theta = 0.0;
            }
            // The bracket from before the jump no longer describes the search.
            have_prev = false;
        }

        if (next_alpha == s.alpha && next_theta == s.theta) {
            if (++stalled >= k_stall_limit) {
                report.converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
        s.alpha = next_alpha;
        s.theta = next_theta;
    }

    // Reported values always satisfy the clamped admissible region.
    s.alpha = std::clamp(s.alpha, k_alpha_low_clamp, k_alpha_high_clamp);
    s.theta = std::max(s.theta, -s.alpha + k_theta_clamp_gap);
    report.params = {s.alpha, s.theta};
    report.resets_used = s.correction_count;
    return report;
}

// Newton ascent in (α, φ = θ + α), where the admissible region is the box
// α ∈ [0.001, 0.999], φ ≥ 0.01. Coordinates sitting on a bound with the
// gradient pointing outward are frozen for the step.
FitReport fit_newton(const MultiplicitySpectrum& spectrum, const OptimizerSettings& settings) {
    const std::uint64_t k = spectrum.distinct();
    const std::uint64_t n = spectrum.total();
    const double phi_low = k_theta_clamp_gap;
    const auto objective = [&](double a, double phi) {
        return partition_log_likelihood({a, phi - a}, spectrum);
    };

    double alpha = std::clamp(settings.alpha0, k_alpha_low_clamp, k_alpha_high_clamp);
    double phi = std::max(static_cast<double>(k) + alpha, phi_low);
    double current = objective(alpha, phi);
    FitReport report;
    int corrections = 0;

    for (std::uint64_t iter = 0; iter < settings.max_iterations; ++iter) {
        report.iterations = iter + 1;
        const double theta = phi - alpha;
        const double g_alpha = grad_alpha(alpha, theta, k, spectrum);
        const double g_theta = grad_theta(alpha, theta, n, k);
        report.final_gradient_norm = std::hypot(g_alpha, g_theta);
        if (report.final_gradient_norm < settings.tolerance) {
            report.converged = true;
            break;
        }
        const double ga = g_alpha - g_theta;  // ∂/∂α at fixed φ
        const double gp = g_theta;
        const bool fix_a = (alpha <= k_alpha_low_clamp && ga < 0.0) || (alpha >= k_alpha_high_clamp && ga > 0.0);
        const bool fix_p = phi <= phi_low && gp < 0.0;
        const double free_norm = std::hypot(fix_a ? 0.0 : ga, fix_p ? 0.0 : gp);
        if (free_norm < settings.tolerance) {
            report.converged = true;
            report.at_boundary = true;
            break;
        }

        const auto h = partition_hessian(alpha, theta, n, k, spectrum);
        const double haa = h.aa - 2.0 * h.at + h.tt;
        const double hap = h.at - h.tt;
        const double hpp = h.tt;
        const auto scaled = [](double g, double curvature) {
            return curvature < 0.0 ? -g / curvature : g / std::max(std::abs(curvature), 1.0);
        };
        double da = 0.0, dp = 0.0;
        if (!fix_a && !fix_p) {
            const double det = haa * hpp - hap * hap;
            if (haa < 0.0 && det > 0.0) {
                da = -(hpp * ga - hap * gp) / det;
                dp = -(haa * gp - hap * ga) / det;
            } else {
                da = scaled(ga, haa);
                dp = scaled(gp, hpp);
            }
        } else if (!fix_a) {
            da = scaled(ga, haa);
        } else {
            dp = scaled(gp, hpp);
        }

        const double noise = 1e-13 * std::max(1.0, std::abs(current));
        bool accepted = false, projected = false;
        double next_alpha = alpha, next_phi = phi, next_value = current;
        for (double step = 1.0; step > 1e-20; step *= 0.5) {
            const double a = std::clamp(alpha + step * da, k_alpha_low_clamp, k_alpha_high_clamp);
            const double p = std::max(phi + step * dp, phi_low);
            const double value = objective(a, p);
            if (std::isfinite(value) && value >= current - noise) {
                projected = a != alpha + step * da || p != phi + step * dp;
                next_alpha = a;
                next_phi = p;
                next_value = value;
                accepted = true;
                break;
            }
        }
        if (!accepted || (next_alpha == alpha && next_phi == phi)) break;  // numerical fixed point
        alpha = next_alpha;
        phi = next_phi;
        current = next_value;
        if (projected && ++corrections >= settings.max_corrections) break;
    }

    report.params = {alpha, std::max(phi - alpha, -alpha + k_theta_clamp_gap)};
    report.resets_used = corrections;
    if (!report.converged) {
        report.at_boundary = alpha <= k_alpha_low_clamp || alpha >= k_alpha_high_clamp || phi <= phi_low;
    }
    return report;
}

}  // namespace

OptimizerMethod parse_optimizer_method(std::string_view name) {
    if (name == "newton") return OptimizerMethod::newton;
    if (name == "momentum") return OptimizerMethod::momentum;
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected newton|momentum)");
}

std::string_view to_string(OptimizerMethod method) {
    return method == OptimizerMethod::newton ? "newton" : "momentum";
}

PartitionHessian partition_hessian(double alpha, double theta, std::uint64_t n, std::uint64_t k,
                                   const MultiplicitySpectrum& spectrum) {
    const double ratio = theta / alpha;
    const double kd = static_cast<double>(k);
    const double d0 = digamma(ratio + kd) - digamma(ratio + 1.0);
    const double d1 = trigamma(ratio + kd) - trigamma(ratio + 1.0);
    const double a2 = alpha * alpha;
    PartitionHessian h;
    h.tt = d1 / a2 - (trigamma(theta + static_cast<double>(n)) - trigamma(theta + 1.0));
    h.at = -d0 / a2 - theta / (a2 * alpha) * d1;
    h.aa = -(kd - 1.0) / a2 + 2.0 * theta / (a2 * alpha) * d0 + theta * theta / (a2 * a2) * d1;
    const double tri_one = trigamma(1.0 - alpha);
    for (const auto& [mult, count] : spectrum.r) {
        if (mult <= 1) continue;
        h.aa += static_cast<double>(count) * (trigamma(static_cast<double>(mult) - alpha) - tri_one);
    }
    return h;
}

FitReport fit_author(const MultiplicitySpectrum& spectrum, const OptimizerSettings& settings) {
    if (spectrum.distinct() == 0) throw std::invalid_argument("fit_author: empty sequence");
    return settings.method == OptimizerMethod::newton ? fit_newton(spectrum, settings)
                                                      : fit_momentum(spectrum, settings);
}

}  // namespace cp2d
