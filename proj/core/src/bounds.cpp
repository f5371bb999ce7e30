#include "pnw/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "pnw/phase_noise.hpp"
#include "pnw/quadrature.hpp"

namespace pnw {

namespace {

constexpr double kPi = std::numbers::pi;

double finalize(BoundReport& r) {
    double sum = 0.0;
    for (const BoundTerm& t : r.components) sum += t.nats;
    r.value_nats = sum;
    return sum;
}

} // namespace

BoundReport amplitude_lb_finite(double snr, double Delta, double beta) {
    if (!(snr > 0.0)) throw std::invalid_argument("amplitude_lb_finite: snr must be > 0");
    if (!(Delta > 0.0)) throw std::invalid_argument("amplitude_lb_finite: Delta must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("amplitude_lb_finite: beta must be >= 0");

    const int L = std::max(1, static_cast<int>(std::llround(1.0 / Delta)));
    const MomentReport m = closed_form_moments(beta, Delta, L);

    BoundReport r;
    r.regime = "finite-snr";
    r.components = {
        {"half-log-snr", 0.5 * std::log(snr)},
        {"constant", -2.0 - 0.5 * std::log(8.0 * kPi)},
        {"noise-penalty", -1.0 / (2.0 * snr * Delta)},
        {"filter-spread-penalty", -0.25 * snr * m.ms_g_minus_1},
    };
    finalize(r);
    return r;
}

BoundReport amplitude_lb_finite_centered(double snr, double Delta, double beta) {
    if (!(snr > 0.0)) throw std::invalid_argument("amplitude_lb_finite_centered: snr must be > 0");
    if (!(Delta > 0.0))
        throw std::invalid_argument("amplitude_lb_finite_centered: Delta must be > 0");
    if (!(beta >= 0.0))
        throw std::invalid_argument("amplitude_lb_finite_centered: beta must be >= 0");

    const int L = std::max(1, static_cast<int>(std::llround(1.0 / Delta)));
    const MomentReport m = closed_form_moments(beta, Delta, L);

    BoundReport r;
    r.regime = "finite-snr";
    r.components = {
        {"half-log-snr", 0.5 * std::log(snr)},
        {"constant", -2.0 - 0.5 * std::log(8.0 * kPi)},
        {"noise-penalty", -1.0 / (2.0 * snr * Delta)},
        {"filter-variance-penalty", -0.25 * snr * m.var_g},
    };
    finalize(r);
    return r;
}

double theorem1_asymptote(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("theorem1_asymptote: beta must be > 0");
    return -2.0 - 0.5 * std::log(8.0 * kPi) - kPi * kPi / 36.0;
}

double cubicroot_asymptote(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("cubicroot_asymptote: beta must be > 0");
    return -2.0 - 0.5 * std::log(8.0 * kPi) - kPi * kPi / 45.0;
}

double awgn_phase_pdf(double phi, double R) {
    if (!(R >= 0.0)) throw std::invalid_argument("awgn_phase_pdf: R must be >= 0");
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double uniform_part = std::exp(-R * R) / (2.0 * kPi);
    // erfc(-R cos phi) stays accurate for both signs of the argument.
    const double directed_part = R * c / std::sqrt(4.0 * kPi) * std::exp(-R * R * s * s) *
                                 std::erfc(-R * c);
    return uniform_part + directed_part;
}

double awgn_phase_cos_moment(double R) {
    return integrate_gk([R](double phi) { return std::cos(phi) * awgn_phase_pdf(phi, R); },
                        -kPi, kPi, 1e-10);
}

double awgn_phase_rate_lb(double R) {
    if (!(R > 0.0)) throw std::invalid_argument("awgn_phase_rate_lb: R must be > 0");
    return std::max(0.0, std::log(R) - 1.0);
}

BoundReport phase_lb_finite(double snr, double Delta, double beta, AlphaChoice alpha_choice) {
    if (!(snr > 0.0)) throw std::invalid_argument("phase_lb_finite: snr must be > 0");
    if (!(Delta > 0.0)) throw std::invalid_argument("phase_lb_finite: Delta must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("phase_lb_finite: beta must be >= 0");
    const double snr_delta = snr * Delta;
    if (!(snr_delta > 2.0))
        throw std::domain_error("phase_lb_finite: requires snr * Delta > 2");

    double alpha;
    if (alpha_choice == AlphaChoice::SnrDelta) {
        alpha = snr_delta;
    } else {
        // Maximizer of 1/2 ln(alpha) - alpha (pi beta Delta + 4/(snr Delta)).
        alpha = snr_delta / (2.0 * kPi * beta * snr * Delta * Delta + 8.0);
    }

    BoundReport r;
    r.regime = "finite-snr";
    r.components = {
        {"half-log-alpha", 0.5 * std::log(alpha)},
        {"linewidth-penalty", -alpha * kPi * beta * Delta},
        {"noise-penalty", -4.0 * alpha / snr_delta},
    };
    finalize(r);
    return r;
}

// --- inequality property suite ------------------------------------------------

namespace {

PropertyCheck grid_inequality(const std::string& name, double lo, double hi, int n,
                              double (*lhs_minus_rhs)(double, double), double param) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        worst = std::min(worst, lhs_minus_rhs(t, param));
    }
    return {name, worst, worst >= -1e-12};
}

// E[cos(Phi_Y - Phi_X)] for a given prior on Phi_X; the noise density is
// awgn_phase_pdf and Phi_Y = Phi_X + Phi mod 2 pi.
double cos_gap_moment(const std::vector<std::pair<double, double>>& prior_atoms, double R) {
    double acc = 0.0;
    for (const auto& [x, w] : prior_atoms) {
        acc += w * integrate_gk(
                       [x, R](double phi_y) {
                           return std::cos(phi_y - x) * awgn_phase_pdf(phi_y - x, R);
                       },
                       -kPi, kPi, 1e-11);
    }
    return acc;
}

} // namespace

PropertyReport appendixB_property_suite() {
    PropertyReport rep;
    const int n = 2000;

    rep.checks.push_back(grid_inequality(
        "erfc(-z) >= 2 - exp(-z^2)", 0.0, 10.0, n,
        [](double z, double) { return std::erfc(-z) - (2.0 - std::exp(-z * z)); }, 0.0));

    rep.checks.push_back(grid_inequality(
        "sin t <= t", 0.0, 10.0, n,
        [](double t, double) { return t - std::sin(t); }, 0.0));

    for (double a : {0.1, 1.0, 10.0}) {
        rep.checks.push_back(grid_inequality(
            "cos^2 t exp(-a sin^2 t) >= (1-t^2) exp(-a t^2), a=" + std::to_string(a), 0.0, 10.0,
            n,
            [](double t, double a_) {
                const double c = std::cos(t), s = std::sin(t);
                return c * c * std::exp(-a_ * s * s) - (1.0 - t * t) * std::exp(-a_ * t * t);
            },
            a));
    }

    // max_x x^n exp(-a x^2) = (n / (2 a e))^{n/2}: a fine grid search must stay
    // below the closed form and land within 1e-6 of it.
    for (int p = 1; p <= 3; ++p) {
        for (double a : {0.1, 1.0, 10.0}) {
            const double analytic = std::pow(p / (2.0 * a * std::numbers::e), p / 2.0);
            double grid_max = 0.0;
            const int steps = 200000;
            for (int i = 0; i <= steps; ++i) {
                const double x = 10.0 * i / steps;
                grid_max = std::max(grid_max, std::pow(x, p) * std::exp(-a * x * x));
            }
            const bool pass = grid_max <= analytic + 1e-12 && analytic - grid_max <= 1e-6;
            rep.checks.push_back({"max x^" + std::to_string(p) +
                                      " exp(-a x^2) closed form, a=" + std::to_string(a),
                                  analytic - grid_max, pass});
        }
    }

    // Prior independence of E[cos(Phi_Y - Phi_X)]: uniform, point-mass, and
    // two-point priors must agree.
    {
        const double R = 2.0;
        std::vector<std::pair<double, double>> uniform;
        const int m = 64;
        for (int i = 0; i < m; ++i)
            uniform.push_back({-kPi + (2.0 * kPi) * (i + 0.5) / m, 1.0 / m});
        const double v_uniform = cos_gap_moment(uniform, R);
        const double v_point = cos_gap_moment({{0.7, 1.0}}, R);
        const double v_two = cos_gap_moment({{-1.1, 0.5}, {2.3, 0.5}}, R);
        const double spread =
            std::max({std::abs(v_uniform - v_point), std::abs(v_uniform - v_two),
                      std::abs(v_point - v_two)});
        rep.checks.push_back(
            {"E[cos(Phi_Y - Phi_X)] prior independence", 1e-9 - spread, spread <= 1e-9});
    }

    rep.all_pass = true;
    for (const PropertyCheck& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

} // namespace pnw
