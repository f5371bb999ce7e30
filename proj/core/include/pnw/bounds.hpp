#pragma once

// Closed-form lower bounds on the information rate of the waveform channel:
// finite-SNR amplitude-modulation and phase-modulation bounds with their
// high-SNR asymptotes, the AWGN phase-channel density and rate bound, and a
// numerical property suite for the supporting inequalities. All values are
// natural log units; unit conversion happens at the CLI boundary.

#include <string>
#include <vector>

namespace pnw {

struct BoundTerm {
    std::string label;
    double nats = 0.0;
};

// An additive bound with its term-by-term breakdown; value_nats is the exact
// sum of the components.
struct BoundReport {
    double value_nats = 0.0;
    std::vector<BoundTerm> components;
    std::string regime;  // "finite-snr" or "asymptote"
};

// Finite-SNR lower bound on the amplitude-modulation rate:
//   1/2 ln snr - 2 - 1/2 ln(8 pi) - 1/(2 snr Delta) - snr/4 * E[(G-1)^2],
// with E[(G-1)^2] from the closed-form filter-factor moments at L = 1/Delta
// (symbol interval 1).
BoundReport amplitude_lb_finite(double snr, double Delta, double beta);

// Mean-compensated variant: the auxiliary channel absorbs E[G], so only the
// variance of the per-symbol filter energy penalizes the rate:
//   1/2 ln snr - 2 - 1/2 ln(8 pi) - 1/(2 snr Delta) - snr/4 * Var(G).
BoundReport amplitude_lb_finite_centered(double snr, double Delta, double beta);

// High-SNR limits of (amplitude bound - 1/2 ln snr) along the two sampling
// schedules: L = ceil(beta sqrt(snr)) for the plain bound, and
// L = ceil((beta^2 snr)^{1/3}) for the mean-compensated variant.
double theorem1_asymptote(double beta);   // -2 - ln(8 pi)/2 - pi^2/36
double cubicroot_asymptote(double beta);  // -2 - ln(8 pi)/2 - pi^2/45

// Density of the phase of (R + CN(0,1)), i.e. the AWGN phase channel at
// amplitude-SNR R^2. Periodic in phi; exact up to erfc accuracy.
double awgn_phase_pdf(double phi, double R);

// E[cos Phi] under awgn_phase_pdf(., R), by adaptive quadrature.
double awgn_phase_cos_moment(double R);

// Rate of the uniform-input AWGN phase channel: max(0, ln R - 1) nats.
double awgn_phase_rate_lb(double R);

enum class AlphaChoice { SnrDelta, Optimal };

// Finite-SNR lower bound on the phase-modulation rate (symbol interval 1,
// unit noise density), valid for snr*Delta > 2:
//   snr-delta: 1/2 ln(snr Delta) - pi beta snr Delta^2 - 4
//   optimal:   1/2 ln(snr Delta / (2 pi beta snr Delta^2 + 8)) - 1/2
BoundReport phase_lb_finite(double snr, double Delta, double beta, AlphaChoice alpha_choice);

struct PropertyCheck {
    std::string name;
    double margin = 0.0;  // smallest slack observed; >= 0 means the property held
    bool pass = false;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool all_pass = false;
};

// Numerical verification of the inequalities behind the phase bound:
//   - erfc(-z) >= 2 - e^{-z^2}            on z in [0, 10]
//   - sin t <= t                          on t in [0, 10]
//   - cos^2 t e^{-a sin^2 t} >= (1-t^2) e^{-a t^2}   for a in {0.1, 1, 10}
//   - max_x x^n e^{-a x^2} = (n/(2ae))^{n/2}         for n in {1,2,3}, same a
//   - E[cos(Phi_Y - Phi_X)] is prior-independent (uniform / point / two-point)
PropertyReport appendixB_property_suite();

} // namespace pnw
