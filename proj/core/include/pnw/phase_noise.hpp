#pragma once

// Wiener phase process sampling, additive noise, filtered-phase factors F_k,
// and the closed-form moment library for the aggregate energy factor G.
//
// Conventions:
//  - beta is the full-width half-maximum linewidth of the Lorentzian spectrum
//    of e^{j Theta(t)}; the phase increment over dt has variance 2*pi*beta*dt.
//  - A fine path stores nodes at fine-cell midpoints tau_i = (i + 1/2)*dt, so
//    integrals over sample intervals are midpoint Riemann sums and the phase
//    reference Theta_k of interval k is the interval's first node.

#include <complex>
#include <cstddef>
#include <vector>

#include "pnw/rng.hpp"

namespace pnw {

using cplx = std::complex<double>;

// Physical parameters shared by every model. snr and Delta are derived.
struct ChannelConfig {
    double beta = 0.0;       // FWHM linewidth (Hz); 2 * half-width
    double Ts = 1.0;         // symbol interval (s)
    int L = 1;               // receiver samples per symbol
    int L_sim = 1024;        // simulation grid points per symbol (multiple of L)
    double sigmaN2 = 1.0;    // noise parameter sigma_N^2 (N0 = 2 sigma_N^2)
    double P = 1.0;          // average symbol energy constraint E|X|^2 <= P

    double delta() const { return Ts / L; }
    double snr() const { return P / (sigmaN2 * Ts); }
    // Fine points per receiver sample interval.
    int fine_per_sample() const { return L_sim / L; }

    // Throws std::invalid_argument when a field is out of domain.
    void validate() const;
};

// A sampled phase path: increments W_k and the unwrapped cumulative path.
// cumulative[k] - cumulative[k-1] == increments[k] exactly (increments[0] is
// the initial phase, drawn uniform on [-pi, pi)).
struct PhasePath {
    std::vector<double> increments;
    std::vector<double> cumulative;
    double dt = 0.0;
};

// Per-sample averaged phasor F_k of the multi-sample model; |value| <= 1.
struct FilterFactor {
    cplx value;
};

// Closed-form moments of F_1 and of the per-symbol aggregate G = sum|F|^2 / L,
// all parameterized by a = e^{-pi*beta*Delta}.
struct MomentReport {
    double a = 1.0;
    double ef1 = 1.0;          // E[F_1] (real by symmetry)
    double ef1_sq = 1.0;       // E[|F_1|^2]
    double ef1_4 = 1.0;        // E[|F_1|^4]
    double var_f1 = 0.0;       // Var(F_1) = E[|F_1|^2] - E[F_1]^2
    double var_f1sq = 0.0;     // Var(|F_1|^2)
    double eg = 1.0;           // E[G] = E[|F_1|^2]
    double var_g = 0.0;        // Var(G) = Var(|F_1|^2) / L
    double ms_g_minus_1 = 0.0; // E[(G-1)^2] = Var(G) + (E[G]-1)^2
};

// Small-Delta limits of the G moments (beta fixed, Delta -> 0).
struct MomentLimits {
    double var_g_over_delta3 = 0.0;      // -> 4 (pi beta)^2 / 45
    double var_g_over_delta2 = 0.0;      // -> 0
    double eg_gap_sq_over_delta2 = 0.0;  // (E[G]-1)^2 / Delta^2 -> (pi beta)^2 / 9
    double ms_g_over_delta2 = 0.0;       // E[(G-1)^2] / Delta^2 -> (pi beta)^2 / 9
};

// Wiener path with n_steps increments after the initial uniform phase:
// returned vectors have n_steps + 1 entries. Increment variance 2*pi*beta*dt.
PhasePath sample_wiener_path(const ChannelConfig& config, std::size_t n_steps, double dt,
                             Stream& rng);

// i.i.d. circularly symmetric complex Gaussians with E|N|^2 = variance.
std::vector<cplx> sample_awgn(std::size_t n, double variance, Stream& rng);

// Wrapped Gaussian density on [-pi, pi): image sum truncated so the omitted
// tail mass stays below tail_tol; for very large sigma2 the uniform limit
// with a two-term Fourier correction is exact to double precision.
double wrapped_gaussian_pdf(double w, double sigma2, double tail_tol = 1e-12);

// Midpoint-rule filter factors over consecutive sample intervals of the path.
// pulse_samples holds g at the path's fine nodes for one symbol (L_sim values,
// periodically extended); the factors are normalized so g == const == 1 gives
// F_k == 1 when the phase is constant.
std::vector<FilterFactor> filter_factors_from_path(const PhasePath& path,
                                                   const ChannelConfig& config,
                                                   const std::vector<double>& pulse_samples);

// Closed forms of the factor moments in a = e^{-pi*beta*Delta}; switches
// to 12th-order series in x = -ln a below x = 1/4 where the direct forms lose
// to cancellation. L enters only the aggregate (G) fields.
MomentReport closed_form_moments(double beta, double Delta, int L);

MomentLimits moment_limits(double beta);

} // namespace pnw
