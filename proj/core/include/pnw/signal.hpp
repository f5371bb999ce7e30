#pragma once

// Transmit-side building blocks: unit-energy pulses on [0, Ts), unit-energy
// constellations, i.u.d. symbol sources, and the shifted-exponential
// amplitude law used by the high-SNR amplitude bound.

#include <string>
#include <vector>

#include "pnw/phase_noise.hpp"
#include "pnw/rng.hpp"

namespace pnw {

enum class PulseKind { Square, CosineSquared, Custom };

// Unit-energy transmit pulse with support confined to [0, Ts).
class Pulse {
  public:
    // Built-in shapes. The cosine-squared shape is sin^2(pi t / Ts) scaled to
    // true unit energy sqrt(8 / (3 Ts)) (the conventional cos^2 form centered
    // on the symbol, shifted to [0, Ts)).
    static Pulse square();
    static Pulse cosine_squared();
    // Custom sampled pulse over [0, Ts); energy-normalized on ingestion.
    // normalization_warning() reports whether the correction exceeded 1%.
    static Pulse custom(std::vector<double> samples, double Ts);

    static Pulse by_name(const std::string& name);  // "square" | "cos2"

    PulseKind kind() const { return kind_; }
    bool normalization_warning() const { return norm_warning_; }

    // g evaluated at the fine-cell midpoints (i + 1/2) * Ts / resolution,
    // i = 0..resolution-1; unit energy: sum g^2 * (Ts/resolution) = 1.
    std::vector<double> samples(int resolution, double Ts) const;

  private:
    Pulse() = default;
    PulseKind kind_ = PulseKind::Square;
    std::vector<double> custom_samples_;
    double custom_Ts_ = 1.0;
    bool norm_warning_ = false;
};

// Finite alphabet with unit average energy and Gray-coded labels.
struct Constellation {
    std::vector<cplx> points;
    std::vector<unsigned> labels;

    static Constellation qpsk();
    static Constellation qam16();
    static Constellation psk16();
    static Constellation by_name(const std::string& name);  // "qpsk"|"16qam"|"16psk"
};

// Shifted-exponential law on the symbol energy X_P = |X|^2:
// support [P/2, inf), density (1/lambda) e^{-(x - Pmin)/lambda},
// Pmin = P/2, lambda = P - Pmin = P/2, so E[X_P] = P.
struct AmplitudeLaw {
    double P = 1.0;
    double Pmin() const { return 0.5 * P; }
    double lambda() const { return P - Pmin(); }
};

// Fine-rate transmit waveform: x(t) = sum_m x_m g(t - (m-1) Ts) sampled at
// the L_sim midpoint grid; length nsymb * L_sim.
std::vector<cplx> synthesize_waveform(const std::vector<cplx>& symbols, const Pulse& pulse,
                                      const ChannelConfig& config);

// i.u.d. draws from the alphabet scaled so the average symbol energy is P.
std::vector<cplx> draw_iud_symbols(const Constellation& constellation, std::size_t n, double P,
                                   Stream& rng);

// Inverse-CDF draws of |x|^2 under the shifted-exponential law.
std::vector<double> draw_shifted_exponential_amplitudes(const AmplitudeLaw& law, std::size_t n,
                                                        Stream& rng);

} // namespace pnw
