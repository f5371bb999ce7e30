#include "pnw/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pnw {

namespace {
constexpr double kPi = std::numbers::pi;
}

Pulse Pulse::square() {
    Pulse p;
    p.kind_ = PulseKind::Square;
    return p;
}

Pulse Pulse::cosine_squared() {
    Pulse p;
    p.kind_ = PulseKind::CosineSquared;
    return p;
}

Pulse Pulse::custom(std::vector<double> samples, double Ts) {
    if (samples.empty()) throw std::invalid_argument("Pulse::custom: empty sample array");
    if (!(Ts > 0.0)) throw std::invalid_argument("Pulse::custom: Ts must be > 0");
    const double dt = Ts / static_cast<double>(samples.size());
    double energy = 0.0;
    for (double g : samples) energy += g * g * dt;
    if (!(energy > 0.0)) throw std::invalid_argument("Pulse::custom: zero-energy pulse");
    const double scale = 1.0 / std::sqrt(energy);
    for (double& g : samples) g *= scale;
    Pulse p;
    p.kind_ = PulseKind::Custom;
    p.custom_samples_ = std::move(samples);
    p.custom_Ts_ = Ts;
    p.norm_warning_ = std::abs(scale - 1.0) > 0.01;
    return p;
}

Pulse Pulse::by_name(const std::string& name) {
    if (name == "square") return square();
    if (name == "cos2" || name == "cosine-squared") return cosine_squared();
    throw std::invalid_argument("Pulse::by_name: unknown pulse '" + name + "'");
}

std::vector<double> Pulse::samples(int resolution, double Ts) const {
    if (resolution < 1) throw std::invalid_argument("Pulse::samples: resolution must be >= 1");
    if (!(Ts > 0.0)) throw std::invalid_argument("Pulse::samples: Ts must be > 0");
    std::vector<double> g(resolution);
    switch (kind_) {
        case PulseKind::Square: {
            const double v = 1.0 / std::sqrt(Ts);
            for (double& s : g) s = v;
            break;
        }
        case PulseKind::CosineSquared: {
            // sin^2 shape on [0, Ts) with exact unit energy (integral of sin^4
            // over a half period is 3/8).
            const double amp = std::sqrt(8.0 / (3.0 * Ts));
            for (int i = 0; i < resolution; ++i) {
                const double t = (i + 0.5) / resolution;
                const double s = std::sin(kPi * t);
                g[i] = amp * s * s;
            }
            break;
        }
        case PulseKind::Custom: {
            // Nearest-sample lookup on the ingested grid, rescaled to Ts.
            const auto n = static_cast<int>(custom_samples_.size());
            for (int i = 0; i < resolution; ++i) {
                const double t = (i + 0.5) / resolution;
                int idx = static_cast<int>(t * n);
                if (idx >= n) idx = n - 1;
                g[i] = custom_samples_[idx] * std::sqrt(custom_Ts_ / Ts);
            }
            break;
        }
    }
    return g;
}

namespace {

Constellation make_psk(int m) {
    Constellation c;
    c.points.resize(m);
    c.labels.resize(m);
    for (int i = 0; i < m; ++i) {
        const double ph = 2.0 * kPi * i / m;
        c.points[i] = cplx{std::cos(ph), std::sin(ph)};
        c.labels[i] = static_cast<unsigned>(i ^ (i >> 1));  // Gray code around the circle
    }
    return c;
}

} // namespace

Constellation Constellation::qpsk() { return make_psk(4); }

Constellation Constellation::psk16() { return make_psk(16); }

Constellation Constellation::qam16() {
    // Standard 4x4 grid, Gray-labeled per axis, normalized to unit average
    // energy (mean |x|^2 of {+-1, +-3}^2 is 10).
    Constellation c;
    const double amp[4] = {-3.0, -1.0, 1.0, 3.0};
    const unsigned gray[4] = {0, 1, 3, 2};
    const double scale = 1.0 / std::sqrt(10.0);
    for (int i = 0; i < 4; ++i) {
        for (int q = 0; q < 4; ++q) {
            c.points.push_back(cplx{amp[i], amp[q]} * scale);
            c.labels.push_back((gray[i] << 2) | gray[q]);
        }
    }
    return c;
}

Constellation Constellation::by_name(const std::string& name) {
    if (name == "qpsk") return qpsk();
    if (name == "16qam" || name == "qam16") return qam16();
    if (name == "16psk" || name == "psk16") return psk16();
    throw std::invalid_argument("Constellation::by_name: unknown constellation '" + name + "'");
}

std::vector<cplx> synthesize_waveform(const std::vector<cplx>& symbols, const Pulse& pulse,
                                      const ChannelConfig& config) {
    config.validate();
    if (symbols.empty()) throw std::length_error("synthesize_waveform: empty symbol sequence");
    const std::vector<double> g = pulse.samples(config.L_sim, config.Ts);
    std::vector<cplx> x(symbols.size() * static_cast<std::size_t>(config.L_sim));
    std::size_t pos = 0;
    for (const cplx& sym : symbols)
        for (int i = 0; i < config.L_sim; ++i) x[pos++] = sym * g[i];
    return x;
}

std::vector<cplx> draw_iud_symbols(const Constellation& constellation, std::size_t n, double P,
                                   Stream& rng) {
    if (constellation.points.empty())
        throw std::invalid_argument("draw_iud_symbols: empty constellation");
    if (!(P > 0.0)) throw std::invalid_argument("draw_iud_symbols: P must be > 0");
    const double scale = std::sqrt(P);
    const auto m = constellation.points.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        // uniform01 is on (0, 1]; shift so index m occurs with the right mass.
        auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(m));
        if (idx >= m) idx = m - 1;
        out[k] = constellation.points[idx] * scale;
    }
    return out;
}

std::vector<double> draw_shifted_exponential_amplitudes(const AmplitudeLaw& law, std::size_t n,
                                                        Stream& rng) {
    if (!(law.P > 0.0))
        throw std::invalid_argument("draw_shifted_exponential_amplitudes: P must be > 0");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = law.Pmin() - law.lambda() * std::log(rng.uniform01());
    return out;
}

} // namespace pnw
