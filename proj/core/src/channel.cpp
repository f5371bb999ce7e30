#include "pnw/channel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace pnw {

static_assert(std::endian::native == std::endian::little,
              "dump format assumes a little-endian host");

ModelKind model_by_name(const std::string& name) {
    if (name == "multisample-true") return ModelKind::MultisampleTrue;
    if (name == "multisample-approx") return ModelKind::MultisampleApprox;
    if (name == "matched-filter") return ModelKind::MatchedFilter;
    if (name == "baud-rate") return ModelKind::BaudRate;
    throw std::invalid_argument("model_by_name: unknown model '" + name + "'");
}

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::MultisampleTrue: return "multisample-true";
        case ModelKind::MultisampleApprox: return "multisample-approx";
        case ModelKind::MatchedFilter: return "matched-filter";
        case ModelKind::BaudRate: return "baud-rate";
    }
    return "?";
}

std::vector<double> per_sample_weights(const Pulse& pulse, int L, double Ts) {
    if (L < 1) throw std::invalid_argument("per_sample_weights: L must be >= 1");
    // Evaluate g at l * Delta by sampling the pulse on a grid where those
    // points are cell midpoints: resolution 2L has midpoints (i + 1/2) Ts/(2L),
    // so g(l Delta) sits at i = 2l - 1; l = L wraps to g(Ts) which equals the
    // last midpoint-adjacent value for the built-in shapes.
    std::vector<double> w(L);
    switch (pulse.kind()) {
        case PulseKind::Square: {
            const double v = 1.0 / std::sqrt(Ts);
            for (double& x : w) x = v;
            break;
        }
        case PulseKind::CosineSquared: {
            const double amp = std::sqrt(8.0 / (3.0 * Ts));
            for (int l = 1; l <= L; ++l) {
                const double s = std::sin(std::numbers::pi * double(l) / L);
                w[l - 1] = amp * s * s;
            }
            break;
        }
        case PulseKind::Custom: {
            const std::vector<double> g = pulse.samples(4096, Ts);
            for (int l = 1; l <= L; ++l) {
                auto idx = static_cast<std::size_t>(double(l) / L * g.size());
                if (idx >= g.size()) idx = g.size() - 1;
                w[l - 1] = g[idx];
            }
            break;
        }
    }
    return w;
}

namespace {

// Shifts the whole path so the first node has the pinned phase.
void pin_initial_phase(PhasePath& path, double theta0) {
    const double shift = theta0 - path.cumulative[0];
    for (double& c : path.cumulative) c += shift;
    path.increments[0] = theta0;
}

std::vector<SampleBlock> simulate_multisample(bool true_model, const std::vector<cplx>& symbols,
                                              const Pulse& pulse, const ChannelConfig& config,
                                              Stream& rng, const SimulateOptions& options) {
    const std::size_t nsymb = symbols.size();
    const int L = config.L;
    const double delta = config.delta();
    const double noise_var = config.sigmaN2 * delta;

    std::vector<SampleBlock> out(nsymb);

    if (true_model) {
        // Fine path at the L_sim rate; nodes are fine-cell midpoints.
        const std::size_t n_nodes = nsymb * static_cast<std::size_t>(config.L_sim);
        const double dt = config.Ts / config.L_sim;
        PhasePath path = sample_wiener_path(config, n_nodes - 1, dt, rng);
        if (options.initial_phase) pin_initial_phase(path, *options.initial_phase);
        const std::vector<double> g = pulse.samples(config.L_sim, config.Ts);
        const int M = config.fine_per_sample();
        std::size_t node = 0;
        for (std::size_t m = 0; m < nsymb; ++m) {
            out[m].samples.resize(L);
            for (int l = 0; l < L; ++l) {
                cplx acc{0.0, 0.0};
                for (int i = 0; i < M; ++i, ++node) {
                    const double ph = path.cumulative[node];
                    acc += g[(node % config.L_sim)] * cplx{std::cos(ph), std::sin(ph)};
                }
                out[m].samples[l] = symbols[m] * (acc * dt) + rng.cgaussian(noise_var);
            }
        }
    } else {
        // Approximate model: phase at the sample rate, pulse entering as a
        // per-sample weight.
        const std::size_t n_nodes = nsymb * static_cast<std::size_t>(L);
        PhasePath path = sample_wiener_path(config, n_nodes - 1, delta, rng);
        if (options.initial_phase) pin_initial_phase(path, *options.initial_phase);
        const std::vector<double> w = per_sample_weights(pulse, L, config.Ts);
        std::size_t node = 0;
        for (std::size_t m = 0; m < nsymb; ++m) {
            out[m].samples.resize(L);
            for (int l = 0; l < L; ++l, ++node) {
                const double ph = path.cumulative[node];
                out[m].samples[l] =
                    symbols[m] * delta * w[l] * cplx{std::cos(ph), std::sin(ph)} +
                    rng.cgaussian(noise_var);
            }
        }
    }
    return out;
}

std::vector<SampleBlock> simulate_matched_filter(const std::vector<cplx>& symbols,
                                                 const Pulse& pulse, const ChannelConfig& config,
                                                 Stream& rng, const SimulateOptions& options) {
    const std::size_t nsymb = symbols.size();
    const std::size_t n_nodes = nsymb * static_cast<std::size_t>(config.L_sim);
    const double dt = config.Ts / config.L_sim;
    PhasePath path = sample_wiener_path(config, n_nodes - 1, dt, rng);
    if (options.initial_phase) pin_initial_phase(path, *options.initial_phase);
    const std::vector<double> g = pulse.samples(config.L_sim, config.Ts);
    // Unit-energy pulse: matched-filter noise has E|N|^2 = sigmaN2 * ||g||^2.
    const double noise_var = config.sigmaN2;

    std::vector<SampleBlock> out(nsymb);
    std::size_t node = 0;
    for (std::size_t m = 0; m < nsymb; ++m) {
        cplx h{0.0, 0.0};
        for (int i = 0; i < config.L_sim; ++i, ++node) {
            const double ph = path.cumulative[node];
            h += g[i] * g[i] * cplx{std::cos(ph), std::sin(ph)};
        }
        h *= dt;
        out[m].samples = {symbols[m] * h + rng.cgaussian(noise_var)};
    }
    return out;
}

std::vector<SampleBlock> simulate_baud_rate(const std::vector<cplx>& symbols,
                                            const ChannelConfig& config, Stream& rng,
                                            const SimulateOptions& options) {
    const std::size_t nsymb = symbols.size();
    PhasePath path = sample_wiener_path(config, nsymb > 1 ? nsymb - 1 : 1, config.Ts, rng);
    if (options.initial_phase) pin_initial_phase(path, *options.initial_phase);
    const double noise_var = config.sigmaN2 * config.Ts;
    std::vector<SampleBlock> out(nsymb);
    for (std::size_t m = 0; m < nsymb; ++m) {
        const double ph = path.cumulative[m];
        out[m].samples = {symbols[m] * cplx{std::cos(ph), std::sin(ph)} +
                          rng.cgaussian(noise_var)};
    }
    return out;
}

} // namespace

std::vector<SampleBlock> simulate(ModelKind model, const std::vector<cplx>& symbols,
                                  const Pulse& pulse, const ChannelConfig& config, Stream& rng,
                                  const SimulateOptions& options) {
    config.validate();
    if (symbols.empty()) throw std::length_error("simulate: empty symbol sequence");
    switch (model) {
        case ModelKind::MultisampleTrue:
            return simulate_multisample(true, symbols, pulse, config, rng, options);
        case ModelKind::MultisampleApprox:
            return simulate_multisample(false, symbols, pulse, config, rng, options);
        case ModelKind::MatchedFilter:
            return simulate_matched_filter(symbols, pulse, config, rng, options);
        case ModelKind::BaudRate:
            return simulate_baud_rate(symbols, config, rng, options);
    }
    throw std::invalid_argument("simulate: unknown model");
}

double double_filter_energy(const SampleBlock& block) {
    double v = 0.0;
    for (const cplx& y : block.samples) v += std::norm(y);
    return v;
}

void dump_samples(const std::string& path, const std::vector<cplx>& symbols,
                  const std::vector<SampleBlock>& blocks, const ChannelConfig& config,
                  PulseKind pulse_kind, std::uint64_t config_hash) {
    if (symbols.size() != blocks.size())
        throw std::invalid_argument("dump_samples: symbols/blocks length mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dump_samples: cannot open '" + path + "'");

    const char magic[8] = {'P', 'N', 'W', 'D', 'U', 'M', 'P', '1'};
    f.write(magic, 8);
    auto put = [&f](const auto& v) { f.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    const std::uint32_t version = 1;
    put(version);
    put(config_hash);
    const std::uint64_t nsymb = symbols.size();
    put(nsymb);
    const std::uint32_t L = static_cast<std::uint32_t>(config.L);
    put(L);
    const std::uint32_t pk = static_cast<std::uint32_t>(pulse_kind);
    put(pk);
    put(config.beta);
    put(config.Ts);
    put(config.sigmaN2);
    put(config.P);

    for (std::size_t m = 0; m < symbols.size(); ++m) {
        if (blocks[m].samples.size() != L)
            throw std::invalid_argument("dump_samples: block with wrong sample count");
        for (const cplx& y : blocks[m].samples) {
            const double rec[4] = {symbols[m].real(), symbols[m].imag(), y.real(), y.imag()};
            f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        }
    }
    if (!f) throw std::runtime_error("dump_samples: write failed on '" + path + "'");
}

DumpData load_samples(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_samples: cannot open '" + path + "'");
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, "PNWDUMP1", 8) != 0)
        throw std::runtime_error("load_samples: bad magic in '" + path + "'");
    auto get = [&f](auto& v) { f.read(reinterpret_cast<char*>(&v), sizeof(v)); };

    DumpData d;
    std::uint32_t version = 0;
    get(version);
    if (version != 1) throw std::runtime_error("load_samples: unsupported version");
    get(d.header.config_hash);
    get(d.header.nsymb);
    get(d.header.L);
    get(d.header.pulse_kind);
    get(d.header.beta);
    get(d.header.Ts);
    get(d.header.sigmaN2);
    get(d.header.P);
    if (!f) throw std::runtime_error("load_samples: truncated header");

    d.symbols.resize(d.header.nsymb);
    d.blocks.resize(d.header.nsymb);
    for (std::uint64_t m = 0; m < d.header.nsymb; ++m) {
        d.blocks[m].samples.resize(d.header.L);
        for (std::uint32_t l = 0; l < d.header.L; ++l) {
            double rec[4];
            f.read(reinterpret_cast<char*>(rec), sizeof(rec));
            if (!f) throw std::runtime_error("load_samples: truncated records");
            if (l == 0) d.symbols[m] = cplx{rec[0], rec[1]};
            d.blocks[m].samples[l] = cplx{rec[2], rec[3]};
        }
    }
    return d;
}

} // namespace pnw
