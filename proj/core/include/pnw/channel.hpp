#pragma once

// Receiver-observation generators for the four discrete-time models, all
// driven by the same fine-rate simulation of the continuous channel:
//  - multisample-true:   Y_k = X_{ceil(k/L)} Delta e^{j Theta_k} F_k + N_k,
//                        synthesized directly from the fine phase path.
//  - multisample-approx: F_k replaced by the per-sample pulse weight.
//  - matched-filter:     Y_m = X_m H_m + N_m with H_m the pulse-energy-
//                        weighted phasor integral over symbol m.
//  - baud-rate:          Y_m = X_m e^{j Theta_m} + N_m, one phase increment
//                        per symbol with variance 2 pi beta Ts.
//
// Plus the double-filtering statistic V = sum |Y|^2 and a binary dump format
// for estimator replay.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnw/phase_noise.hpp"
#include "pnw/signal.hpp"

namespace pnw {

enum class ModelKind { MultisampleTrue, MultisampleApprox, MatchedFilter, BaudRate };

ModelKind model_by_name(const std::string& name);
std::string model_name(ModelKind kind);

// The L receiver samples belonging to one symbol (L = 1 for symbol-rate models).
struct SampleBlock {
    std::vector<cplx> samples;
};

struct SimulateOptions {
    // Pin Theta at the first fine node instead of drawing it uniform.
    std::optional<double> initial_phase;
};

// Per-sample pulse weights w_l = g(l * Delta), l = 1..L — the candidate
// sample-vector convention of the auxiliary channel. For pulses symmetric on
// [0, Ts] this equals the g((k mod L) Delta) convention sample-for-sample.
std::vector<double> per_sample_weights(const Pulse& pulse, int L, double Ts);

// Generate observations for `symbols` under the chosen model; one block per
// symbol. The rng stream is consumed deterministically.
std::vector<SampleBlock> simulate(ModelKind model, const std::vector<cplx>& symbols,
                                  const Pulse& pulse, const ChannelConfig& config, Stream& rng,
                                  const SimulateOptions& options = {});

// V = sum_l |Y_l|^2 over one block (double-filtering receiver statistic).
double double_filter_energy(const SampleBlock& block);

// --- Binary dump for estimator replay -------------------------------------
//
// Layout (little-endian):
//   magic "PNWDUMP1" | u32 version=1 | u64 config_hash | u64 nsymb | u32 L |
//   u32 pulse kind | f64 beta | f64 Ts | f64 sigmaN2 | f64 P
// followed by nsymb*L records of four f64: x_re, x_im (the symbol the sample
// belongs to), y_re, y_im.

struct DumpHeader {
    std::uint64_t config_hash = 0;
    std::uint64_t nsymb = 0;
    std::uint32_t L = 1;
    std::uint32_t pulse_kind = 0;
    double beta = 0.0;
    double Ts = 1.0;
    double sigmaN2 = 1.0;
    double P = 1.0;
};

struct DumpData {
    DumpHeader header;
    std::vector<cplx> symbols;        // length nsymb
    std::vector<SampleBlock> blocks;  // length nsymb, L samples each
};

void dump_samples(const std::string& path, const std::vector<cplx>& symbols,
                  const std::vector<SampleBlock>& blocks, const ChannelConfig& config,
                  PulseKind pulse_kind, std::uint64_t config_hash);

DumpData load_samples(const std::string& path);

} // namespace pnw
