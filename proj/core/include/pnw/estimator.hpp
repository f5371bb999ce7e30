#pragma once

// Simulation-based lower bounds on I(X;Y) through a quantized-phase
// hidden-Markov auxiliary channel: the phase circle is split into S cells,
// the phase increment over one sample becomes a circulant transition table,
// and two forward recursions (conditional on the transmitted symbols, and
// marginal over an i.i.d. symbol prior) yield
//   I_hat = (1/nsymb) [ log2 q(y^n | x^n) - log2 q(y^n) ],
// a valid lower bound under mismatched decoding. The transition step is a
// circular convolution, run either directly or through an FFT.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pnw/channel.hpp"
#include "pnw/phase_noise.hpp"
#include "pnw/signal.hpp"

namespace pnw {

// S equal cells covering [-pi, pi): midpoints s_i = i*2pi/S - pi/S - pi for
// i = 1..S (S = 1 gives the single midpoint 0), half-width pi/S.
struct PhaseQuantizer {
    int S = 1;
    std::vector<double> midpoints;
    double half_width = 0.0;

    // Cell index of a phase (any real; reduced mod 2 pi).
    int index_of(double phase) const;
};

PhaseQuantizer build_quantizer(int S);

// Transition law of the quantized-phase state chain. Rows are source states;
// each row sums to 1. Built tables are circulant (entry depends only on the
// destination-source offset) and offset-symmetric; tables estimated from
// counts (the symbol-rate comparison model) are general row-stochastic.
struct TransitionTable {
    int S = 1;
    bool circulant = true;
    std::vector<double> kernel;  // circulant only: kernel[d] = Q(s -> s+d mod S)
    std::vector<double> matrix;  // row-major Q[from * S + to], always populated
    double sigmaW2 = 0.0;
    // Diagnostic: row sum before normalization, including the 2 pi / S
    // prefactor (its exact value is (2 pi / S)^2, so the gap measures
    // quadrature error).
    double pre_norm_row_sum = 0.0;

    double q(int to, int from) const { return matrix[static_cast<std::size_t>(from) * S + to]; }
};

// Double integral of the wrapped Gaussian over cell pairs, order-8
// Gauss-Legendre per cell axis, rows normalized explicitly.
TransitionTable build_transitions(const PhaseQuantizer& q, double sigmaW2);

// Row-stochastic table from transition counts (adds Laplace smoothing of +1).
TransitionTable transitions_from_counts(const std::vector<std::vector<std::uint64_t>>& counts);

// y ~ CN(mean_scale * x * e^{j s}, variance) given per-sample input x and state s.
struct EmissionModel {
    double mean_scale = 1.0;
    double variance = 1.0;
};

// Scaled forward vector: weights sum to 1, log_scale accumulates the
// removed normalizers, so log p = log_scale + ln(sum of unnormalized weights).
struct ForwardState {
    std::vector<double> weights;
    double log_scale = 0.0;
};

// The L-sample aggregated transition-emission kernel of one symbol and one
// candidate: chi[s * S + s_tilde] maps the state at the symbol start to the
// state at its end; log_scale holds the factored-out magnitude.
struct SymbolKernel {
    int S = 1;
    std::vector<double> chi;
    double log_scale = 0.0;
};

// FFT machinery for the circulant transition step. Thread-confined: build one
// per worker. Falls back to nothing — callers choose direct vs FFT.
class CirculantConvolver {
  public:
    explicit CirculantConvolver(const TransitionTable& table);
    ~CirculantConvolver();
    CirculantConvolver(const CirculantConvolver&) = delete;
    CirculantConvolver& operator=(const CirculantConvolver&) = delete;

    // out = Q^T applied to the forward vector: out[s] = sum_t kernel[(s-t) mod S] in[t].
    void apply(std::span<const double> in, std::span<double> out);

  private:
    struct Impl;
    Impl* impl_;
};

// Direct O(S^2) transition step, the reference path.
void apply_transitions_direct(const TransitionTable& table, std::span<const double> in,
                              std::span<double> out);

// Knobs shared by the recursions. fft_min_S is the crossover chosen by
// microbenchmark; force_direct pins the reference path for equivalence tests.
struct RecursionOptions {
    int fft_min_S = 16;
    bool force_direct = false;
};

// log q(y^n | x^n) in nats; x_samples and y have equal length n and the state
// chain starts uniform.
double forward_conditional(const std::vector<cplx>& x_samples, const std::vector<cplx>& y,
                           const TransitionTable& table, const PhaseQuantizer& q,
                           const EmissionModel& emission, const RecursionOptions& opts = {});

// Per-symbol candidate inputs: sample_means[c] holds the L per-sample values
// of candidate c (before mean_scale); prior sums to 1.
struct SymbolCandidates {
    std::vector<std::vector<cplx>> sample_means;
    std::vector<double> prior;
};

// log q(y^n) in nats via the two-level recursion over symbols and samples.
double forward_marginal(const std::vector<SampleBlock>& y, const SymbolCandidates& cands,
                        const TransitionTable& table, const PhaseQuantizer& q,
                        const EmissionModel& emission, const RecursionOptions& opts = {});

// Materialized chi-kernel of one symbol (used by tests to prove the matrix
// form equals the in-place vector recursion).
SymbolKernel build_symbol_kernel(const SampleBlock& y_block, const std::vector<cplx>& sample_means,
                                 const TransitionTable& table, const PhaseQuantizer& q,
                                 const EmissionModel& emission, const RecursionOptions& opts = {});

struct RateEstimate {
    double rate_bits = 0.0;      // mean over replicas, bits per symbol
    double std_error = 0.0;      // standard error of the replica mean
    std::vector<double> per_replica;
    std::uint64_t seed = 0;
    // Set when the replica spread exceeds the requested tolerance (never an error).
    bool spread_warning = false;
};

struct RateOptions {
    int replicas = 4;
    int workers = 0;                        // 0: one thread per replica up to hw limit
    double spread_tolerance = 0.1;          // bits; replica std dev above this sets the flag
    std::optional<double> initial_phase;    // pin Theta(0) of every replica
    RecursionOptions recursion;
};

// End-to-end estimate: draw i.u.d. symbols, simulate `model`, decode with the
// S-state auxiliary channel. Emission/transition constants follow the model:
// sample-rate models use sigmaN2*Delta and sigmaW2 = 2 pi beta Delta; the
// symbol-rate model uses sigmaN2*Ts and sigmaW2 = 2 pi beta Ts.
RateEstimate estimate_rate_lb(ModelKind model, const Constellation& constellation,
                              const Pulse& pulse, const ChannelConfig& config, int S,
                              std::size_t nsymb, std::uint64_t seed, const RateOptions& options = {});

// Same decoder on fixed replayed observations (one replica, no simulation);
// the block std error comes from splitting the sequence into n_sections.
RateEstimate estimate_rate_lb_replayed(const DumpData& data, const Constellation& constellation,
                                       const Pulse& pulse, int S, int n_sections = 4,
                                       const RecursionOptions& opts = {});

// Symbol-rate comparison estimator: a first-order Markov phase at symbol rate
// whose transition law is counted from a training pass (quantized per-symbol
// aggregate phasor phases, +1 smoothing), then the standard recursions on the
// per-symbol aggregate V_m of the approximate model (square pulse).
RateEstimate estimate_rate_lb_mtr(const Constellation& constellation, const ChannelConfig& config,
                                  int S, std::size_t n_train, std::size_t nsymb,
                                  std::uint64_t seed, const RateOptions& options = {});

} // namespace pnw
