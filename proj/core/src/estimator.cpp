#include "pnw/estimator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "pnw/quadrature.hpp"

namespace pnw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

// FFTW plan creation/destruction is not thread-safe; execution on private
// buffers is.
std::mutex fftw_mutex;

} // namespace

int PhaseQuantizer::index_of(double phase) const {
    // Reduce to [-pi, pi) and bucket by cell width 2 pi / S.
    double r = std::remainder(phase, 2.0 * kPi);
    if (r >= kPi) r -= 2.0 * kPi;
    int idx = static_cast<int>(std::floor((r + kPi) * S / (2.0 * kPi)));
    if (idx < 0) idx = 0;
    if (idx >= S) idx = S - 1;
    return idx;
}

PhaseQuantizer build_quantizer(int S) {
    if (S < 1) throw std::invalid_argument("build_quantizer: S must be >= 1");
    PhaseQuantizer q;
    q.S = S;
    q.half_width = kPi / S;
    q.midpoints.resize(S);
    for (int i = 1; i <= S; ++i) q.midpoints[i - 1] = i * 2.0 * kPi / S - kPi / S - kPi;
    return q;
}

TransitionTable build_transitions(const PhaseQuantizer& q, double sigmaW2) {
    if (!(sigmaW2 > 0.0)) throw std::invalid_argument("build_transitions: sigmaW2 must be > 0");
    const int S = q.S;
    TransitionTable t;
    t.S = S;
    t.circulant = true;
    t.sigmaW2 = sigmaW2;
    t.kernel.assign(S, 0.0);

    if (S == 1) {
        t.kernel[0] = 1.0;
        t.matrix = {1.0};
        t.pre_norm_row_sum = 2.0 * kPi * 2.0 * kPi;  // (2 pi / S)^2 at S = 1
        return t;
    }

    if (sigmaW2 < 1e-12) {
        // Delta limit: all mass stays in the same cell.
        t.kernel[0] = 1.0;
    } else {
        // I(d) = double integral of p_W over a cell pair at offset d * 2pi/S;
        // order-8 Gauss-Legendre per axis, exact symmetry I(d) = I(S - d).
        const QuadRule& gl = gauss_legendre(8);
        const double hw = q.half_width;
        std::vector<double> raw(S, 0.0);
        for (int d = 0; d <= S / 2; ++d) {
            const double off = d * 2.0 * kPi / S;
            double acc = 0.0;
            for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
                const double u = hw * gl.nodes[a];
                double inner = 0.0;
                for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
                    const double v = hw * gl.nodes[b];
                    inner += gl.weights[b] * wrapped_gaussian_pdf(off + u - v, sigmaW2);
                }
                acc += gl.weights[a] * inner;
            }
            raw[d] = acc * hw * hw;
            if (d > 0 && d < S - d) raw[S - d] = raw[d];
        }
        double sum = 0.0;
        for (double v : raw) sum += v;
        t.pre_norm_row_sum = (2.0 * kPi / S) * sum;
        for (int d = 0; d < S; ++d) t.kernel[d] = raw[d] / sum;
    }

    t.matrix.resize(static_cast<std::size_t>(S) * S);
    for (int from = 0; from < S; ++from)
        for (int to = 0; to < S; ++to)
            t.matrix[static_cast<std::size_t>(from) * S + to] = t.kernel[(to - from + S) % S];
    return t;
}

TransitionTable transitions_from_counts(const std::vector<std::vector<std::uint64_t>>& counts) {
    const int S = static_cast<int>(counts.size());
    if (S < 1) throw std::invalid_argument("transitions_from_counts: empty count matrix");
    TransitionTable t;
    t.S = S;
    t.circulant = false;
    t.matrix.resize(static_cast<std::size_t>(S) * S);
    for (int from = 0; from < S; ++from) {
        if (static_cast<int>(counts[from].size()) != S)
            throw std::invalid_argument("transitions_from_counts: ragged count matrix");
        double row_sum = 0.0;
        for (int to = 0; to < S; ++to) row_sum += static_cast<double>(counts[from][to]) + 1.0;
        for (int to = 0; to < S; ++to)
            t.matrix[static_cast<std::size_t>(from) * S + to] =
                (static_cast<double>(counts[from][to]) + 1.0) / row_sum;
    }
    return t;
}

// --- transition application -------------------------------------------------

struct CirculantConvolver::Impl {
    int S = 0;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    std::vector<std::complex<double>> khat;
    fftw_plan fwd{};
    fftw_plan inv{};
};

CirculantConvolver::CirculantConvolver(const TransitionTable& table) : impl_(new Impl) {
    if (!table.circulant)
        throw std::invalid_argument("CirculantConvolver: table is not circulant");
    const int S = table.S;
    impl_->S = S;
    const int nc = S / 2 + 1;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        impl_->real_buf = fftw_alloc_real(S);
        impl_->cplx_buf = fftw_alloc_complex(nc);
        impl_->fwd = fftw_plan_dft_r2c_1d(S, impl_->real_buf, impl_->cplx_buf, FFTW_ESTIMATE);
        impl_->inv = fftw_plan_dft_c2r_1d(S, impl_->cplx_buf, impl_->real_buf, FFTW_ESTIMATE);
    }
    // Eigenvalues of the circulant: DFT of the kernel.
    std::memcpy(impl_->real_buf, table.kernel.data(), sizeof(double) * S);
    fftw_execute(impl_->fwd);
    impl_->khat.resize(nc);
    for (int i = 0; i < nc; ++i)
        impl_->khat[i] = {impl_->cplx_buf[i][0], impl_->cplx_buf[i][1]};
}

CirculantConvolver::~CirculantConvolver() {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->inv);
    fftw_free(impl_->real_buf);
    fftw_free(impl_->cplx_buf);
    delete impl_;
}

void CirculantConvolver::apply(std::span<const double> in, std::span<double> out) {
    const int S = impl_->S;
    std::memcpy(impl_->real_buf, in.data(), sizeof(double) * S);
    fftw_execute(impl_->fwd);
    const int nc = S / 2 + 1;
    for (int i = 0; i < nc; ++i) {
        const std::complex<double> v{impl_->cplx_buf[i][0], impl_->cplx_buf[i][1]};
        const std::complex<double> w = v * impl_->khat[i];
        impl_->cplx_buf[i][0] = w.real();
        impl_->cplx_buf[i][1] = w.imag();
    }
    fftw_execute(impl_->inv);
    const double scale = 1.0 / S;
    // Roundoff can push entries that underflowed to ~1e-17 slightly negative;
    // forward weights must stay nonnegative.
    for (int s = 0; s < S; ++s) out[s] = std::max(impl_->real_buf[s] * scale, 0.0);
}

void apply_transitions_direct(const TransitionTable& table, std::span<const double> in,
                              std::span<double> out) {
    const int S = table.S;
    if (table.circulant) {
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int t = 0; t < S; ++t) acc += table.kernel[(s - t + S) % S] * in[t];
            out[s] = acc;
        }
    } else {
        std::fill(out.begin(), out.end(), 0.0);
        for (int from = 0; from < S; ++from) {
            const double w = in[from];
            const double* row = &table.matrix[static_cast<std::size_t>(from) * S];
            for (int to = 0; to < S; ++to) out[to] += w * row[to];
        }
    }
}

// --- forward recursions ------------------------------------------------------

namespace {

// Shared per-step machinery: state phasors, emission log-weights, and the
// chosen transition path.
struct RecursionContext {
    const TransitionTable* table;
    const PhaseQuantizer* quant;
    EmissionModel emission;
    std::vector<double> cos_s, sin_s;
    std::unique_ptr<CirculantConvolver> conv;  // null -> direct path

    RecursionContext(const TransitionTable& t, const PhaseQuantizer& q, const EmissionModel& e,
                     const RecursionOptions& opts)
        : table(&t), quant(&q), emission(e) {
        const int S = q.S;
        cos_s.resize(S);
        sin_s.resize(S);
        for (int s = 0; s < S; ++s) {
            cos_s[s] = std::cos(q.midpoints[s]);
            sin_s[s] = std::sin(q.midpoints[s]);
        }
        if (t.circulant && !opts.force_direct && S >= opts.fft_min_S)
            conv = std::make_unique<CirculantConvolver>(t);
        if (!(e.variance > 0.0) || !std::isfinite(e.variance) || !std::isfinite(e.mean_scale))
            throw std::invalid_argument("forward recursion: non-finite emission parameters");
    }

    void transition(std::span<const double> in, std::span<double> out) {
        if (conv)
            conv->apply(in, out);
        else
            apply_transitions_direct(*table, in, out);
    }

    // le[s] = -|y - mean_scale * x * e^{j s}|^2 / variance; returns max entry.
    double emission_logs(const cplx& y, const cplx& x, std::span<double> le) const {
        const int S = quant->S;
        const cplx m = emission.mean_scale * x;
        const double inv_v = 1.0 / emission.variance;
        const double base = -(std::norm(y) + std::norm(m)) * inv_v;
        const cplx w = y * std::conj(m);
        const double wr = 2.0 * w.real() * inv_v;
        const double wi = 2.0 * w.imag() * inv_v;
        double mx = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < S; ++s) {
            le[s] = base + wr * cos_s[s] + wi * sin_s[s];
            if (le[s] > mx) mx = le[s];
        }
        return mx;
    }
};

} // namespace

double forward_conditional(const std::vector<cplx>& x_samples, const std::vector<cplx>& y,
                           const TransitionTable& table, const PhaseQuantizer& q,
                           const EmissionModel& emission, const RecursionOptions& opts) {
    if (x_samples.size() != y.size())
        throw std::invalid_argument("forward_conditional: x/y length mismatch");
    if (table.S != q.S) throw std::invalid_argument("forward_conditional: table/quantizer mismatch");
    RecursionContext ctx(table, q, emission, opts);
    const int S = q.S;
    const double log_density_norm = std::log(kPi * emission.variance);

    std::vector<double> rho(S, 1.0 / S), pred(S), le(S);
    double log_q = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        ctx.transition(rho, pred);
        const double shift = ctx.emission_logs(y[k], x_samples[k], le);
        double c = 0.0;
        for (int s = 0; s < S; ++s) {
            rho[s] = std::exp(le[s] - shift) * pred[s];
            c += rho[s];
        }
        log_q += shift + std::log(c) - log_density_norm;
        const double inv_c = 1.0 / c;
        for (int s = 0; s < S; ++s) rho[s] *= inv_c;
    }
    return log_q;
}

double forward_marginal(const std::vector<SampleBlock>& y, const SymbolCandidates& cands,
                        const TransitionTable& table, const PhaseQuantizer& q,
                        const EmissionModel& emission, const RecursionOptions& opts) {
    if (y.empty()) throw std::invalid_argument("forward_marginal: empty observation sequence");
    if (cands.sample_means.empty() || cands.sample_means.size() != cands.prior.size())
        throw std::invalid_argument("forward_marginal: bad candidate set");
    RecursionContext ctx(table, q, emission, opts);
    const int S = q.S;
    const std::size_t n_cand = cands.sample_means.size();
    const std::size_t L = cands.sample_means[0].size();
    const double log_density_norm = std::log(kPi * emission.variance);

    std::vector<double> log_prior(n_cand);
    for (std::size_t c = 0; c < n_cand; ++c) log_prior[c] = std::log(cands.prior[c]);

    std::vector<double> psi(S, 1.0 / S), tmp(S), le(S);
    std::vector<std::vector<double>> u(n_cand, std::vector<double>(S));
    std::vector<double> log_corr(n_cand);
    double log_q = 0.0;

    for (const SampleBlock& block : y) {
        if (block.samples.size() != L)
            throw std::invalid_argument("forward_marginal: block length != candidate length");
        for (std::size_t c = 0; c < n_cand; ++c) {
            std::copy(psi.begin(), psi.end(), u[c].begin());
            double lc = log_prior[c];
            for (std::size_t l = 0; l < L; ++l) {
                ctx.transition(u[c], tmp);
                const double shift =
                    ctx.emission_logs(block.samples[l], cands.sample_means[c][l], le);
                double t = 0.0;
                for (int s = 0; s < S; ++s) {
                    u[c][s] = std::exp(le[s] - shift) * tmp[s];
                    t += u[c][s];
                }
                lc += shift + std::log(t) - log_density_norm;
                const double inv_t = 1.0 / t;
                for (int s = 0; s < S; ++s) u[c][s] *= inv_t;
            }
            log_corr[c] = lc;
        }
        const double m = *std::max_element(log_corr.begin(), log_corr.end());
        double ctot = 0.0;
        for (int s = 0; s < S; ++s) tmp[s] = 0.0;
        for (std::size_t c = 0; c < n_cand; ++c) {
            const double w = std::exp(log_corr[c] - m);
            for (int s = 0; s < S; ++s) tmp[s] += w * u[c][s];
        }
        for (int s = 0; s < S; ++s) ctot += tmp[s];
        log_q += m + std::log(ctot);
        const double inv = 1.0 / ctot;
        for (int s = 0; s < S; ++s) psi[s] = tmp[s] * inv;
    }
    return log_q;
}

SymbolKernel build_symbol_kernel(const SampleBlock& y_block, const std::vector<cplx>& sample_means,
                                 const TransitionTable& table, const PhaseQuantizer& q,
                                 const EmissionModel& emission, const RecursionOptions& opts) {
    if (y_block.samples.size() != sample_means.size())
        throw std::invalid_argument("build_symbol_kernel: block/candidate length mismatch");
    RecursionContext ctx(table, q, emission, opts);
    const int S = q.S;
    const std::size_t L = sample_means.size();
    const double log_density_norm = std::log(kPi * emission.variance);

    // Shared shift schedule so every column is scaled identically.
    std::vector<std::vector<double>> le(L, std::vector<double>(S));
    std::vector<double> shifts(L);
    for (std::size_t l = 0; l < L; ++l)
        shifts[l] = ctx.emission_logs(y_block.samples[l], sample_means[l], le[l]);

    SymbolKernel kern;
    kern.S = S;
    kern.chi.assign(static_cast<std::size_t>(S) * S, 0.0);
    kern.log_scale = 0.0;
    for (std::size_t l = 0; l < L; ++l) kern.log_scale += shifts[l] - log_density_norm;

    std::vector<double> col(S), tmp(S);
    for (int st = 0; st < S; ++st) {
        std::fill(col.begin(), col.end(), 0.0);
        col[st] = 1.0;
        for (std::size_t l = 0; l < L; ++l) {
            ctx.transition(col, tmp);
            for (int s = 0; s < S; ++s) col[s] = std::exp(le[l][s] - shifts[l]) * tmp[s];
        }
        for (int s = 0; s < S; ++s) kern.chi[static_cast<std::size_t>(s) * S + st] = col[s];
    }
    return kern;
}

// --- end-to-end estimators ----------------------------------------------------

namespace {

struct DecoderSetup {
    PhaseQuantizer quantizer;
    TransitionTable table;
    EmissionModel emission;
    std::vector<double> weights;  // per-sample pulse weights (empty -> symbol rate)
    SymbolCandidates candidates;
};

SymbolCandidates make_candidates(const Constellation& constellation, double P,
                                 const std::vector<double>& weights) {
    SymbolCandidates cands;
    const std::size_t m = constellation.points.size();
    const double scale = std::sqrt(P);
    cands.prior.assign(m, 1.0 / static_cast<double>(m));
    cands.sample_means.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
        if (weights.empty()) {
            cands.sample_means[c] = {constellation.points[c] * scale};
        } else {
            cands.sample_means[c].resize(weights.size());
            for (std::size_t l = 0; l < weights.size(); ++l)
                cands.sample_means[c][l] = constellation.points[c] * scale * weights[l];
        }
    }
    return cands;
}

DecoderSetup make_decoder(ModelKind model, const Constellation& constellation, const Pulse& pulse,
                          const ChannelConfig& config, int S) {
    DecoderSetup d;
    d.quantizer = build_quantizer(S);
    double sigmaW2 = 0.0;
    switch (model) {
        case ModelKind::MultisampleTrue:
        case ModelKind::MultisampleApprox:
            sigmaW2 = 2.0 * kPi * config.beta * config.delta();
            d.emission = {config.delta(), config.sigmaN2 * config.delta()};
            d.weights = per_sample_weights(pulse, config.L, config.Ts);
            break;
        case ModelKind::BaudRate:
            sigmaW2 = 2.0 * kPi * config.beta * config.Ts;
            d.emission = {1.0, config.sigmaN2 * config.Ts};
            d.weights.clear();
            break;
        case ModelKind::MatchedFilter:
            throw std::invalid_argument(
                "estimate_rate_lb: rate estimation for the matched-filter model is not supported");
    }
    // beta = 0 degenerates to the identity transition (delta limit).
    d.table = build_transitions(d.quantizer, sigmaW2 > 0.0 ? sigmaW2 : 1e-13);
    d.candidates = make_candidates(constellation, config.P, d.weights);
    return d;
}

// Per-sample conditional inputs matching the candidate convention.
std::vector<cplx> conditional_inputs(const std::vector<cplx>& symbols,
                                     const std::vector<double>& weights) {
    if (weights.empty()) return symbols;
    std::vector<cplx> x;
    x.reserve(symbols.size() * weights.size());
    for (const cplx& sym : symbols)
        for (double w : weights) x.push_back(sym * w);
    return x;
}

std::vector<cplx> flatten(const std::vector<SampleBlock>& blocks) {
    std::vector<cplx> y;
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.samples.size();
    y.reserve(total);
    for (const auto& b : blocks) y.insert(y.end(), b.samples.begin(), b.samples.end());
    return y;
}

double rate_bits_on_data(const std::vector<cplx>& symbols, const std::vector<SampleBlock>& blocks,
                         const DecoderSetup& d, const RecursionOptions& opts) {
    const std::vector<cplx> x = conditional_inputs(symbols, d.weights);
    const std::vector<cplx> y = flatten(blocks);
    const double log_cond = forward_conditional(x, y, d.table, d.quantizer, d.emission, opts);
    const double log_marg =
        forward_marginal(blocks, d.candidates, d.table, d.quantizer, d.emission, opts);
    return (log_cond - log_marg) / (static_cast<double>(symbols.size()) * kLn2);
}

RateEstimate summarize(std::vector<double> per_replica, std::uint64_t seed, double spread_tol) {
    RateEstimate est;
    est.per_replica = std::move(per_replica);
    est.seed = seed;
    const std::size_t n = est.per_replica.size();
    double mean = 0.0;
    for (double r : est.per_replica) mean += r;
    mean /= static_cast<double>(n);
    est.rate_bits = mean;
    if (n > 1) {
        double ss = 0.0;
        for (double r : est.per_replica) ss += (r - mean) * (r - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        est.std_error = sd / std::sqrt(static_cast<double>(n));
        est.spread_warning = sd > spread_tol;
    }
    return est;
}

// Runs fn(replica) on up to `workers` threads.
void parallel_replicas(int replicas, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, replicas);
    if (workers == 1) {
        for (int r = 0; r < replicas; ++r) fn(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= replicas) return;
                try {
                    fn(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

RateEstimate estimate_rate_lb(ModelKind model, const Constellation& constellation,
                              const Pulse& pulse, const ChannelConfig& config, int S,
                              std::size_t nsymb, std::uint64_t seed, const RateOptions& options) {
    config.validate();
    if (nsymb < 1) throw std::invalid_argument("estimate_rate_lb: nsymb must be >= 1");
    if (options.replicas < 1) throw std::invalid_argument("estimate_rate_lb: replicas must be >= 1");
    const DecoderSetup d = make_decoder(model, constellation, pulse, config, S);

    SimulateOptions sim_opts;
    sim_opts.initial_phase = options.initial_phase;

    std::vector<double> rates(options.replicas, 0.0);
    parallel_replicas(options.replicas, options.workers, [&](int r) {
        Stream stream(seed, static_cast<std::uint64_t>(r));
        const std::vector<cplx> symbols = draw_iud_symbols(constellation, nsymb, config.P, stream);
        const std::vector<SampleBlock> blocks =
            simulate(model, symbols, pulse, config, stream, sim_opts);
        rates[r] = rate_bits_on_data(symbols, blocks, d, options.recursion);
    });
    return summarize(std::move(rates), seed, options.spread_tolerance);
}

RateEstimate estimate_rate_lb_replayed(const DumpData& data, const Constellation& constellation,
                                       const Pulse& pulse, int S, int n_sections,
                                       const RecursionOptions& opts) {
    if (data.symbols.empty()) throw std::invalid_argument("estimate_rate_lb_replayed: empty dump");
    if (n_sections < 1) n_sections = 1;
    ChannelConfig config;
    config.beta = data.header.beta;
    config.Ts = data.header.Ts;
    config.L = static_cast<int>(data.header.L);
    config.L_sim = config.L;  // fine grid is irrelevant for replay
    config.sigmaN2 = data.header.sigmaN2;
    config.P = data.header.P;
    const ModelKind model = config.L > 1 ? ModelKind::MultisampleTrue : ModelKind::BaudRate;
    const DecoderSetup d = make_decoder(model, constellation, pulse, config, S);

    const std::size_t nsymb = data.symbols.size();
    const std::size_t n_sec = std::min<std::size_t>(n_sections, nsymb);
    std::vector<double> rates(n_sec);
    for (std::size_t sec = 0; sec < n_sec; ++sec) {
        const std::size_t lo = sec * nsymb / n_sec;
        const std::size_t hi = (sec + 1) * nsymb / n_sec;
        const std::vector<cplx> symbols(data.symbols.begin() + lo, data.symbols.begin() + hi);
        const std::vector<SampleBlock> blocks(data.blocks.begin() + lo, data.blocks.begin() + hi);
        rates[sec] = rate_bits_on_data(symbols, blocks, d, opts);
    }
    return summarize(std::move(rates), data.header.config_hash, 0.1);
}

RateEstimate estimate_rate_lb_mtr(const Constellation& constellation, const ChannelConfig& config,
                                  int S, std::size_t n_train, std::size_t nsymb,
                                  std::uint64_t seed, const RateOptions& options) {
    config.validate();
    if (n_train < 2) throw std::invalid_argument("estimate_rate_lb_mtr: n_train must be >= 2");
    const PhaseQuantizer quantizer = build_quantizer(S);
    const Pulse pulse = Pulse::square();
    const int L = config.L;
    const double delta = config.delta();

    // Training pass: quantize the per-symbol aggregate phasor of a sample-rate
    // phase path and count state transitions.
    std::vector<std::vector<std::uint64_t>> counts(
        S, std::vector<std::uint64_t>(static_cast<std::size_t>(S), 0));
    {
        Stream train_stream = Stream(seed, 0).fork(0x4d5452u);  // disjoint from data streams
        ChannelConfig train_cfg = config;
        PhasePath path =
            sample_wiener_path(train_cfg, n_train * static_cast<std::size_t>(L) - 1, delta,
                               train_stream);
        if (options.initial_phase) {
            const double shift = *options.initial_phase - path.cumulative[0];
            for (double& c : path.cumulative) c += shift;
        }
        int prev = -1;
        std::size_t node = 0;
        for (std::size_t m = 0; m < n_train; ++m) {
            cplx agg{0.0, 0.0};
            for (int l = 0; l < L; ++l, ++node) {
                const double ph = path.cumulative[node];
                agg += cplx{std::cos(ph), std::sin(ph)};
            }
            const int idx = quantizer.index_of(std::arg(agg));
            if (prev >= 0) ++counts[prev][idx];
            prev = idx;
        }
    }
    const TransitionTable table = transitions_from_counts(counts);

    // Decoder on the symbol-rate aggregate: V_m = sum of the symbol's samples,
    // signal gain Delta * sum g(l Delta) = sqrt(Ts), noise variance sigmaN2*Ts.
    DecoderSetup d;
    d.quantizer = quantizer;
    d.table = table;
    d.emission = {std::sqrt(config.Ts), config.sigmaN2 * config.Ts};
    d.weights.clear();
    d.candidates = make_candidates(constellation, config.P, d.weights);

    SimulateOptions sim_opts;
    sim_opts.initial_phase = options.initial_phase;

    std::vector<double> rates(options.replicas, 0.0);
    parallel_replicas(options.replicas, options.workers, [&](int r) {
        Stream stream(seed, static_cast<std::uint64_t>(r));
        const std::vector<cplx> symbols = draw_iud_symbols(constellation, nsymb, config.P, stream);
        const std::vector<SampleBlock> fine_blocks =
            simulate(ModelKind::MultisampleApprox, symbols, pulse, config, stream, sim_opts);
        std::vector<SampleBlock> agg(nsymb);
        for (std::size_t m = 0; m < nsymb; ++m) {
            cplx v{0.0, 0.0};
            for (const cplx& s : fine_blocks[m].samples) v += s;
            agg[m].samples = {v};
        }
        rates[r] = rate_bits_on_data(symbols, agg, d, options.recursion);
    });
    return summarize(std::move(rates), seed, options.spread_tolerance);
}

} // namespace pnw
