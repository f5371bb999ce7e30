// Command-line front end: simulation dumps, rate lower bounds, closed-form
// moments, analytic bound curves, sweep orchestration, and the validation
// suites. All estimates are seeded and reproducible; CSV output carries the
// config hash in its header.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnw/bounds.hpp"
#include "pnw/channel.hpp"
#include "pnw/estimator.hpp"
#include "pnw/phase_noise.hpp"
#include "pnw/signal.hpp"
#include "pnw/sweep.hpp"

namespace {

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + out_path);
    out << text;
}

pnw::KeyValueConfig merged_config(const std::string& config_path,
                                  const std::vector<std::string>& sets) {
    pnw::KeyValueConfig cfg;
    if (!config_path.empty()) cfg = pnw::load_config_file(config_path);
    pnw::KeyValueConfig overrides;
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got " + kv);
        pnw::KeyValueConfig one = pnw::parse_config_text(kv);
        pnw::merge_overrides(overrides, one);
    }
    pnw::merge_overrides(cfg, overrides);
    return cfg;
}

int run_validate() {
    int failures = 0;
    const auto report = [&](const std::string& name, bool pass, double margin) {
        std::printf("%-64s %s  (margin %.3e)\n", name.c_str(), pass ? "PASS" : "FAIL", margin);
        if (!pass) ++failures;
    };

    const pnw::PropertyReport ineq = pnw::appendixB_property_suite();
    for (const pnw::PropertyCheck& c : ineq.checks) report(c.name, c.pass, c.margin);

    // Moment limit recovery at small Delta.
    {
        const double beta = 0.5;
        const pnw::MomentLimits lim = pnw::moment_limits(beta);
        // The cubic-order limit holds along the full-rate schedule L = 1/Delta
        // (symbol interval 1), where Var(G) = Var(|F1|^2) * Delta.
        const double delta = std::pow(2.0, -12);
        const pnw::MomentReport m = pnw::closed_form_moments(beta, delta, 1 << 12);
        const double r1 = m.var_g / (delta * delta * delta) / lim.var_g_over_delta3;
        const double gap = (m.eg - 1.0) * (m.eg - 1.0) / (delta * delta);
        const double r2 = gap / lim.eg_gap_sq_over_delta2;
        report("Var(G) cubic-order limit ratio", std::abs(r1 - 1.0) < 0.01,
               0.01 - std::abs(r1 - 1.0));
        report("(E[G]-1)^2 quadratic-order limit ratio", std::abs(r2 - 1.0) < 0.01,
               0.01 - std::abs(r2 - 1.0));
    }

    // Transition table sanity: row sums and FFT/direct agreement.
    {
        const pnw::PhaseQuantizer q = pnw::build_quantizer(64);
        const pnw::TransitionTable t = pnw::build_transitions(q, 0.05);
        double worst = 0.0;
        for (int from = 0; from < 64; ++from) {
            double s = 0.0;
            for (int to = 0; to < 64; ++to) s += t.q(to, from);
            worst = std::max(worst, std::abs(s - 1.0));
        }
        report("transition rows sum to 1", worst < 1e-12, 1e-12 - worst);

        pnw::CirculantConvolver conv(t);
        std::vector<double> in(64), fft_out(64), direct_out(64);
        pnw::Stream rng(7, 0);
        for (double& v : in) v = rng.uniform01();
        conv.apply(in, fft_out);
        pnw::apply_transitions_direct(t, in, direct_out);
        double diff = 0.0;
        for (int s = 0; s < 64; ++s) diff = std::max(diff, std::abs(fft_out[s] - direct_out[s]));
        report("FFT and direct transition steps agree", diff < 1e-12, 1e-12 - diff);
    }

    std::printf("%s\n", failures == 0 ? "all checks passed" : "SOME CHECKS FAILED");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiener phase-noise waveform channel workbench"};
    app.require_subcommand(1);

    // Shared options are registered per-subcommand so each help page is
    // self-contained.
    std::string config_path, out_path;
    std::vector<std::string> sets;

    // --- simulate ------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "simulate a model and write a sample dump");
    std::string sim_model = "multisample-true", sim_const = "qpsk", sim_pulse = "square";
    double sim_snr_db = 10.0, sim_fhwhm = 0.0;
    int sim_L = 1, sim_Lsim = 1024;
    std::size_t sim_nsymb = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    std::optional<double> sim_phase0;
    sim->add_option("--model", sim_model, "multisample-true|multisample-approx|baud-rate");
    sim->add_option("--constellation", sim_const, "qpsk|16qam|16psk");
    sim->add_option("--pulse", sim_pulse, "square|cos2");
    sim->add_option("--snr-db", sim_snr_db, "SNR in dB");
    sim->add_option("--fhwhm-ts", sim_fhwhm, "half linewidth times symbol time");
    sim->add_option("--l", sim_L, "receiver samples per symbol");
    sim->add_option("--lsim", sim_Lsim, "fine simulation grid per symbol");
    sim->add_option("--nsymb", sim_nsymb, "number of symbols");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--initial-phase", sim_phase0, "pin the initial phase (radians)");
    sim->add_option("--out", sim_out, "dump file path")->required();

    // --- rate-lb -------------------------------------------------------------
    auto* rate = app.add_subcommand("rate-lb", "estimate an information-rate lower bound");
    std::string rate_model = "multisample-true", rate_const = "qpsk", rate_pulse = "square";
    double rate_snr_db = 10.0, rate_fhwhm = 0.0;
    int rate_L = 1, rate_S = 32, rate_Lsim = 1024, rate_replicas = 4, rate_workers = 0;
    int rate_sections = 4;
    std::size_t rate_nsymb = 1000, rate_ntrain = 10000;
    std::uint64_t rate_seed = 1;
    std::string rate_replay;
    std::optional<double> rate_phase0;
    rate->add_option("--model", rate_model,
                     "multisample-true|multisample-approx|baud-rate|mtr");
    rate->add_option("--constellation", rate_const, "qpsk|16qam|16psk");
    rate->add_option("--pulse", rate_pulse, "square|cos2");
    rate->add_option("--snr-db", rate_snr_db, "SNR in dB");
    rate->add_option("--fhwhm-ts", rate_fhwhm, "half linewidth times symbol time");
    rate->add_option("--l", rate_L, "receiver samples per symbol");
    rate->add_option("--s", rate_S, "phase quantizer states");
    rate->add_option("--lsim", rate_Lsim, "fine simulation grid per symbol");
    rate->add_option("--nsymb", rate_nsymb, "number of symbols per replica");
    rate->add_option("--replicas", rate_replicas, "independent replicas");
    rate->add_option("--workers", rate_workers, "worker threads (0 = hardware)");
    rate->add_option("--n-train", rate_ntrain, "training symbols (mtr model)");
    rate->add_option("--seed", rate_seed, "random seed");
    rate->add_option("--initial-phase", rate_phase0, "pin the initial phase (radians)");
    rate->add_option("--replay", rate_replay, "decode a dump file instead of simulating");
    rate->add_option("--sections", rate_sections, "std-error sections in replay mode");

    // --- moments ---------------------------------------------------------------
    auto* mom = app.add_subcommand("moments", "closed-form filter-factor moments");
    double mom_fhwhm = 0.0;
    int mom_L = 16;
    mom->add_option("--fhwhm-ts", mom_fhwhm, "half linewidth times symbol time")->required();
    mom->add_option("--l", mom_L, "samples per symbol");

    // --- bounds -----------------------------------------------------------------
    auto* bnd = app.add_subcommand("bounds", "analytic lower-bound curves as CSV");
    bool bnd_bits = false, bnd_nats = false, bnd_clamp = false;
    std::string bnd_schedule;
    bnd->add_option("--config", config_path, "key=value config file");
    bnd->add_option("--set", sets, "override config entries (key=value)");
    bnd->add_option("--schedule", bnd_schedule, "fixed|sqrt|cbrt");
    bnd->add_flag("--bits", bnd_bits, "emit bits (default)");
    bnd->add_flag("--nats", bnd_nats, "emit nats");
    bnd->add_flag("--clamp", bnd_clamp, "floor negative bound values at zero");
    bnd->add_option("--out", out_path, "output file (default stdout)");

    // --- sweep -----------------------------------------------------------------
    auto* swp = app.add_subcommand("sweep", "rate-estimate sweep over (snr, L, S) grids");
    std::optional<std::uint64_t> swp_seed;
    std::optional<int> swp_workers;
    swp->add_option("--config", config_path, "key=value config file");
    swp->add_option("--set", sets, "override config entries (key=value)");
    swp->add_option("--seed", swp_seed, "override the seed");
    swp->add_option("--workers", swp_workers, "override the worker budget");
    swp->add_option("--out", out_path, "output file (default stdout)");

    // --- validate ---------------------------------------------------------------
    app.add_subcommand("validate", "run the numerical property suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            pnw::ChannelConfig config;
            config.beta = 2.0 * sim_fhwhm;
            config.Ts = 1.0;
            config.L = sim_L;
            config.L_sim = std::max(sim_Lsim, sim_L);
            if (config.L_sim % sim_L != 0) config.L_sim = (config.L_sim / sim_L + 1) * sim_L;
            config.sigmaN2 = 1.0;
            config.P = std::pow(10.0, sim_snr_db / 10.0);
            config.validate();

            const pnw::Constellation constel = pnw::Constellation::by_name(sim_const);
            const pnw::Pulse pulse = pnw::Pulse::by_name(sim_pulse);
            pnw::Stream stream(sim_seed, 0);
            const std::vector<pnw::cplx> symbols =
                pnw::draw_iud_symbols(constel, sim_nsymb, config.P, stream);
            pnw::SimulateOptions opts;
            opts.initial_phase = sim_phase0;
            const std::vector<pnw::SampleBlock> blocks = pnw::simulate(
                pnw::model_by_name(sim_model), symbols, pulse, config, stream, opts);

            pnw::KeyValueConfig echo;
            echo["model"] = sim_model;
            echo["constellation"] = sim_const;
            echo["pulse"] = sim_pulse;
            echo["snr_db"] = std::to_string(sim_snr_db);
            echo["fhwhm_ts"] = std::to_string(sim_fhwhm);
            echo["l"] = std::to_string(sim_L);
            echo["nsymb"] = std::to_string(sim_nsymb);
            echo["seed"] = std::to_string(sim_seed);
            pnw::dump_samples(sim_out, symbols, blocks, config, pulse.kind(),
                              pnw::config_hash(echo));
            std::printf("wrote %zu symbols x %d samples to %s\n", symbols.size(), sim_L,
                        sim_out.c_str());
        } else if (rate->parsed()) {
            pnw::RateEstimate est;
            if (!rate_replay.empty()) {
                const pnw::DumpData data = pnw::load_samples(rate_replay);
                est = pnw::estimate_rate_lb_replayed(data, pnw::Constellation::by_name(rate_const),
                                                     pnw::Pulse::by_name(rate_pulse), rate_S,
                                                     rate_sections);
            } else {
                pnw::ChannelConfig config;
                config.beta = 2.0 * rate_fhwhm;
                config.Ts = 1.0;
                config.L = rate_L;
                config.L_sim = std::max(rate_Lsim, rate_L);
                if (config.L_sim % rate_L != 0)
                    config.L_sim = (config.L_sim / rate_L + 1) * rate_L;
                config.sigmaN2 = 1.0;
                config.P = std::pow(10.0, rate_snr_db / 10.0);

                pnw::RateOptions opts;
                opts.replicas = rate_replicas;
                opts.workers = rate_workers;
                opts.initial_phase = rate_phase0;
                const pnw::Constellation constel = pnw::Constellation::by_name(rate_const);
                if (rate_model == "mtr") {
                    est = pnw::estimate_rate_lb_mtr(constel, config, rate_S, rate_ntrain,
                                                    rate_nsymb, rate_seed, opts);
                } else {
                    est = pnw::estimate_rate_lb(pnw::model_by_name(rate_model), constel,
                                                pnw::Pulse::by_name(rate_pulse), config, rate_S,
                                                rate_nsymb, rate_seed, opts);
                }
            }
            std::printf("rate_lb_bits %.6f\n", est.rate_bits);
            std::printf("std_error    %.6f\n", est.std_error);
            for (std::size_t r = 0; r < est.per_replica.size(); ++r)
                std::printf("replica[%zu]   %.6f\n", r, est.per_replica[r]);
            if (est.spread_warning)
                std::printf("warning: replica spread exceeds tolerance; results may be "
                            "under-converged\n");
        } else if (mom->parsed()) {
            const double beta = 2.0 * mom_fhwhm;
            const double delta = 1.0 / mom_L;
            const pnw::MomentReport m = pnw::closed_form_moments(beta, delta, mom_L);
            const pnw::MomentLimits lim = pnw::moment_limits(beta);
            std::printf("a (= exp(-pi beta Delta))  %.12g\n", m.a);
            std::printf("E[F1]                      %.12g\n", m.ef1);
            std::printf("E[|F1|^2]                  %.12g\n", m.ef1_sq);
            std::printf("E[|F1|^4]                  %.12g\n", m.ef1_4);
            std::printf("Var(F1)                    %.12g\n", m.var_f1);
            std::printf("Var(|F1|^2)                %.12g\n", m.var_f1sq);
            std::printf("E[G]                       %.12g\n", m.eg);
            std::printf("Var(G)                     %.12g\n", m.var_g);
            std::printf("E[(G-1)^2]                 %.12g\n", m.ms_g_minus_1);
            std::printf("lim Var(G)/Delta^3 * L     %.12g\n", lim.var_g_over_delta3);
            std::printf("lim (E[G]-1)^2/Delta^2     %.12g\n", lim.eg_gap_sq_over_delta2);
        } else if (bnd->parsed()) {
            pnw::KeyValueConfig cfg = merged_config(config_path, sets);
            pnw::BoundsSpec spec = pnw::bounds_spec_from_config(cfg);
            if (!bnd_schedule.empty()) spec.schedule = bnd_schedule;
            if (bnd_bits && bnd_nats)
                throw std::invalid_argument("--bits and --nats are mutually exclusive");
            if (bnd_nats) spec.bits = false;
            if (bnd_bits) spec.bits = true;
            spec.clamp_negative = bnd_clamp;
            write_output(out_path, pnw::run_bounds(spec));
        } else if (swp->parsed()) {
            pnw::KeyValueConfig cfg = merged_config(config_path, sets);
            pnw::SweepSpec spec = pnw::sweep_spec_from_config(cfg);
            if (swp_seed) spec.seed = *swp_seed;
            if (swp_workers) spec.workers = *swp_workers;
            write_output(out_path, pnw::run_sweep(spec));
        } else {
            return run_validate();
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
