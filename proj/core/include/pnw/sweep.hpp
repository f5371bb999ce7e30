#pragma once

// Experiment orchestration: flat key=value configuration, rate-estimate sweeps
// over (snr, L, S) grids, and analytic bound curves, all emitted as CSV with a
// config hash in the header. Sweeps are deterministic given the seed; wall
// times are optional because they would break byte-level reproducibility.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pnw {

// Flat key=value configuration. Lines are `key = value`; '#' starts a
// comment; later assignments win within one source.
using KeyValueConfig = std::map<std::string, std::string>;

KeyValueConfig parse_config_text(const std::string& text);
KeyValueConfig load_config_file(const std::string& path);

// CLI > file > defaults: entries of `over` replace entries of `base`.
void merge_overrides(KeyValueConfig& base, const KeyValueConfig& over);

// Canonical serialization (sorted keys, one per line) and its FNV-1a hash;
// the hash is embedded in every CSV header.
std::string canonical_config_string(const KeyValueConfig& cfg);
std::uint64_t config_hash(const KeyValueConfig& cfg);

struct SweepSpec {
    std::string model = "multisample-true";  // multisample-true|multisample-approx|baud-rate|mtr
    std::string constellation = "qpsk";
    std::string pulse = "square";
    std::vector<double> snr_db;   // non-empty
    std::vector<int> L_grid;      // non-empty
    std::vector<int> S_grid;      // non-empty
    double fhwhm_ts = 0.0;        // half linewidth times symbol time (beta Ts = 2 fhwhm_ts)
    std::size_t nsymb = 1000;
    int replicas = 4;
    std::uint64_t seed = 1;
    int workers = 0;              // 0: hardware concurrency
    int L_sim = 1024;             // fine simulation grid per symbol (rounded up to a multiple of L)
    double guard_cap = 1e9;       // refuse cells with S * nsymb * L above this
    bool timing = false;          // add a wall_ms column (non-deterministic)
    std::size_t n_train = 10000;  // training symbols for the mtr model
    std::optional<double> initial_phase;
};

struct BoundsSpec {
    std::vector<double> snr_db;      // non-empty
    std::string schedule = "fixed";  // fixed | sqrt | cbrt
    std::vector<int> L_grid = {1};   // used by the fixed schedule
    double fhwhm_ts = 0.0;
    bool bits = true;                // false: emit nats
    bool clamp_negative = false;     // CLI-level option: floor bound values at 0
};

// Builders from a merged key=value config; unknown keys are an error so typos
// fail loudly.
SweepSpec sweep_spec_from_config(const KeyValueConfig& cfg);
BoundsSpec bounds_spec_from_config(const KeyValueConfig& cfg);

// One row per (snr_db, L, S, replica); cells run in parallel, rows are emitted
// in deterministic order. Throws on an empty grid or a cell that exceeds the
// resource guard.
std::string run_sweep(const SweepSpec& spec);

// Analytic bound curves over the snr grid under the chosen L-schedule.
std::string run_bounds(const BoundsSpec& spec);

} // namespace pnw
