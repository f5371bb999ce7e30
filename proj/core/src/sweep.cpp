#include "pnw/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pnw/bounds.hpp"
#include "pnw/estimator.hpp"

namespace pnw {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for '" + key + "': " + v);
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for '" + key + "': " + v);
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const std::string& tok : split_list(v)) out.push_back(parse_double(key, tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const std::string& tok : split_list(v))
        out.push_back(static_cast<int>(parse_int(key, tok)));
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean value for '" + key + "': " + v);
}

// Union of the keys either spec understands, so one file can drive both the
// sweep and the bound curves while typos still fail loudly.
const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "model",     "constellation", "pulse",   "snr_db",  "l",        "s",
        "fhwhm_ts",  "nsymb",         "replicas", "seed",   "workers",  "lsim",
        "guard_cap", "timing",        "n_train", "initial_phase", "schedule", "units",
    };
    return keys;
}

void check_keys(const KeyValueConfig& cfg) {
    for (const auto& [k, v] : cfg)
        if (!known_keys().count(k))
            throw std::invalid_argument("config: unknown key '" + k + "'");
}

} // namespace

KeyValueConfig parse_config_text(const std::string& text) {
    KeyValueConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key on line " +
                                                     std::to_string(lineno));
        cfg[key] = value;
    }
    return cfg;
}

KeyValueConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void merge_overrides(KeyValueConfig& base, const KeyValueConfig& over) {
    for (const auto& [k, v] : over) base[k] = v;
}

std::string canonical_config_string(const KeyValueConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::uint64_t config_hash(const KeyValueConfig& cfg) {
    const std::string s = canonical_config_string(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

SweepSpec sweep_spec_from_config(const KeyValueConfig& cfg) {
    check_keys(cfg);
    SweepSpec spec;
    for (const auto& [k, v] : cfg) {
        if (k == "model") spec.model = v;
        else if (k == "constellation") spec.constellation = v;
        else if (k == "pulse") spec.pulse = v;
        else if (k == "snr_db") spec.snr_db = parse_double_list(k, v);
        else if (k == "l") spec.L_grid = parse_int_list(k, v);
        else if (k == "s") spec.S_grid = parse_int_list(k, v);
        else if (k == "fhwhm_ts") spec.fhwhm_ts = parse_double(k, v);
        else if (k == "nsymb") spec.nsymb = static_cast<std::size_t>(parse_int(k, v));
        else if (k == "replicas") spec.replicas = static_cast<int>(parse_int(k, v));
        else if (k == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(k, v));
        else if (k == "workers") spec.workers = static_cast<int>(parse_int(k, v));
        else if (k == "lsim") spec.L_sim = static_cast<int>(parse_int(k, v));
        else if (k == "guard_cap") spec.guard_cap = parse_double(k, v);
        else if (k == "timing") spec.timing = parse_bool(k, v);
        else if (k == "n_train") spec.n_train = static_cast<std::size_t>(parse_int(k, v));
        else if (k == "initial_phase") spec.initial_phase = parse_double(k, v);
        // schedule/units belong to the bounds spec; ignore here.
    }
    return spec;
}

BoundsSpec bounds_spec_from_config(const KeyValueConfig& cfg) {
    check_keys(cfg);
    BoundsSpec spec;
    for (const auto& [k, v] : cfg) {
        if (k == "snr_db") spec.snr_db = parse_double_list(k, v);
        else if (k == "schedule") spec.schedule = v;
        else if (k == "l") spec.L_grid = parse_int_list(k, v);
        else if (k == "fhwhm_ts") spec.fhwhm_ts = parse_double(k, v);
        else if (k == "units") {
            if (v == "bits") spec.bits = true;
            else if (v == "nats") spec.bits = false;
            else throw std::invalid_argument("config: units must be bits or nats, got " + v);
        }
    }
    return spec;
}

namespace {

KeyValueConfig sweep_spec_echo(const SweepSpec& s) {
    KeyValueConfig cfg;
    cfg["model"] = s.model;
    cfg["constellation"] = s.constellation;
    cfg["pulse"] = s.pulse;
    std::string snr, lg, sg;
    for (double v : s.snr_db) snr += (snr.empty() ? "" : ",") + fmt(v);
    for (int v : s.L_grid) lg += (lg.empty() ? "" : ",") + std::to_string(v);
    for (int v : s.S_grid) sg += (sg.empty() ? "" : ",") + std::to_string(v);
    cfg["snr_db"] = snr;
    cfg["l"] = lg;
    cfg["s"] = sg;
    cfg["fhwhm_ts"] = fmt(s.fhwhm_ts);
    cfg["nsymb"] = std::to_string(s.nsymb);
    cfg["replicas"] = std::to_string(s.replicas);
    cfg["seed"] = std::to_string(s.seed);
    cfg["lsim"] = std::to_string(s.L_sim);
    cfg["n_train"] = std::to_string(s.n_train);
    if (s.initial_phase) cfg["initial_phase"] = fmt(*s.initial_phase);
    return cfg;
}

struct SweepCell {
    double snr_db;
    int L;
    int S;
};

RateEstimate run_cell(const SweepSpec& spec, const SweepCell& cell, const Constellation& constel,
                      const Pulse& pulse, int cell_workers) {
    ChannelConfig config;
    config.beta = 2.0 * spec.fhwhm_ts;  // full linewidth, symbol time 1
    config.Ts = 1.0;
    config.L = cell.L;
    config.L_sim = std::max(spec.L_sim, cell.L);
    if (config.L_sim % cell.L != 0)
        config.L_sim = (config.L_sim / cell.L + 1) * cell.L;
    config.sigmaN2 = 1.0;
    config.P = std::pow(10.0, cell.snr_db / 10.0);

    RateOptions opts;
    opts.replicas = spec.replicas;
    opts.workers = cell_workers;
    opts.initial_phase = spec.initial_phase;

    if (spec.model == "mtr")
        return estimate_rate_lb_mtr(constel, config, cell.S, spec.n_train, spec.nsymb, spec.seed,
                                    opts);
    return estimate_rate_lb(model_by_name(spec.model), constel, pulse, config, cell.S, spec.nsymb,
                            spec.seed, opts);
}

} // namespace

std::string run_sweep(const SweepSpec& spec) {
    if (spec.snr_db.empty() || spec.L_grid.empty() || spec.S_grid.empty())
        throw std::invalid_argument("run_sweep: snr_db, L and S grids must be non-empty");
    if (spec.replicas < 1) throw std::invalid_argument("run_sweep: replicas must be >= 1");
    if (spec.nsymb < 1) throw std::invalid_argument("run_sweep: nsymb must be >= 1");

    const Constellation constel = Constellation::by_name(spec.constellation);
    const Pulse pulse = Pulse::by_name(spec.pulse);

    std::vector<SweepCell> cells;
    for (double snr_db : spec.snr_db)
        for (int L : spec.L_grid)
            for (int S : spec.S_grid) {
                const double projected =
                    static_cast<double>(S) * static_cast<double>(spec.nsymb) * L;
                if (projected > spec.guard_cap)
                    throw std::runtime_error(
                        "run_sweep: resource guard: cell (snr_db=" + fmt(snr_db) +
                        ", L=" + std::to_string(L) + ", S=" + std::to_string(S) +
                        ") projects S*nsymb*L = " + fmt(projected) + " > cap " +
                        fmt(spec.guard_cap) + "; raise guard_cap or shrink the grid");
                cells.push_back({snr_db, L, S});
            }

    std::vector<RateEstimate> results(cells.size());
    std::vector<double> wall_ms(cells.size(), 0.0);

    const auto run_one = [&](std::size_t i, int cell_workers) {
        const auto t0 = std::chrono::steady_clock::now();
        results[i] = run_cell(spec, cells[i], constel, pulse, cell_workers);
        const auto t1 = std::chrono::steady_clock::now();
        wall_ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    int workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (cells.size() == 1) {
        // A single cell parallelizes over its replicas instead.
        run_one(0, workers);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        const int n_threads = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(workers), cells.size()));
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    try {
                        run_one(i, 1);
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

    const KeyValueConfig echo = sweep_spec_echo(spec);
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(echo)));

    std::string out;
    out += "# pnw-sweep v1 config_hash=";
    out += hash_buf;
    out += "\n";
    for (const auto& [k, v] : echo) out += "# " + k + "=" + v + "\n";
    out += "snr_db,L,S,replica,rate_bits,std_error_bits,seed";
    if (spec.timing) out += ",wall_ms";
    out += "\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (int r = 0; r < spec.replicas; ++r) {
            out += fmt(cells[i].snr_db) + "," + std::to_string(cells[i].L) + "," +
                   std::to_string(cells[i].S) + "," + std::to_string(r) + "," +
                   fmt(results[i].per_replica[r]) + "," + fmt(results[i].std_error) + "," +
                   std::to_string(spec.seed);
            if (spec.timing) out += "," + fmt(wall_ms[i]);
            out += "\n";
        }
    }
    return out;
}

std::string run_bounds(const BoundsSpec& spec) {
    if (spec.snr_db.empty()) throw std::invalid_argument("run_bounds: snr_db grid must be non-empty");
    if (spec.schedule != "fixed" && spec.schedule != "sqrt" && spec.schedule != "cbrt")
        throw std::invalid_argument("run_bounds: schedule must be fixed, sqrt or cbrt");
    if (spec.schedule == "fixed" && spec.L_grid.empty())
        throw std::invalid_argument("run_bounds: fixed schedule needs a non-empty L grid");
    const double beta = 2.0 * spec.fhwhm_ts;
    if (spec.schedule != "fixed" && !(beta > 0.0))
        throw std::invalid_argument("run_bounds: sqrt/cbrt schedules need fhwhm_ts > 0");

    KeyValueConfig echo;
    echo["schedule"] = spec.schedule;
    echo["fhwhm_ts"] = fmt(spec.fhwhm_ts);
    echo["units"] = spec.bits ? "bits" : "nats";
    if (spec.clamp_negative) echo["clamp"] = "1";
    {
        std::string lg;
        for (int v : spec.L_grid) lg += (lg.empty() ? "" : ",") + std::to_string(v);
        echo["l"] = lg;
        std::string snr;
        for (double v : spec.snr_db) snr += (snr.empty() ? "" : ",") + fmt(v);
        echo["snr_db"] = snr;
    }
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(echo)));

    const double unit = spec.bits ? 1.0 / std::numbers::ln2 : 1.0;

    std::string out;
    out += "# pnw-bounds v1 config_hash=";
    out += hash_buf;
    out += "\n";
    for (const auto& [k, v] : echo) out += "# " + k + "=" + v + "\n";
    out += "snr_db,schedule,L,Delta,bound,value,components\n";

    const auto emit = [&](double snr_db, int L, double Delta, const std::string& name,
                          const BoundReport& rep) {
        std::string comps;
        for (const BoundTerm& t : rep.components) {
            if (!comps.empty()) comps += ";";
            comps += t.label + "=" + fmt(t.nats * unit);
        }
        double value = rep.value_nats * unit;
        if (spec.clamp_negative && value < 0.0) value = 0.0;
        out += fmt(snr_db) + "," + spec.schedule + "," + std::to_string(L) + "," + fmt(Delta) +
               "," + name + "," + fmt(value) + "," + comps + "\n";
    };

    for (double snr_db : spec.snr_db) {
        const double snr = std::pow(10.0, snr_db / 10.0);
        std::vector<int> Ls;
        if (spec.schedule == "fixed") {
            Ls = spec.L_grid;
        } else if (spec.schedule == "sqrt") {
            Ls = {std::max(1, static_cast<int>(std::ceil(beta * std::sqrt(snr))))};
        } else {
            Ls = {std::max(1, static_cast<int>(std::ceil(std::cbrt(beta * beta * snr))))};
        }
        for (int L : Ls) {
            const double Delta = 1.0 / L;
            // The cubic-root schedule tracks the mean-compensated variant; the
            // plain bound diverges along it.
            const BoundReport amp = spec.schedule == "cbrt"
                                        ? amplitude_lb_finite_centered(snr, Delta, beta)
                                        : amplitude_lb_finite(snr, Delta, beta);
            emit(snr_db, L, Delta,
                 spec.schedule == "cbrt" ? "amplitude-centered" : "amplitude", amp);
            for (AlphaChoice choice : {AlphaChoice::SnrDelta, AlphaChoice::Optimal}) {
                const char* name =
                    choice == AlphaChoice::SnrDelta ? "phase-snrdelta" : "phase-optimal";
                try {
                    emit(snr_db, L, Delta, name, phase_lb_finite(snr, Delta, beta, choice));
                } catch (const std::domain_error&) {
                    out += fmt(snr_db) + "," + spec.schedule + "," + std::to_string(L) + "," +
                           fmt(Delta) + "," + name + ",,out-of-domain\n";
                }
            }
        }
    }
    return out;
}

} // namespace pnw
