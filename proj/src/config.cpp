#include "bsyk/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bsyk {

using nlohmann::json;

int SimConfig::n_steps() const { return (int)std::llround(t_max / dt); }

std::vector<int> SimConfig::checkpoint_steps() const {
    std::vector<int> steps;
    const int ns = n_steps();
    if (checkpoints.empty()) {
        const int count = std::max(2, checkpoint_count);
        for (int k = 0; k < count; ++k)
            steps.push_back((int)std::llround(double(ns) * k / (count - 1)));
    } else {
        for (double t : checkpoints) steps.push_back((int)std::llround(t / dt));
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> errs;
    if (n_modes < 2 || n_modes > 5)
        errs.push_back("N: must be in [2, 5] (dense desk scale, 2N <= 10 modes)");
    if (!(coupling_j >= 0.0)) errs.push_back("J: must be >= 0");
    if (!(gamma >= 0.0)) errs.push_back("gamma: must be >= 0");
    if (!(dt > 0.0)) errs.push_back("dt: must be > 0");
    if (coupling_j * dt > 0.05 + 1e-12)
        errs.push_back("dt: J*dt = " + std::to_string(coupling_j * dt) + " exceeds stability guard 0.05");
    if (gamma * dt > 0.05 + 1e-12)
        errs.push_back("dt: gamma*dt = " + std::to_string(gamma * dt) + " exceeds stability guard 0.05");
    if (!(t_max > 0.0)) errs.push_back("t_max: must be > 0");
    if (n_traj < 1) errs.push_back("n_traj: must be >= 1");
    if (pair_i < 0 || pair_i >= n_modes) errs.push_back("pair_i: out of range");
    if (pair_j < 0 || pair_j >= n_modes) errs.push_back("pair_j: out of range");
    if (pair_i == pair_j) errs.push_back("pair_j: must differ from pair_i");
    if (threads < 0) errs.push_back("threads: must be >= 0");
    if (gdecay_record_every < 1) errs.push_back("gdecay_record_every: must be >= 1");
    if (dt > 0.0 && t_max > 0.0) {
        if (std::abs(n_steps() * dt - t_max) > 1e-9 * std::max(1.0, t_max))
            errs.push_back("t_max: not an integer multiple of dt");
        for (double t : checkpoints) {
            if (t < -1e-12 || t > t_max + 1e-12) {
                errs.push_back("checkpoints: " + std::to_string(t) + " outside [0, t_max]");
                continue;
            }
            const double k = t / dt;
            if (std::abs(k - std::llround(k)) > 1e-6)
                errs.push_back("checkpoints: " + std::to_string(t) + " not aligned to the step grid");
        }
    }
    return errs;
}

static json to_json(const SimConfig& c) {
    // `threads` is deliberately absent: it is an execution detail and the
    // results are bit-identical for any worker count, so it must not move
    // the content hash
    json j;
    j["N"] = c.n_modes;
    j["J"] = c.coupling_j;
    j["gamma"] = c.gamma;
    j["dt"] = c.dt;
    j["t_max"] = c.t_max;
    j["n_traj"] = c.n_traj;
    j["master_seed"] = c.master_seed;
    j["checkpoints"] = c.checkpoints;
    j["checkpoint_count"] = c.checkpoint_count;
    j["backend"] = backend_name(c.backend);
    j["include_diagonal_jumps"] = c.include_diagonal_jumps;
    j["pair_i"] = c.pair_i;
    j["pair_j"] = c.pair_j;
    j["pair_average"] = c.pair_average;
    j["snapshots"] = snapshot_policy_name(c.snapshots);
    j["gdecay_u_max"] = c.gdecay_u_max;
    j["gdecay_record_every"] = c.gdecay_record_every;
    return j;
}

std::string SimConfig::canonical_json() const {
    // nlohmann::json objects iterate in key-sorted order already
    return to_json(*this).dump();
}

std::string SimConfig::hash() const {
    const std::string s = canonical_json();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string backend_name(Backend b) { return b == Backend::fast ? "fast" : "reference"; }

std::string snapshot_policy_name(SnapshotPolicy p) {
    switch (p) {
        case SnapshotPolicy::none: return "none";
        case SnapshotPolicy::last: return "last";
        case SnapshotPolicy::all: return "all";
    }
    return "none";
}

namespace {

std::vector<double> parse_double_list(const json& v) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) out.push_back(x.get<double>());
    } else if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
    } else if (v.is_number()) {
        out.push_back(v.get<double>());
    }
    return out;
}

bool parse_bool(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0.0;
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(), ::tolower);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    }
    throw std::invalid_argument("invalid boolean for key '" + key + "'");
}

double as_double(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return std::stod(v.get<std::string>());
    throw std::invalid_argument("invalid number for key '" + key + "'");
}

uint64_t as_u64(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_number_integer()) return (uint64_t)v.get<int64_t>();
    if (v.is_string()) return std::stoull(v.get<std::string>());
    throw std::invalid_argument("invalid integer for key '" + key + "'");
}

// accepts a JSON object or flat `key = value` lines
json text_to_json(const std::string& text) {
    for (char ch : text) {
        if (std::isspace((unsigned char)ch)) continue;
        if (ch == '{') return json::parse(text);
        break;
    }
    json j = json::object();
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) j[key] = val;
    }
    return j;
}

}  // namespace

SimConfig parse_config_text(const std::string& text, std::vector<std::string>& missing) {
    json j = text_to_json(text);

    static const char* known_keys[] = {
        "N", "J", "gamma", "dt", "t_max", "n_traj", "master_seed", "checkpoints",
        "checkpoint_count", "backend", "threads", "include_diagonal_jumps",
        "pair_i", "pair_j", "pair_average", "snapshots", "gdecay_u_max",
        "gdecay_record_every"};
    for (const char* key : known_keys) {
        std::string env = "BSYK_" + std::string(key);
        std::transform(env.begin(), env.end(), env.begin(), ::toupper);
        if (const char* v = std::getenv(env.c_str())) j[key] = std::string(v);
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : known_keys)
            if (it.key() == key) known = true;
        if (!known) throw std::invalid_argument("unknown config key '" + it.key() + "'");
    }

    SimConfig c;
    bool have_dt = false;
    if (j.contains("N")) c.n_modes = (int)as_double(j["N"], "N"); else missing.push_back("N");
    if (j.contains("J")) c.coupling_j = as_double(j["J"], "J");
    if (j.contains("gamma")) c.gamma = as_double(j["gamma"], "gamma"); else missing.push_back("gamma");
    if (j.contains("dt")) { c.dt = as_double(j["dt"], "dt"); have_dt = true; }
    if (j.contains("t_max")) c.t_max = as_double(j["t_max"], "t_max"); else missing.push_back("t_max");
    if (j.contains("n_traj")) c.n_traj = (int)as_double(j["n_traj"], "n_traj"); else missing.push_back("n_traj");
    if (j.contains("master_seed")) c.master_seed = as_u64(j["master_seed"], "master_seed");
    if (j.contains("checkpoints")) c.checkpoints = parse_double_list(j["checkpoints"]);
    if (j.contains("checkpoint_count")) c.checkpoint_count = (int)as_double(j["checkpoint_count"], "checkpoint_count");
    if (j.contains("backend")) {
        std::string b = j["backend"].is_string() ? j["backend"].get<std::string>() : "";
        if (b == "fast") c.backend = Backend::fast;
        else if (b == "reference") c.backend = Backend::reference;
        else throw std::invalid_argument("invalid value for key 'backend' (fast|reference)");
    }
    if (j.contains("threads")) c.threads = (int)as_double(j["threads"], "threads");
    if (j.contains("include_diagonal_jumps"))
        c.include_diagonal_jumps = parse_bool(j["include_diagonal_jumps"], "include_diagonal_jumps");
    if (j.contains("pair_i")) c.pair_i = (int)as_double(j["pair_i"], "pair_i");
    if (j.contains("pair_j")) c.pair_j = (int)as_double(j["pair_j"], "pair_j");
    if (j.contains("pair_average")) c.pair_average = parse_bool(j["pair_average"], "pair_average");
    if (j.contains("snapshots")) {
        std::string s = j["snapshots"].is_string() ? j["snapshots"].get<std::string>() : "";
        if (s == "none") c.snapshots = SnapshotPolicy::none;
        else if (s == "last") c.snapshots = SnapshotPolicy::last;
        else if (s == "all") c.snapshots = SnapshotPolicy::all;
        else throw std::invalid_argument("invalid value for key 'snapshots' (none|last|all)");
    }
    if (j.contains("gdecay_u_max")) c.gdecay_u_max = as_double(j["gdecay_u_max"], "gdecay_u_max");
    if (j.contains("gdecay_record_every"))
        c.gdecay_record_every = (int)as_double(j["gdecay_record_every"], "gdecay_record_every");

    if (!have_dt && c.coupling_j > 0.0) c.dt = 0.01 / c.coupling_j;
    return c;
}

SimConfig load_config_file(const std::string& path, std::vector<std::string>& missing) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), missing);
}

}  // namespace bsyk
