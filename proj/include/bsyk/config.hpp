#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bsyk {

enum class Backend { fast, reference };

enum class SnapshotPolicy { none, last, all };

// Run parameters. All rates are in units of J unless stated otherwise; the
// manifest echoes the unit convention.
struct SimConfig {
    int n_modes = 2;            // N system fermions (and N auxiliaries)
    double coupling_j = 1.0;    // J
    double gamma = 0.05;        // decoherence strength
    double dt = 0.01;           // step size
    double t_max = 1.0;
    int n_traj = 10;
    uint64_t master_seed = 1;
    std::vector<double> checkpoints;  // empty -> even grid from checkpoint_count
    int checkpoint_count = 11;
    Backend backend = Backend::fast;
    int threads = 0;  // 0 -> OpenMP default
    bool include_diagonal_jumps = true;  // keep the i=j terms of the jump sum
    int pair_i = 0;
    int pair_j = 1;
    bool pair_average = true;
    SnapshotPolicy snapshots = SnapshotPolicy::none;
    // two-point (gamma = 0) run controls
    double gdecay_u_max = 0.0;  // 0 -> 4/Gamma default
    int gdecay_record_every = 1;

    int n_steps() const;
    std::vector<int> checkpoint_steps() const;  // validated, grid aligned

    // collected field-level validation problems; empty means valid
    std::vector<std::string> validate() const;

    // canonical key-sorted JSON text of the effective config
    std::string canonical_json() const;
    // FNV-1a hash of canonical_json(), rendered as 16 hex digits; stable
    // under key reordering of the input file
    std::string hash() const;
};

// Parse a config file: JSON object or flat `key = value` lines with `#`
// comments. Environment variables BSYK_<KEY> override any key. `missing`
// collects required keys absent from the input.
SimConfig parse_config_text(const std::string& text, std::vector<std::string>& missing);
SimConfig load_config_file(const std::string& path, std::vector<std::string>& missing);

std::string backend_name(Backend b);
std::string snapshot_policy_name(SnapshotPolicy p);

}  // namespace bsyk
