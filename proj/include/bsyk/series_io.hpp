#pragma once

#include <string>
#include <vector>

#include "bsyk/config.hpp"
#include "bsyk/fock.hpp"
#include "bsyk/observables.hpp"

namespace bsyk {

// CSV schema v1: two comment lines (schema tag, metadata), then
// `t,mean,stderr` rows printed with %.17g so reruns are byte-identical.
void write_series_csv(const ObservableSeries& series, const std::string& path);
ObservableSeries read_series_csv(const std::string& path);

// JSON twin with full metadata
void write_series_json(const ObservableSeries& series, const std::string& path);

// raw little-endian complex doubles, row-major, with a JSON sidecar carrying
// dimensions, time, trajectory index and seed
void write_snapshot(const Matrix& rho, const std::string& path_bin, double t, int traj_index,
                    uint64_t master_seed);
Matrix read_snapshot(const std::string& path_bin);

struct RunManifest {
    SimConfig config;
    std::string config_hash;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;
    std::string code_version;

    void write(const std::string& path) const;
};

std::string utc_timestamp_now();

// minimal JSON Schema check (type / required / properties / items subset);
// returns problems, empty when the document conforms
std::vector<std::string> validate_against_schema(const std::string& document_json,
                                                 const std::string& schema_json);

}  // namespace bsyk
