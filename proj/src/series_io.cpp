#include "bsyk/series_io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsyk/version.hpp"

namespace bsyk {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_series_csv(const ObservableSeries& series, const std::string& path) {
    series.validate();
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "# bsyk.series.v1\n";
    f << "# name=" << series.name << " pair=(" << series.pair_i << "," << series.pair_j
      << ") convention=" << series.convention << " config=" << series.config_hash << "\n";
    f << "t,mean,stderr\n";
    for (size_t k = 0; k < series.times.size(); ++k)
        f << fmt_double(series.times[k]) << ',' << fmt_double(series.mean[k]) << ','
          << fmt_double(series.stderr_[k]) << '\n';
}

ObservableSeries read_series_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    ObservableSeries s;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto name_pos = line.find("name=");
            if (name_pos != std::string::npos)
                s.name = line.substr(name_pos + 5, line.find(' ', name_pos + 5) - name_pos - 5);
            const auto cfg_pos = line.find("config=");
            if (cfg_pos != std::string::npos) s.config_hash = line.substr(cfg_pos + 7);
            continue;
        }
        if (line.rfind("t,", 0) == 0) continue;
        std::stringstream ss(line);
        std::string tok;
        double vals[3] = {0, 0, 0};
        int k = 0;
        while (std::getline(ss, tok, ',') && k < 3) vals[k++] = std::stod(tok);
        if (k == 3) {
            s.times.push_back(vals[0]);
            s.mean.push_back(vals[1]);
            s.stderr_.push_back(vals[2]);
        }
    }
    return s;
}

void write_series_json(const ObservableSeries& series, const std::string& path) {
    json j;
    j["schema"] = "bsyk.series.v1";
    j["name"] = series.name;
    j["pair"] = {series.pair_i, series.pair_j};
    j["convention"] = series.convention;
    j["config_hash"] = series.config_hash;
    j["t"] = series.times;
    j["mean"] = series.mean;
    j["stderr"] = series.stderr_;
    if (!series.complex_mean.empty()) {
        std::vector<double> re, im;
        for (const auto& z : series.complex_mean) {
            re.push_back(z.real());
            im.push_back(z.imag());
        }
        j["mean_re"] = re;
        j["mean_im"] = im;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

void write_snapshot(const Matrix& rho, const std::string& path_bin, double t, int traj_index,
                    uint64_t master_seed) {
    std::ofstream f(path_bin, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path_bin);
    // Eigen default storage is column-major; write row-major explicitly
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            const double re = rho(r, c).real(), im = rho(r, c).imag();
            f.write(reinterpret_cast<const char*>(&re), sizeof re);
            f.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    json side;
    side["schema"] = "bsyk.snapshot.v1";
    side["rows"] = rho.rows();
    side["cols"] = rho.cols();
    side["t"] = t;
    side["traj_index"] = traj_index;
    side["master_seed"] = master_seed;
    side["encoding"] = "little-endian complex<double>, row-major, re then im";
    std::ofstream sf(path_bin + ".json");
    sf << side.dump(2) << '\n';
}

Matrix read_snapshot(const std::string& path_bin) {
    std::ifstream sf(path_bin + ".json");
    if (!sf) throw std::runtime_error("missing snapshot sidecar for " + path_bin);
    json side = json::parse(sf);
    const Eigen::Index rows = side["rows"].get<Eigen::Index>();
    const Eigen::Index cols = side["cols"].get<Eigen::Index>();
    std::ifstream f(path_bin, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path_bin);
    Matrix rho(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double re = 0, im = 0;
            f.read(reinterpret_cast<char*>(&re), sizeof re);
            f.read(reinterpret_cast<char*>(&im), sizeof im);
            rho(r, c) = Complex(re, im);
        }
    return rho;
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void RunManifest::write(const std::string& path) const {
    json j;
    j["schema"] = "bsyk.manifest.v1";
    j["config"] = json::parse(config.canonical_json());
    j["config_hash"] = config_hash;
    j["master_seed"] = config.master_seed;
    j["units"] = "rates in units of J; times in 1/J";
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["outputs"] = outputs;
    j["code_version"] = code_version;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

namespace {

void check_node(const json& doc, const json& schema, const std::string& where,
                std::vector<std::string>& problems) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        bool ok = true;
        if (type == "object") ok = doc.is_object();
        else if (type == "array") ok = doc.is_array();
        else if (type == "string") ok = doc.is_string();
        else if (type == "number") ok = doc.is_number();
        else if (type == "integer") ok = doc.is_number_integer();
        else if (type == "boolean") ok = doc.is_boolean();
        if (!ok) {
            problems.push_back(where + ": expected " + type);
            return;
        }
    }
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!doc.contains(key.get<std::string>()))
                problems.push_back(where + ": missing required key '" + key.get<std::string>() + "'");
    if (schema.contains("properties") && doc.is_object())
        for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
            if (doc.contains(it.key()))
                check_node(doc[it.key()], it.value(), where + "/" + it.key(), problems);
    if (schema.contains("items") && doc.is_array())
        for (size_t k = 0; k < doc.size(); ++k)
            check_node(doc[k], schema["items"], where + "[" + std::to_string(k) + "]", problems);
}

}  // namespace

std::vector<std::string> validate_against_schema(const std::string& document_json,
                                                 const std::string& schema_json) {
    std::vector<std::string> problems;
    json doc = json::parse(document_json);
    json schema = json::parse(schema_json);
    check_node(doc, schema, "$", problems);
    return problems;
}

}  // namespace bsyk
