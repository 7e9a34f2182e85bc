// Command-line driver: simulate | saddle | compare | steady.
//
// Exit codes: 0 success, 2 invalid configuration or input mismatch,
// 3 trajectory abort during simulation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsyk/config.hpp"
#include "bsyk/ensemble.hpp"
#include "bsyk/largen.hpp"
#include "bsyk/report_schema.hpp"
#include "bsyk/series_io.hpp"
#include "bsyk/steady.hpp"
#include "bsyk/svg.hpp"
#include "bsyk/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bsyk;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

int load_and_validate(const std::string& path, uint64_t seed_override, int threads_override,
                      SimConfig& cfg) {
    std::vector<std::string> missing;
    try {
        cfg = load_config_file(path, missing);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (!missing.empty()) {
        for (const auto& key : missing)
            std::cerr << "config error: missing required key '" << key << "'\n";
        return 2;
    }
    if (seed_override != 0) cfg.master_seed = seed_override;
    if (threads_override > 0) cfg.threads = threads_override;
    const auto errs = cfg.validate();
    if (!errs.empty()) {
        for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
        return 2;
    }
    return 0;
}

// writes snapshots for the configured policy; file per (checkpoint, trajectory)
class SnapshotWriter : public SnapshotSink {
  public:
    SnapshotWriter(const SimConfig& cfg, const fs::path& dir, int last_checkpoint)
        : cfg_(cfg), dir_(dir), last_(last_checkpoint) {
        fs::create_directories(dir_);
    }
    void consume(int checkpoint, int trajectory, double t, const Matrix& rho) override {
        if (cfg_.snapshots == SnapshotPolicy::none) return;
        if (cfg_.snapshots == SnapshotPolicy::last && checkpoint != last_) return;
        char name[64];
        std::snprintf(name, sizeof name, "ckpt%03d_traj%05d.bin", checkpoint, trajectory);
        write_snapshot(rho, (dir_ / name).string(), t, trajectory, cfg_.master_seed);
        std::lock_guard<std::mutex> lock(mu_);
        written_.push_back((dir_ / name).string());
        written_.push_back((dir_ / name).string() + ".json");
    }
    std::vector<std::string> written() const {
        auto out = written_;
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    SimConfig cfg_;
    fs::path dir_;
    int last_;
    std::mutex mu_;
    std::vector<std::string> written_;
};

class CompositeSink : public SnapshotSink {
  public:
    CompositeSink(SnapshotSink& a, SnapshotSink& b) : a_(a), b_(b) {}
    void consume(int checkpoint, int trajectory, double t, const Matrix& rho) override {
        a_.consume(checkpoint, trajectory, t, rho);
        b_.consume(checkpoint, trajectory, t, rho);
    }

  private:
    SnapshotSink& a_;
    SnapshotSink& b_;
};

int cmd_simulate(const std::string& config_path, const std::string& out_dir, uint64_t seed,
                 int threads, const std::string& format) {
    SimConfig cfg;
    if (int rc = load_and_validate(config_path, seed, threads, cfg)) return rc;

    RunManifest manifest;
    manifest.config = cfg;
    manifest.config_hash = cfg.hash();
    manifest.code_version = kVersion;
    manifest.started_utc = utc_timestamp_now();

    fs::create_directories(out_dir);
    const auto steps = cfg.checkpoint_steps();
    MeasurementSet measure(cfg, steps);
    SnapshotWriter snapshots(cfg, fs::path(out_dir) / "snapshots", (int)steps.size() - 1);
    CompositeSink sink(measure, snapshots);

    try {
        run_ensemble(cfg, steps, sink);
    } catch (const TrajectoryAbort& abort) {
        std::cerr << "trajectory " << abort.traj_index << " aborted at t=" << abort.t << ": "
                  << abort.what() << "\n";
        return 3;
    }

    std::vector<std::string> outputs;
    for (const auto& series : measure.all_series()) {
        ObservableSeries s = series;
        s.config_hash = manifest.config_hash;
        const std::string csv = (fs::path(out_dir) / (s.name + ".csv")).string();
        write_series_csv(s, csv);
        outputs.push_back(csv);
        if (format == "json") {
            const std::string js = (fs::path(out_dir) / (s.name + ".json")).string();
            write_series_json(s, js);
            outputs.push_back(js);
        }
    }

    if (cfg.gamma == 0.0 && cfg.coupling_j > 0.0) {
        const TwoPointData tp = run_two_point(cfg);
        ObservableSeries g = tp.series(cfg.master_seed ^ 0x47);
        g.config_hash = manifest.config_hash;
        const std::string csv = (fs::path(out_dir) / "Gdecay.csv").string();
        write_series_csv(g, csv);
        outputs.push_back(csv);
        const double decay = largen::decay_rate(cfg.coupling_j, 4);
        const DecayFit fit = fit_exponential_decay(g.times, g.mean, 4.0 / decay);
        json fj;
        fj["rate"] = fit.rate;
        fj["residual"] = fit.residual;
        fj["flagged"] = fit.flagged;
        fj["target_rate"] = decay / 2.0;
        const std::string fjp = (fs::path(out_dir) / "gdecay_fit.json").string();
        std::ofstream(fjp) << fj.dump(2) << '\n';
        outputs.push_back(fjp);
    }

    for (const auto& p : snapshots.written()) outputs.push_back(p);

    manifest.finished_utc = utc_timestamp_now();
    const std::string mpath = (fs::path(out_dir) / "manifest.json").string();
    outputs.push_back(mpath);
    manifest.outputs = outputs;
    manifest.write(mpath);
    std::cout << "wrote " << outputs.size() << " files to " << out_dir << "\n";
    return 0;
}

std::vector<double> grid_values(const json& spec, const char* key, double fallback) {
    if (!spec.contains(key)) return {fallback};
    const auto& v = spec[key];
    std::vector<double> out;
    if (v.is_array())
        for (const auto& x : v) out.push_back(x.get<double>());
    else
        out.push_back(v.get<double>());
    return out;
}

int cmd_saddle(const std::string& grid_path, const std::string& out_dir) {
    json spec;
    try {
        std::ifstream f(grid_path);
        if (!f) throw std::runtime_error("cannot open grid spec: " + grid_path);
        spec = json::parse(f);
    } catch (const std::exception& e) {
        std::cerr << "grid error: " << e.what() << "\n";
        return 2;
    }
    const auto ns = grid_values(spec, "n", 2.0);
    const auto gammas = grid_values(spec, "gamma", 0.05);
    const auto js = grid_values(spec, "J", 1.0);
    const auto qs = grid_values(spec, "q", 4.0);
    double t_max = 0.0;
    int t_count = 0;
    if (spec.contains("t")) {
        t_max = spec["t"].value("max", 0.0);
        t_count = spec["t"].value("count", 0);
    }
    if (ns.empty() || gammas.empty() || js.empty() || qs.empty()) {
        std::cerr << "grid error: empty grid\n";
        return 2;
    }

    fs::create_directories(out_dir);
    std::ofstream grid_csv(fs::path(out_dir) / "saddle_grid.csv");
    grid_csv << "# bsyk.saddle.v1\n";
    grid_csv << "n,gamma,J,q,Gamma,phi_star_closed,phi_star_numeric,stationarity_residual,"
                "action_density,entropy_rate_perN,entropy_rate_continuation,F_early,F_late,"
                "t_page,warnings\n";
    std::ofstream curves_csv(fs::path(out_dir) / "saddle_curves.csv");
    curves_csv << "# bsyk.saddle_curves.v1\n";
    curves_csv << "n,gamma,J,q,t,entropy_per_fermion,correlator,label\n";

    int points = 0;
    for (double n : ns)
        for (double gamma : gammas)
            for (double j : js)
                for (double qd : qs) {
                    largen::SaddleInput in;
                    in.n = n;
                    in.gamma = gamma;
                    in.coupling_j = j;
                    in.q = (int)qd;
                    try {
                        in.validate();
                    } catch (const std::exception& e) {
                        std::cerr << "grid error: n=" << n << " gamma=" << gamma << ": " << e.what()
                                  << "\n";
                        return 2;
                    }
                    const auto closed = n < 2.0 ? largen::phi_star(in, largen::PhiMethod::closed)
                                                : largen::phi_star(in, largen::PhiMethod::numeric);
                    const auto numeric = largen::phi_star(in, largen::PhiMethod::numeric);
                    const double rate = largen::entropy_rate(in);
                    const double t_page = largen::page_time(in);
                    const std::string warn = in.weak_coupling_ok() ? "" : "gamma_over_decay>0.2";
                    grid_csv << fmt(n) << ',' << fmt(gamma) << ',' << fmt(j) << ',' << (int)qd
                             << ',' << fmt(in.decay()) << ',' << fmt(closed.phi_star) << ','
                             << fmt(numeric.phi_star) << ','
                             << fmt(largen::stationarity_residual(closed.phi_star, in)) << ','
                             << fmt(closed.action_density) << ',' << fmt(rate) << ','
                             << (std::abs(n - 1.0) < 1e-12
                                     ? fmt(largen::entropy_rate_continuation(in))
                                     : "")
                             << ',' << fmt(largen::early_correlator(in)) << ",0.25," << fmt(t_page)
                             << ',' << warn << "\n";
                    ++points;

                    if (t_count > 1 && t_max > 0.0) {
                        SvgCurve entropy_curve{"S/N", "#1f6fb2", {}, {}};
                        SvgCurve corr_curve{"F", "#c23b22", {}, {}};
                        for (int k = 0; k < t_count; ++k) {
                            const double t = t_max * k / (t_count - 1);
                            const auto p = largen::dominant_saddle(in, t);
                            curves_csv << fmt(n) << ',' << fmt(gamma) << ',' << fmt(j) << ','
                                       << (int)qd << ',' << fmt(t) << ','
                                       << fmt(p.entropy_per_fermion) << ',' << fmt(p.correlator)
                                       << ',' << p.saddle_label << "\n";
                            entropy_curve.x.push_back(t);
                            entropy_curve.y.push_back(p.entropy_per_fermion);
                            corr_curve.x.push_back(t);
                            corr_curve.y.push_back(p.correlator);
                        }
                        std::ostringstream name;
                        name << "saddle_n" << fmt_short(n) << "_g" << fmt_short(gamma) << ".svg";
                        write_svg_plot((fs::path(out_dir) / name.str()).string(),
                                       "n=" + fmt_short(n) + " gamma=" + fmt_short(gamma),
                                       "t", "per-fermion entropy / correlator",
                                       {entropy_curve, corr_curve});
                    }
                }
    if (points == 0) {
        std::cerr << "grid error: empty grid\n";
        return 2;
    }
    // gnuplot alternative for the curves
    std::ofstream gp(fs::path(out_dir) / "plots.gp");
    gp << "set datafile separator ','\n"
       << "set key left top\n"
       << "set xlabel 't'\n"
       << "set ylabel 'S/N and F'\n"
       << "plot 'saddle_curves.csv' every ::2 using 5:6 with lines title 'entropy per fermion', \\\n"
       << "     'saddle_curves.csv' every ::2 using 5:7 with lines title 'correlator'\n";
    std::cout << "wrote " << points << " grid points to " << out_dir << "\n";
    return 0;
}

struct SlopeFit {
    double slope = 0.0, intercept = 0.0;
    int points = 0;
};

SlopeFit fit_window(const ObservableSeries& s, double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t k = 0; k < s.times.size(); ++k) {
        if (s.times[k] < t_lo - 1e-9 || s.times[k] > t_hi + 1e-9) continue;
        sx += s.times[k];
        sy += s.mean[k];
        sxx += s.times[k] * s.times[k];
        sxy += s.times[k] * s.mean[k];
        ++n;
    }
    SlopeFit f;
    f.points = n;
    if (n >= 2) {
        const double d = n * sxx - sx * sx;
        f.slope = (n * sxy - sx * sy) / d;
        f.intercept = (sy - f.slope * sx) / n;
    }
    return f;
}

double series_value_near(const ObservableSeries& s, double t, double* err = nullptr) {
    size_t best = 0;
    double bd = 1e300;
    for (size_t k = 0; k < s.times.size(); ++k) {
        const double d = std::abs(s.times[k] - t);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    if (err) *err = s.stderr_[best];
    return s.mean[best];
}

int cmd_compare(const std::string& sim_dir, const std::string& saddle_dir,
                const std::string& out_dir) {
    // sim manifest
    json manifest;
    try {
        std::ifstream f(fs::path(sim_dir) / "manifest.json");
        if (!f) throw std::runtime_error("missing manifest.json in " + sim_dir);
        manifest = json::parse(f);
    } catch (const std::exception& e) {
        std::cerr << "compare error: " << e.what() << "\n";
        return 2;
    }
    const double gamma = manifest["config"]["gamma"].get<double>();
    const double j = manifest["config"]["J"].get<double>();
    const int n_modes = manifest["config"]["N"].get<int>();

    // saddle grid must contain a matching (gamma, J) row
    bool matched = false;
    {
        std::ifstream f(fs::path(saddle_dir) / "saddle_grid.csv");
        if (!f) {
            std::cerr << "compare error: missing saddle_grid.csv in " << saddle_dir << "\n";
            return 2;
        }
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
            std::stringstream ss(line);
            std::string tok;
            std::vector<std::string> cols;
            while (std::getline(ss, tok, ',')) cols.push_back(tok);
            if (cols.size() < 4) continue;
            if (std::abs(std::stod(cols[1]) - gamma) < 1e-9 && std::abs(std::stod(cols[2]) - j) < 1e-9)
                matched = true;
        }
    }
    if (!matched) {
        std::cerr << "compare error: no saddle grid row matches the simulation parameters; "
                     "differing keys: gamma=" << gamma << " J=" << j << "\n";
        return 2;
    }

    fs::create_directories(out_dir);
    largen::SaddleInput in2;
    in2.n = 2.0;
    in2.gamma = gamma;
    in2.coupling_j = j;
    largen::SaddleInput in1 = in2;
    in1.n = 1.0;
    const double t_page2 = largen::page_time(in2);

    // theory per observable as a function of t
    auto theory_of = [&](const std::string& name, double t) -> double {
        if (name.rfind("S2", 0) == 0)
            return n_modes * std::min(gamma / 2.0 * t, 2.0 * kLn2);
        if (name.rfind("SvN", 0) == 0)
            return n_modes * std::min(largen::entropy_rate(in1) * t, 2.0 * kLn2);
        if (name.rfind("F2", 0) == 0) return largen::dominant_saddle(in2, t).correlator;
        if (name.rfind("F1", 0) == 0) return largen::dominant_saddle(in1, t).correlator;
        return 0.0;  // C
    };

    json report;
    report["schema"] = "bsyk.compare_report.v1";
    report["config_hash"] = manifest["config_hash"];
    report["gamma"] = gamma;
    report["J"] = j;
    report["N"] = n_modes;
    report["page_time_n2"] = t_page2;
    report["observables"] = json::array();

    std::map<std::string, ObservableSeries> series;
    for (const char* name :
         {"C", "C_pairavg", "F1", "F1_pairavg", "F2", "F2_pairavg", "S2_annealed", "S2_quenched",
          "SvN", "leakage"}) {
        const fs::path p = fs::path(sim_dir) / (std::string(name) + ".csv");
        if (!fs::exists(p)) continue;
        ObservableSeries s = read_series_csv(p.string());
        series[name] = s;
        const std::string overlay = (fs::path(out_dir) / ("overlay_" + std::string(name) + ".csv")).string();
        std::ofstream f(overlay);
        f << "# bsyk.overlay.v1\n";
        f << "t,sim_mean,sim_stderr,theory\n";
        for (size_t k = 0; k < s.times.size(); ++k)
            f << fmt(s.times[k]) << ',' << fmt(s.mean[k]) << ',' << fmt(s.stderr_[k]) << ','
              << fmt(theory_of(name, s.times[k])) << "\n";
        json obs;
        obs["name"] = name;
        obs["overlay_csv"] = overlay;
        report["observables"].push_back(obs);
    }

    json checks;
    if (series.count("S2_annealed")) {
        const auto& s2 = series["S2_annealed"];
        const SlopeFit fit = fit_window(s2, 0.05 * t_page2, 0.3 * t_page2);
        if (fit.points >= 2) {
            const double theory = n_modes * gamma / 2.0;
            json c;
            c["slope"] = fit.slope;
            c["theory"] = theory;
            c["ratio"] = fit.slope / theory;
            c["window"] = {0.05 * t_page2, 0.3 * t_page2};
            c["pass"] = std::abs(fit.slope / theory - 1.0) <= 0.15;
            checks["s2_slope"] = c;
        }
        if (!s2.times.empty() && s2.times.back() >= 3.0 * t_page2 - 1e-9) {
            SimConfig oracle_cfg;
            oracle_cfg.n_modes = n_modes;
            oracle_cfg.gamma = gamma;
            oracle_cfg.coupling_j = j;
            const Matrix rho_inf = steady_state(oracle_cfg);
            const double oracle_s2 = -std::log(purity_value(rho_inf));
            const double sim_late = series_value_near(s2, s2.times.back());
            json c;
            c["sim"] = sim_late;
            c["oracle"] = oracle_s2;
            c["ceiling"] = 2.0 * n_modes * kLn2;
            c["pass"] = std::abs(sim_late - oracle_s2) <= 1e-2 && sim_late < 2.0 * n_modes * kLn2;
            checks["s2_saturation"] = c;

            const std::string f2name = series.count("F2_pairavg") ? "F2_pairavg" : "F2";
            if (series.count(f2name)) {
                const auto& f2 = series[f2name];
                const ModeLayout layout = ModeLayout::paired(n_modes);
                double num = 0.0;
                int cnt = 0;
                for (int a = 0; a < n_modes; ++a)
                    for (int b = 0; b < n_modes; ++b) {
                        if (a == b) continue;
                        num += renyi_num_value(rho_inf, layout, a, b);
                        ++cnt;
                    }
                const double oracle_f2 = num / cnt / purity_value(rho_inf);
                double err_late = 0.0;
                const double early = series_value_near(f2, 0.3 * t_page2);
                const double late = series_value_near(f2, f2.times.back(), &err_late);
                json c2;
                c2["early"] = early;
                c2["late"] = late;
                c2["factor"] = late / std::max(early, 1e-300);
                c2["oracle_late"] = oracle_f2;
                c2["pass"] = late / std::max(early, 1e-300) >= 5.0 &&
                             std::abs(late - oracle_f2) <= std::max(2.0 * err_late, 1e-3);
                checks["f2_jump"] = c2;
            }
        }
    }
    if (series.count("F1_pairavg") || series.count("F1")) {
        const auto& f1 = series.count("F1_pairavg") ? series["F1_pairavg"] : series["F1"];
        const double t_probe = std::min(f1.times.back(), 0.3 * largen::page_time(in1));
        json c;
        c["sim"] = series_value_near(f1, t_probe);
        c["theory"] = largen::early_correlator(in1);
        checks["f1_early"] = c;
    }
    report["checks"] = checks;

    const std::string report_path = (fs::path(out_dir) / "report.json").string();
    std::ofstream(report_path) << report.dump(2) << '\n';
    const std::string schema_path = (fs::path(out_dir) / "compare_report.schema.json").string();
    std::ofstream(schema_path) << kCompareReportSchema << '\n';
    const auto problems = validate_against_schema(report.dump(), kCompareReportSchema);
    if (!problems.empty()) {
        for (const auto& p : problems) std::cerr << "report schema violation: " << p << "\n";
        return 1;
    }
    std::cout << "wrote report to " << report_path << "\n";
    return 0;
}

int cmd_steady(const std::string& config_path, const std::string& out_dir, uint64_t seed,
               int threads) {
    SimConfig cfg;
    if (int rc = load_and_validate(config_path, seed, threads, cfg)) return rc;
    if (!(cfg.gamma > 0.0)) {
        std::cerr << "config error: gamma: steady state requires gamma > 0\n";
        return 2;
    }
    fs::create_directories(out_dir);
    SteadyReport rep;
    const Matrix rho_inf = steady_state(cfg, &rep);
    const ModeLayout layout = ModeLayout::paired(cfg.n_modes);
    json out;
    out["schema"] = "bsyk.steady.v1";
    out["config_hash"] = cfg.hash();
    out["iterations"] = rep.iterations;
    out["residual"] = rep.residual;
    out["S2"] = -std::log(purity_value(rho_inf));
    out["SvN"] = vn_entropy_value(rho_inf);
    out["min_eigenvalue"] = min_eigenvalue(rho_inf);
    out["trace"] = rho_inf.trace().real();
    double num = 0.0;
    int cnt = 0;
    for (int a = 0; a < cfg.n_modes; ++a)
        for (int b = 0; b < cfg.n_modes; ++b) {
            if (a == b) continue;
            num += renyi_num_value(rho_inf, layout, a, b);
            ++cnt;
        }
    out["F2"] = num / cnt / purity_value(rho_inf);
    out["ceiling_2Nln2"] = 2.0 * cfg.n_modes * kLn2;
    const std::string jp = (fs::path(out_dir) / "steady.json").string();
    std::ofstream(jp) << out.dump(2) << '\n';
    write_snapshot(rho_inf, (fs::path(out_dir) / "steady_rho.bin").string(), -1.0, -1,
                   cfg.master_seed);
    std::cout << "steady state: S2=" << out["S2"] << " SvN=" << out["SvN"] << " F2=" << out["F2"]
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian SYK + bath laboratory"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = "bsyk_run", grid_path, sim_dir, saddle_dir;
    std::string format = "csv";
    uint64_t seed = 0;
    int threads = 0;

    auto* sim = app.add_subcommand("simulate", "run the trajectory ensemble");
    sim->add_option("--config", config_path, "config file (JSON or key=value)")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--seed", seed, "override master_seed");
    sim->add_option("--threads", threads, "override thread count");
    sim->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    auto* sad = app.add_subcommand("saddle", "evaluate the large-N saddle grid");
    sad->add_option("--grid", grid_path, "grid spec JSON")->required();
    sad->add_option("--out", out_dir, "output directory");

    auto* cmp = app.add_subcommand("compare", "overlay simulation and theory");
    cmp->add_option("--sim", sim_dir, "simulation output directory")->required();
    cmp->add_option("--saddle", saddle_dir, "saddle output directory")->required();
    cmp->add_option("--out", out_dir, "output directory");

    auto* std_cmd = app.add_subcommand("steady", "disorder-averaged steady-state oracle");
    std_cmd->add_option("--config", config_path, "config file")->required();
    std_cmd->add_option("--out", out_dir, "output directory");
    std_cmd->add_option("--seed", seed, "override master_seed");
    std_cmd->add_option("--threads", threads, "override thread count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed, threads, format);
        if (sad->parsed()) return cmd_saddle(grid_path, out_dir);
        if (cmp->parsed()) return cmd_compare(sim_dir, saddle_dir, out_dir);
        if (std_cmd->parsed()) return cmd_steady(config_path, out_dir, seed, threads);
    } catch (const TrajectoryAbort& abort) {
        std::cerr << "trajectory " << abort.traj_index << " aborted: " << abort.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
