#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "fockcm/experiments.hpp"
#include "fockcm/random_field.hpp"

using namespace fockcm;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kSuiteFailure = 1;
constexpr int kConfigError = 2;

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int threads = 0;
    std::string sweep;
};

/// Writes tables, failures and the manifest of one subcommand under out/<name>/.
int emit(const std::string& name, const ExperimentConfig& cfg, const Options& opt, const std::vector<SuiteResult>& results,
         const Manifest& extra = {}) {
    const std::string dir = (fs::path(cfg.out) / name).string();
    ensure_dir(dir);
    const std::string hash = config_hash(cfg);
    Manifest m = {{"subcommand", name},     {"experiment_id", cfg.id},      {"config_hash", hash},
                  {"seed", std::to_string(cfg.seed)}, {"seed_split_rule", kSplitRule},
                  {"threads", std::to_string(cfg.threads)}};
    if (!opt.sweep.empty()) m.emplace_back("sweep", opt.sweep);
    m.insert(m.end(), extra.begin(), extra.end());
    CsvTable failures;
    failures.columns = {"suite", "case"};
    std::size_t nfail = 0;
    for (const auto& r : results) {
        for (const auto& [stem, table] : r.tables) {
            const std::string file = stem + ".csv";
            write_csv((fs::path(dir) / file).string(), table, hash);
            m.emplace_back("artifact", file);
        }
        for (const auto& [k, v] : r.metrics) m.emplace_back(r.name + "." + k, fmt(v));
        for (const auto& f : r.failures) failures.add({r.name, f});
        nfail += r.failures.size();
    }
    write_csv((fs::path(dir) / "failures.csv").string(), failures, hash);
    m.emplace_back("artifact", "failures.csv");
    m.emplace_back("failures", std::to_string(nfail));
    m.emplace_back("status", nfail == 0 ? "ok" : "suite-failure");
    std::istringstream canon(canonical_text(cfg));
    for (std::string line; std::getline(canon, line);) {
        const auto eq = line.find(" = ");
        m.emplace_back("config." + line.substr(0, eq), line.substr(eq + 3));
    }
    write_manifest((fs::path(dir) / "manifest.txt").string(), m);

    for (const auto& r : results) {
        std::cout << r.name << ": " << (r.ok() ? "ok" : "FAILED");
        for (const auto& [k, v] : r.metrics) std::cout << "  " << k << "=" << fmt(v);
        std::cout << "\n";
        for (const auto& f : r.failures) std::cout << "  violation: " << f << "\n";
    }
    std::cout << "wrote " << dir << " (config_hash " << hash << ")\n";
    return nfail == 0 ? kOk : kSuiteFailure;
}

RVec sweep_or(const ExperimentConfig& cfg, const Options& opt, const std::string& fallback_name, RVec fallback) {
    const std::string name = opt.sweep.empty() ? fallback_name : opt.sweep;
    const RVec& v = cfg.sweep(name);
    return v.empty() ? fallback : v;
}

// Rows ordered by signed wavenumber, columns by x node.
void sorted_rows(const HusimiField& f, RVec& ordered, std::size_t& nx, std::size_t& ny) {
    nx = f.x_nodes();
    ny = f.grid.points();
    std::vector<std::size_t> order(ny);
    for (std::size_t k = 0; k < ny; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f.xi_at(a, 0) < f.xi_at(b, 0); });
    ordered.assign(nx * ny, 0.0);
    for (std::size_t r = 0; r < ny; ++r)
        for (std::size_t c = 0; c < nx; ++c) ordered[r * nx + c] = f.values[c * ny + order[r]];
}

void raster_to_svg(const std::string& raster, const std::string& svg) {
    std::ifstream is(raster, std::ios::binary);
    HusimiField f = read_husimi_raster(is);
    if (f.grid.d != 1) return;
    RVec ordered;
    std::size_t nx = 0, ny = 0;
    sorted_rows(f, ordered, nx, ny);
    const double k = std::numbers::pi / f.grid.delta;
    std::ofstream os(svg);
    svg_heatmap(os, ordered, nx, ny, {"Husimi density, h = " + fmt(f.h), "x", "xi"}, {0.0, f.h * f.grid.L()}, {-k, k});
}

int cmd_husimi(const ExperimentConfig& cfg, const Options& opt) {
    HusimiField field;
    auto r = run_husimi(cfg, sweep_or(cfg, opt, "h", {cfg.solver.h}), {}, &field);
    const std::string dir = (fs::path(cfg.out) / "husimi").string();
    ensure_dir(dir);
    Manifest extra;
    if (!field.values.empty()) {
        r.tables.emplace_back("husimi_field", husimi_table(field));
        const std::string raster = (fs::path(dir) / "husimi.raster").string();
        {
            std::ofstream os(raster, std::ios::binary | std::ios::trunc);
            write_husimi_raster(os, field);
        }
        raster_to_svg(raster, (fs::path(dir) / "husimi.svg").string());
        extra = {{"artifact", "husimi.raster"}, {"artifact", "husimi.svg"}};
    }
    return emit("husimi", cfg, opt, {r}, extra);
}

void plot_if(const fs::path& csv, const std::string& xcol, const std::vector<std::string>& ycols, const PlotAxes& axes) {
    CsvTable t = read_csv(csv.string());
    std::vector<Series> series;
    for (const auto& y : ycols) series.push_back({y, t.numbers(xcol), t.numbers(y)});
    std::ofstream os(fs::path(csv).replace_extension(".svg"));
    svg_lines(os, series, axes);
}

int cmd_report(const ExperimentConfig& cfg) {
    if (!fs::exists(cfg.out)) {
        std::cerr << "report: output directory '" << cfg.out << "' does not exist\n";
        return kSuiteFailure;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(cfg.out))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    CsvTable summary;
    summary.columns = {"file", "rows", "config_hash", "columns"};
    std::size_t failures = 0;
    for (const auto& p : files) {
        const std::string rel = fs::relative(p, cfg.out).string();
        if (p.extension() == ".raster") {
            raster_to_svg(p.string(), fs::path(p).replace_extension(".svg").string());
            continue;
        }
        if (p.extension() != ".csv" || rel == "summary.csv") continue;
        std::string hash;
        CsvTable t = read_csv(p.string(), &hash);
        std::string cols;
        for (const auto& c : t.columns) cols += (cols.empty() ? "" : " ") + c;
        summary.add({rel, t.size(), hash, cols});
        const std::string stem = p.stem().string();
        if (stem == "failures") failures += t.size();
        if (stem == "expansion") plot_if(p, "delta", {"R0", "R1", "R2"}, {"Duhamel remainders", "delta", "remainder", true, true});
        if (stem == "truncation") plot_if(p, "eps", {"sup_gap"}, {"truncation gap", "eps", "sup gap", true, true});
        if (stem == "band_mass") plot_if(p, "h", {"growth"}, {"band-mass growth", "h", "growth", true, true});
        if (stem == "perturb") plot_if(p, "amplitude", {"sup_diff"}, {"potential perturbation", "amplitude", "sup diff", true, true});
        if (stem == "weights") plot_if(p, "dt", {"sup_weighted_alpha1"}, {"weighted sup vs step", "dt", "sup", false, false});
        if (stem.rfind("trajectory_h", 0) == 0)
            plot_if(p, "t", {"norm_uG", "weighted_half_alpha1", "weighted_alpha1"}, {"trajectory norms", "t", "norm", false, false});
        if (stem.rfind("diagnostics_h", 0) == 0)
            plot_if(p, "iterate", {"m_increment"}, {"Picard increments", "iterate", "M increment", false, true});
    }
    write_csv((fs::path(cfg.out) / "summary.csv").string(), summary, config_hash(cfg));
    std::cout << "summary of " << summary.size() << " tables, " << failures << " recorded violations -> "
              << (fs::path(cfg.out) / "summary.csv").string() << "\n";
    return failures == 0 ? kOk : kSuiteFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fock-space center-of-mass experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config, "TOML-style configuration file (built-in defaults when omitted)");
    auto* seed_opt = app.add_option("--seed", opt.seed, "override experiment.seed");
    app.add_option("--out", opt.out, "override experiment.out");
    app.add_option("--threads", opt.threads, "override experiment.threads");
    app.add_option("--sweep", opt.sweep, "sweep list driving the run: h, eps, gamma or delta");

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"verify-ops", "operator algebra and center-of-mass property suites"},
        {"verify-ineq", "L^p bound batches and dispersive decay"},
        {"verify-norms", "N_{p,i} equivalence and scaling batches"},
        {"mc-crosscheck", "Monte Carlo against chaos and Fock identities"},
        {"solve", "Picard solve with oracle and identity checks"},
        {"truncate-sweep", "number truncation gap over eps"},
        {"expansion", "short-time Duhamel remainder orders"},
        {"perturb", "stability under potential perturbation"},
        {"husimi", "phase-space dumps and band mass"},
        {"report", "aggregate CSVs in the output directory into a summary and plots"},
    };
    for (const auto& [name, help] : subs) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    opt.seed_set = seed_opt->count() > 0;
    const std::string sub = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        if (!opt.config.empty()) cfg = load_config(opt.config);
        if (opt.seed_set) cfg.seed = opt.seed;
        if (!opt.out.empty()) cfg.out = opt.out;
        if (opt.threads != 0) cfg.threads = opt.threads;
        cfg.validate();
        if (!opt.sweep.empty()) cfg.sweep(opt.sweep);
    } catch (const ConfigError& e) {
        for (const auto& err : e.errors) std::cerr << "config-error: " << err << "\n";
        return kConfigError;
    }

    try {
        if (sub == "verify-ops") return emit(sub, cfg, opt, {run_verify_ops_lab(cfg), run_verify_ops_cm(cfg, cfg.trials)});
        if (sub == "verify-ineq") return emit(sub, cfg, opt, {run_verify_ineq(cfg), run_dispersive()});
        if (sub == "verify-norms") return emit(sub, cfg, opt, {run_verify_norms(cfg)});
        if (sub == "mc-crosscheck") return emit(sub, cfg, opt, {run_mc_crosscheck(cfg)});
        if (sub == "solve") {
            std::vector<SuiteResult> rs;
            const bool by_gamma = opt.sweep == "gamma";
            for (double v : sweep_or(cfg, opt, "h", {by_gamma ? cfg.solver.gamma : cfg.solver.h})) {
                ExperimentConfig c = cfg;
                if (by_gamma) {
                    c.solver.gamma = v;
                    c.calibrate = false;
                } else {
                    c.solver.h = v;
                }
                rs.push_back(run_solve(c));
                if (rs.back().ok() && !by_gamma) rs.push_back(run_weight_propagation(c));
            }
            return emit(sub, cfg, opt, rs);
        }
        if (sub == "truncate-sweep")
            return emit(sub, cfg, opt, {run_truncate_sweep(cfg, sweep_or(cfg, opt, "eps", {0.2, 0.1, 0.05, 0.025}))});
        if (sub == "expansion") {
            RVec deltas;
            for (int j = 0; j <= 8; ++j) deltas.push_back(0.016 * std::pow(10.0, j / 8.0));
            return emit(sub, cfg, opt, {run_expansion(cfg, sweep_or(cfg, opt, "delta", deltas))});
        }
        if (sub == "perturb") return emit(sub, cfg, opt, {run_perturb(cfg, 0.02)});
        if (sub == "husimi") return cmd_husimi(cfg, opt);
        if (sub == "report") return cmd_report(cfg);
    } catch (const ConfigError& e) {
        for (const auto& err : e.errors) std::cerr << "config-error: " << err << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config-error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSuiteFailure;
    }
    return kConfigError;
}
