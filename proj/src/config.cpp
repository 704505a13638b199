#include "fockcm/config.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace fockcm {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string s = "invalid configuration";
    for (const auto& e : errors) s += "\n  " + e;
    return s;
}

using Inputs = std::vector<std::string>;
using Setter = std::function<void(const Inputs&, ExperimentConfig&)>;

/// Thrown by the scalar readers, caught per key and turned into "block.key: message".
struct FieldError {
    std::string message;
};

const std::string& single(const Inputs& in) {
    if (in.size() != 1) throw FieldError{"expected a single value"};
    return in.front();
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FieldError{"not a number: '" + s + "'"};
    }
    if (used != s.size() || !std::isfinite(v)) throw FieldError{"not a finite number: '" + s + "'"};
    return v;
}

long long to_int(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw FieldError{"not an integer: '" + s + "'"};
    }
    if (used != s.size()) throw FieldError{"not an integer: '" + s + "'"};
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw FieldError{"expected true or false, got '" + s + "'"};
}

RVec to_list(const Inputs& in) {
    RVec out;
    for (const auto& s : in)
        if (!s.empty()) out.push_back(to_double(s));
    return out;
}

template <class T>
Setter number(T ExperimentConfig::*field) {
    return [field](const Inputs& in, ExperimentConfig& c) { c.*field = static_cast<T>(to_double(single(in))); };
}

Setter integer(int ExperimentConfig::*field) {
    return [field](const Inputs& in, ExperimentConfig& c) { c.*field = static_cast<int>(to_int(single(in))); };
}

template <class Enum>
Enum pick(const std::string& s, const std::vector<std::pair<const char*, Enum>>& names) {
    std::string allowed;
    for (const auto& [n, e] : names) {
        if (s == n) return e;
        allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    }
    throw FieldError{"unknown value '" + s + "' (allowed: " + allowed + ")"};
}

const std::vector<std::pair<const char*, PotentialKind>> kPotentialNames = {
    {"random", PotentialKind::random}, {"gaussian", PotentialKind::gaussian}, {"cosine", PotentialKind::cosine}};
const std::vector<std::pair<const char*, StateKind>> kStateNames = {
    {"random", StateKind::random}, {"vacuum", StateKind::vacuum}, {"pair", StateKind::pair}};
const std::vector<std::pair<const char*, ChiKind>> kChiNames = {{"hard", ChiKind::hard},
                                                                {"exponential", ChiKind::exponential}};

template <class Enum>
const char* name_of(Enum e, const std::vector<std::pair<const char*, Enum>>& names) {
    for (const auto& [n, v] : names)
        if (v == e) return n;
    return "?";
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"experiment.id", [](const Inputs& in, ExperimentConfig& c) { c.id = single(in); }},
        {"experiment.seed",
         [](const Inputs& in, ExperimentConfig& c) {
             const long long v = to_int(single(in));
             if (v < 0) throw FieldError{"must be non-negative"};
             c.seed = static_cast<std::uint64_t>(v);
         }},
        {"experiment.out", [](const Inputs& in, ExperimentConfig& c) { c.out = single(in); }},
        {"experiment.threads", integer(&ExperimentConfig::threads)},

        {"grid.d", [](const Inputs& in, ExperimentConfig& c) { c.grid.d = static_cast<int>(to_int(single(in))); }},
        {"grid.M", [](const Inputs& in, ExperimentConfig& c) { c.grid.M = static_cast<int>(to_int(single(in))); }},
        {"grid.delta", [](const Inputs& in, ExperimentConfig& c) { c.grid.delta = to_double(single(in)); }},

        {"suite.trials", integer(&ExperimentConfig::trials)},
        {"suite.tol", number(&ExperimentConfig::tol)},
        {"suite.mc_samples", integer(&ExperimentConfig::mc_samples)},

        {"potential.kind",
         [](const Inputs& in, ExperimentConfig& c) { c.potential.kind = pick(single(in), kPotentialNames); }},
        {"potential.band",
         [](const Inputs& in, ExperimentConfig& c) { c.potential.band = static_cast<int>(to_int(single(in))); }},
        {"potential.sigma", [](const Inputs& in, ExperimentConfig& c) { c.potential.sigma = to_double(single(in)); }},
        {"potential.scale", [](const Inputs& in, ExperimentConfig& c) { c.potential.scale = to_double(single(in)); }},
        {"potential.imag", [](const Inputs& in, ExperimentConfig& c) { c.potential.imag = to_double(single(in)); }},

        {"state.kind", [](const Inputs& in, ExperimentConfig& c) { c.state = pick(single(in), kStateNames); }},
        {"state.mode", integer(&ExperimentConfig::state_mode)},

        {"solver.h", [](const Inputs& in, ExperimentConfig& c) { c.solver.h = to_double(single(in)); }},
        {"solver.gamma", [](const Inputs& in, ExperimentConfig& c) { c.solver.gamma = to_double(single(in)); }},
        {"solver.alpha0", [](const Inputs& in, ExperimentConfig& c) { c.solver.alpha0 = to_double(single(in)); }},
        {"solver.alpha1", [](const Inputs& in, ExperimentConfig& c) { c.solver.alpha1 = to_double(single(in)); }},
        {"solver.dt", [](const Inputs& in, ExperimentConfig& c) { c.solver.dt = to_double(single(in)); }},
        {"solver.min_steps",
         [](const Inputs& in, ExperimentConfig& c) { c.solver.min_steps = static_cast<int>(to_int(single(in))); }},
        {"solver.tol", [](const Inputs& in, ExperimentConfig& c) { c.solver.tol = to_double(single(in)); }},
        {"solver.max_iter",
         [](const Inputs& in, ExperimentConfig& c) { c.solver.max_iter = static_cast<int>(to_int(single(in))); }},
        {"solver.nmax", [](const Inputs& in, ExperimentConfig& c) { c.solver.nmax = static_cast<int>(to_int(single(in))); }},
        {"solver.eps", [](const Inputs& in, ExperimentConfig& c) { c.solver.eps = to_double(single(in)); }},
        {"solver.chi", [](const Inputs& in, ExperimentConfig& c) { c.solver.chi = pick(single(in), kChiNames); }},
        {"solver.xi",
         [](const Inputs& in, ExperimentConfig& c) {
             c.solver.xi.clear();
             for (double x : to_list(in)) c.solver.xi.push_back({x});
         }},
        {"solver.calibrate", [](const Inputs& in, ExperimentConfig& c) { c.calibrate = to_bool(single(in)); }},
        {"solver.oracle_substeps", integer(&ExperimentConfig::oracle_substeps)},

        {"weights.alpha_samples",
         [](const Inputs& in, ExperimentConfig& c) { c.solver.sup.alpha_samples = static_cast<int>(to_int(single(in))); }},
        {"weights.tau_refine",
         [](const Inputs& in, ExperimentConfig& c) { c.solver.sup.tau_refine = static_cast<int>(to_int(single(in))); }},
        {"weights.delta_substeps",
         [](const Inputs& in, ExperimentConfig& c) { c.solver.sup.delta_substeps = static_cast<int>(to_int(single(in))); }},

        {"expansion.steps", integer(&ExperimentConfig::expansion_steps)},
        {"expansion.terms", integer(&ExperimentConfig::expansion_terms)},

        {"semiclassics.h", number(&ExperimentConfig::sc_h)},
        {"semiclassics.coarsen", integer(&ExperimentConfig::coarsen)},
        {"semiclassics.T", number(&ExperimentConfig::sc_T)},
        {"semiclassics.band",
         [](const Inputs& in, ExperimentConfig& c) {
             RVec v = to_list(in);
             if (v.size() % 2 != 0) throw FieldError{"expected pairs lo, hi"};
             c.band.intervals.clear();
             for (std::size_t i = 0; i < v.size(); i += 2) c.band.intervals.emplace_back(v[i], v[i + 1]);
         }},
        {"semiclassics.width", [](const Inputs& in, ExperimentConfig& c) { c.band.width = to_double(single(in)); }},
        {"semiclassics.whole", [](const Inputs& in, ExperimentConfig& c) { c.band.whole = to_bool(single(in)); }},

        {"sweep.h", [](const Inputs& in, ExperimentConfig& c) { c.sweep_h = to_list(in); }},
        {"sweep.eps", [](const Inputs& in, ExperimentConfig& c) { c.sweep_eps = to_list(in); }},
        {"sweep.gamma", [](const Inputs& in, ExperimentConfig& c) { c.sweep_gamma = to_list(in); }},
        {"sweep.delta", [](const Inputs& in, ExperimentConfig& c) { c.sweep_delta = to_list(in); }},
    };
    return table;
}

void require(std::vector<std::string>& errors, bool ok, const std::string& field, const std::string& message) {
    if (!ok) errors.push_back(field + ": " + message);
}

bool power_of_two(int M) { return M >= 4 && (M & (M - 1)) == 0; }

void require_positive_list(std::vector<std::string>& errors, const RVec& v, const std::string& field) {
    for (std::size_t i = 0; i < v.size(); ++i)
        require(errors, v[i] > 0.0, field, "entry " + std::to_string(i) + " must be positive");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs) : std::runtime_error(join_errors(errs)), errors(std::move(errs)) {}

const RVec& ExperimentConfig::sweep(const std::string& name) const {
    if (name == "h") return sweep_h;
    if (name == "eps") return sweep_eps;
    if (name == "gamma") return sweep_gamma;
    if (name == "delta") return sweep_delta;
    throw ConfigError({"--sweep: unknown sweep list '" + name + "' (allowed: h, eps, gamma, delta)"});
}

void ExperimentConfig::validate() const {
    std::vector<std::string> e;
    require(e, !id.empty(), "experiment.id", "must not be empty");
    require(e, !out.empty(), "experiment.out", "must not be empty");
    require(e, threads >= 1, "experiment.threads", "must be at least 1");

    require(e, grid.d >= 1 && grid.d <= 3, "grid.d", "must be 1, 2 or 3");
    require(e, power_of_two(grid.M), "grid.M", "must be a power of two >= 4");
    require(e, grid.delta > 0.0, "grid.delta", "must be positive");

    require(e, trials >= 1, "suite.trials", "must be at least 1");
    require(e, tol > 0.0, "suite.tol", "must be positive");
    require(e, mc_samples >= 2, "suite.mc_samples", "must be at least 2");

    require(e, potential.band >= 0, "potential.band", "must be non-negative");
    require(e, potential.sigma > 0.0, "potential.sigma", "must be positive");
    require(e, potential.scale >= 0.0, "potential.scale", "must be non-negative");
    require(e, state_mode >= 0 && state_mode < grid.M / 2, "state.mode", "must lie in [0, M/2)");

    const SolverConfig& s = solver;
    require(e, s.h > 0.0, "solver.h", "must be positive");
    require(e, s.gamma > 0.0, "solver.gamma", "must be positive");
    require(e, s.alpha0 < s.alpha1, "solver.alpha0", "must be below solver.alpha1");
    require(e, s.dt > 0.0, "solver.dt", "must be positive");
    require(e, s.min_steps >= 2, "solver.min_steps", "must be at least 2");
    require(e, s.tol > 0.0, "solver.tol", "must be positive");
    require(e, s.max_iter >= 1, "solver.max_iter", "must be at least 1");
    require(e, s.nmax >= 0 && s.nmax <= 4, "solver.nmax", "must lie in [0, 4]");
    require(e, s.eps >= 0.0, "solver.eps", "must be non-negative");
    require(e, oracle_substeps >= 1, "solver.oracle_substeps", "must be at least 1");
    require(e, s.sup.alpha_samples >= 1, "weights.alpha_samples", "must be at least 1");
    require(e, s.sup.tau_refine >= 1, "weights.tau_refine", "must be at least 1");
    require(e, s.sup.delta_substeps >= 1, "weights.delta_substeps", "must be at least 1");
    require(e, expansion_steps >= 8, "expansion.steps", "must be at least 8");
    require(e, expansion_terms >= 3, "expansion.terms", "must be at least 3");

    require(e, sc_h > 0.0, "semiclassics.h", "must be positive");
    require(e, coarsen >= 1, "semiclassics.coarsen", "must be at least 1");
    require(e, sc_T > 0.0, "semiclassics.T", "must be positive");
    require(e, band.width > 0.0, "semiclassics.width", "must be positive");
    require(e, band.whole || !band.intervals.empty(), "semiclassics.band", "needs at least one interval");
    for (const auto& [lo, hi] : band.intervals) require(e, lo <= hi, "semiclassics.band", "interval with lo > hi");

    require_positive_list(e, sweep_h, "sweep.h");
    require_positive_list(e, sweep_eps, "sweep.eps");
    require_positive_list(e, sweep_gamma, "sweep.gamma");
    require_positive_list(e, sweep_delta, "sweep.delta");

    // Cross-field invariants owned by the modules, only once the fields themselves are sane.
    if (e.empty()) {
        try {
            s.validate(grid);
        } catch (const std::invalid_argument& x) {
            e.push_back(std::string("solver: ") + x.what());
        }
    }
    if (!e.empty()) throw ConfigError(e);
}

ExperimentConfig parse_config(std::istream& is) {
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(is);
    } catch (const std::exception& x) {
        throw ConfigError({std::string("syntax: ") + x.what()});
    }
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    const auto& table = setters();
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        std::string key;
        for (const auto& p : item.parents) key += p + ".";
        key += item.name;
        auto it = table.find(key);
        if (it == table.end()) {
            errors.push_back(key + ": unknown key");
            continue;
        }
        try {
            it->second(item.inputs, cfg);
        } catch (const FieldError& f) {
            errors.push_back(key + ": " + f.message);
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        errors.insert(errors.end(), e.errors.begin(), e.errors.end());
    }
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError({"--config: cannot open '" + path + "'"});
    return parse_config(is);
}

std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17);
    auto list = [&](const char* key, const RVec& v) {
        os << key << " = [";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
        os << "]\n";
    };
    os << "experiment.id = " << c.id << "\n"
       << "experiment.seed = " << c.seed << "\n"
       << "grid.d = " << c.grid.d << "\n"
       << "grid.M = " << c.grid.M << "\n"
       << "grid.delta = " << c.grid.delta << "\n"
       << "suite.trials = " << c.trials << "\n"
       << "suite.tol = " << c.tol << "\n"
       << "suite.mc_samples = " << c.mc_samples << "\n"
       << "potential.kind = " << name_of(c.potential.kind, kPotentialNames) << "\n"
       << "potential.band = " << c.potential.band << "\n"
       << "potential.sigma = " << c.potential.sigma << "\n"
       << "potential.scale = " << c.potential.scale << "\n"
       << "potential.imag = " << c.potential.imag << "\n"
       << "state.kind = " << name_of(c.state, kStateNames) << "\n"
       << "state.mode = " << c.state_mode << "\n"
       << "solver.h = " << c.solver.h << "\n"
       << "solver.gamma = " << c.solver.gamma << "\n"
       << "solver.alpha0 = " << c.solver.alpha0 << "\n"
       << "solver.alpha1 = " << c.solver.alpha1 << "\n"
       << "solver.dt = " << c.solver.dt << "\n"
       << "solver.min_steps = " << c.solver.min_steps << "\n"
       << "solver.tol = " << c.solver.tol << "\n"
       << "solver.max_iter = " << c.solver.max_iter << "\n"
       << "solver.nmax = " << c.solver.nmax << "\n"
       << "solver.eps = " << c.solver.eps << "\n"
       << "solver.chi = " << name_of(c.solver.chi, kChiNames) << "\n";
    RVec xi;
    for (const auto& x : c.solver.xi) xi.insert(xi.end(), x.begin(), x.end());
    list("solver.xi", xi);
    os << "solver.calibrate = " << (c.calibrate ? "true" : "false") << "\n"
       << "solver.oracle_substeps = " << c.oracle_substeps << "\n"
       << "weights.alpha_samples = " << c.solver.sup.alpha_samples << "\n"
       << "weights.tau_refine = " << c.solver.sup.tau_refine << "\n"
       << "weights.delta_substeps = " << c.solver.sup.delta_substeps << "\n"
       << "expansion.steps = " << c.expansion_steps << "\n"
       << "expansion.terms = " << c.expansion_terms << "\n"
       << "semiclassics.h = " << c.sc_h << "\n"
       << "semiclassics.coarsen = " << c.coarsen << "\n"
       << "semiclassics.T = " << c.sc_T << "\n";
    RVec band;
    for (const auto& [lo, hi] : c.band.intervals) {
        band.push_back(lo);
        band.push_back(hi);
    }
    list("semiclassics.band", band);
    os << "semiclassics.width = " << c.band.width << "\n"
       << "semiclassics.whole = " << (c.band.whole ? "true" : "false") << "\n";
    list("sweep.h", c.sweep_h);
    list("sweep.eps", c.sweep_eps);
    list("sweep.gamma", c.sweep_gamma);
    list("sweep.delta", c.sweep_delta);
    return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = canonical_text(cfg);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("config_hash: digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < 8; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
    return os.str();
}

}  // namespace fockcm
