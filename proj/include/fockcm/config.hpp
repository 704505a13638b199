#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fockcm/duhamel.hpp"
#include "fockcm/semiclassics.hpp"

namespace fockcm {

/// Field-level validation failure; each entry reads "block.key: message".
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    std::vector<std::string> errors;
};

enum class PotentialKind { random, gaussian, cosine };
enum class StateKind { random, vacuum, pair };

struct PotentialSpec {
    PotentialKind kind = PotentialKind::random;
    int band = 4;            // random: Fourier band; cosine: mode index
    double sigma = 0.5;      // gaussian width
    double scale = 1.0;      // L^2 norm (random, gaussian) or amplitude (cosine)
    double imag = 0.0;       // V is multiplied by (1 + i imag); non-zero gives a complex potential
};

struct ExperimentConfig {
    std::string id = "default";
    std::uint64_t seed = 1;
    std::string out = "out";
    int threads = 1;

    GridSpec grid{1, 32, 1.0};
    int trials = 20;
    double tol = 1e-10;
    int mc_samples = 10000;

    PotentialSpec potential;
    StateKind state = StateKind::random;
    int state_mode = 2;          // pair: plane-wave mode of the one-particle half
    SolverConfig solver;
    bool calibrate = true;       // calibrate gamma to contraction <= 1/2 before solving
    int oracle_substeps = 4;
    int expansion_steps = 256;
    int expansion_terms = 10;

    double sc_h = 0.05;
    int coarsen = 1;
    double sc_T = 1.0;
    EnergyBand band{{{0.8, 1.2}}, 0.2, false};

    RVec sweep_h;
    RVec sweep_eps;
    RVec sweep_gamma;
    RVec sweep_delta;

    /// The sweep list called `name` (h, eps, gamma, delta). Throws ConfigError on an unknown name.
    const RVec& sweep(const std::string& name) const;
    /// Throws ConfigError listing every violated field.
    void validate() const;
};

/// Parse TOML-style text: block tables, scalars and flat arrays. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Canonical key = value dump, one line per field in a fixed order.
std::string canonical_text(const ExperimentConfig& cfg);
/// First 16 hex digits of SHA-256 of canonical_text.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace fockcm
