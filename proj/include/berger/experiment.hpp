#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "berger/curvature_model.hpp"
#include "berger/errors.hpp"
#include "berger/frenet_analysis.hpp"
#include "berger/geodesic_flow.hpp"
#include "berger/lifted_geometry.hpp"
#include "berger/sampling.hpp"

namespace berger {

/// Malformed config document (exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Schema-valid document with offending values (exit code 2).
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::vector<std::string> keys)
        : Error(what), keys_(std::move(keys)) {}
    [[nodiscard]] const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    std::vector<std::string> keys_;
};

struct Tolerances {
    double connection = 1e-10;
    double conservation = 1e-8;
    double rate_t1m = 1e-6;
    double rate_tm_relative = 1e-5;
    double chain_relative = 1e-4;
    double norm_constancy = 1e-7;
    double speed_identity = 1e-10;
    double constancy = 1e-6;
    double vanishing = 1e-7;
    double span = 1e-10;
    double rank_tol = 1e-10;
    /// The TM curvature k_1 must vary by more than this.
    double divergence = 1e-2;
};

/// Explicit initial data or a request for seeded random data.
struct InitialData {
    bool random = true;
    FrameVector xi;
    FrameVector xi_dot;
    FrameVector u_dir;
};

struct ExperimentConfig {
    FlowConfig flow;
    int p_max = 8;
    /// Random jets for the connection checks.
    int samples = 1000;
    /// Random initial conditions for the sixth-curvature sweep.
    int sweep = 100;
    /// Every profile_stride-th trajectory sample enters a curvature profile.
    int profile_stride = 10;
    /// Fiber norm |xi_0| for random TM data.
    double xi_norm = 0.5;
    std::string out_dir = "out";
    ConnectionVariant mutation = ConnectionVariant::exact;
    bool timing = false;
    Tolerances tol;
    InitialData initial;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Defaults: T1M, n=4, m=4, delta=0.5, step 1e-3, sigma_max 20, p_max 8, seed 0.
[[nodiscard]] ExperimentConfig default_config();

/**
 * Builds a validated config from a JSON document with `overrides` applied on
 * top (flag values beat file values). Throws ConfigError naming every
 * offending key, or UsageError for structurally malformed documents.
 */
[[nodiscard]] ExperimentConfig load_config(const nlohmann::json& document,
                                           const nlohmann::json& overrides = nlohmann::json::object());

/// Reads the file at `path` (empty path means an empty document) and calls load_config.
[[nodiscard]] ExperimentConfig load_config_file(const std::string& path,
                                                const nlohmann::json& overrides = nlohmann::json::object());

/// Seeded random initial data: xi uniform on the unit sphere, w Gaussian then
/// projected orthogonally and scaled so lambda^2 is uniform in [0.05, 0.8],
/// u_dir uniform on the sphere. For TM the fiber vector is rescaled to xi_norm.
[[nodiscard]] InitialData random_initial_data(int n, const BergerParams& params, Bundle bundle,
                                              double xi_norm, Rng& rng);

/// The initial bundle state the config describes.
[[nodiscard]] InitialState initial_state(const ExperimentConfig& config);

enum class ClaimStatus { pass, fail, inapplicable };

struct Claim {
    std::string id;
    std::string anchor;
    ClaimStatus status = ClaimStatus::fail;
    double residual = 0.0;
    double tolerance = 0.0;
    /// "<=" for residual bounds, ">" for claims that a quantity must exceed a threshold.
    std::string comparison = "<=";
    std::string note;
    nlohmann::json detail = nlohmann::json::object();
};

/// Creates a claim whose status follows from the residual and tolerance.
[[nodiscard]] Claim make_claim(std::string id, std::string anchor, double residual,
                               double tolerance, std::string comparison = "<=");
[[nodiscard]] Claim inapplicable_claim(std::string id, std::string anchor, std::string note);

struct Report {
    std::string command;
    nlohmann::json config;
    std::vector<Claim> claims;
    double elapsed_seconds = 0.0;
    bool include_timing = false;

    /// Every applicable claim passes.
    [[nodiscard]] bool overall_pass() const;
    [[nodiscard]] std::vector<std::string> failed_claims() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// Deterministic serialization (sorted keys, two-space indent, trailing newline).
    [[nodiscard]] std::string dump() const;
};

struct CommandResult {
    Report report;
    int exit_code = 0;
    /// Files written, relative to the output directory.
    std::vector<std::string> files;
};

[[nodiscard]] CommandResult cmd_verify_connection(const ExperimentConfig& config);
[[nodiscard]] CommandResult cmd_integrate(const ExperimentConfig& config);
[[nodiscard]] CommandResult cmd_curvatures(const ExperimentConfig& config);
[[nodiscard]] CommandResult cmd_theorems(const ExperimentConfig& config);

/// Runs a command by name ("verify-connection", "integrate", "curvatures", "theorems").
[[nodiscard]] CommandResult run_command(const std::string& name, const ExperimentConfig& config);

/// Trajectory CSV: sigma, u_*, xi_*, w_*, c, mu, lambda, xi_norm, lifted_speed.
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj);

/// Profile CSV: sigma, k_1..k_{p_max-1}, effective_rank.
[[nodiscard]] std::string profile_csv(const CurvatureProfile& profile);

} // namespace berger
