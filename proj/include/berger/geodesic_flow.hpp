#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "berger/curvature_model.hpp"

namespace berger {

enum class Bundle { TM, T1M };

[[nodiscard]] std::string to_string(Bundle b);
/// Parses "TM" or "T1M"; throws InvalidArgument otherwise.
[[nodiscard]] Bundle parse_bundle(const std::string& s);

/// Parallel-frame reduction of a bundle curve: u = x', xi, w = xi'.
struct BundleState {
    double sigma = 0.0;
    FrameVector u;
    FrameVector xi;
    FrameVector w;
};

struct StateDerivative {
    FrameVector du;
    FrameVector dxi;
    FrameVector dw;
};

/// Quantities derived from a state: c = |w|, mu = <w, J xi>, lambda^2 = c^2 + delta^2 mu^2.
struct Diagnostics {
    double c = 0.0;
    double mu = 0.0;
    double lambda = 0.0;
    double xi_norm = 0.0;
    double xi_dot_w = 0.0;
    double lifted_speed = 0.0; ///< |u|^2 + |w|^2 + delta^2 mu^2
};

[[nodiscard]] Diagnostics diagnostics(const BundleState& s, const BergerParams& params);

/// Throws ConstraintViolation unless |xi| = 1 and <xi, w> = 0 within tol.
void check_t1m_state(const BundleState& s, double tol);

struct FlowConfig {
    Bundle bundle = Bundle::T1M;
    SpaceFormModel model;
    BergerParams params;
    double step = 1e-3;
    double sigma_max = 20.0;
    int sample_stride = 1;
    std::uint64_t seed = 0;
    /// Rescale xi to unit length after each T1M step.
    bool renormalize = false;

    void validate() const;
};

struct Sample {
    BundleState state;
    Diagnostics diag;
};

struct Trajectory {
    FlowConfig config;
    std::vector<Sample> samples;
};

/// Geodesic right-hand side on the Berger tangent bundle.
[[nodiscard]] StateDerivative rhs_TM(const BundleState& s, const SpaceFormModel& model,
                                     const BergerParams& params);

/// Geodesic right-hand side on the Berger unit tangent bundle, with c and mu
/// taken from the instantaneous state. Rejects states off T1M by more than 1e-6.
[[nodiscard]] StateDerivative rhs_T1M(const BundleState& s, const SpaceFormModel& model,
                                      const BergerParams& params);

struct InitialState {
    BundleState state;
    /// lambda^2 = 1: x' = 0 and the projected curve is a point.
    bool vertical = false;
};

/**
 * Builds a unit-speed initial state. For T1M, xi0 is normalized and w0 is
 * projected orthogonally to it. |u| is fixed by the lifted speed and u points
 * along u_dir.
 */
[[nodiscard]] InitialState prepare_initial(const FrameVector& xi0, const FrameVector& w0,
                                           const FrameVector& u_dir, const BergerParams& params,
                                           Bundle bundle);

/// Fixed-step classical RK4 on [0, sigma_max], sampled every sample_stride steps.
[[nodiscard]] Trajectory integrate(const FlowConfig& config, const BundleState& state0);

/// Max absolute deviation of each quantity from its initial value.
struct DriftReport {
    double c = 0.0;
    double mu = 0.0;
    double xi_norm = 0.0;
    double xi_dot_w = 0.0;
    double lifted_speed = 0.0;
    double lambda = 0.0;

    /// The quantities conserved on T1M: everything above.
    [[nodiscard]] double worst_t1m() const;
};

[[nodiscard]] DriftReport conserved_report(const Trajectory& traj);

/// Closed-form rate of the twisted operator along TM geodesics as stated for
/// Berger bundles: 2 delta^6 mu <w, xi> (1 - |xi|^2) / (1 + delta^2 |xi|^2) R(xi, J xi).
[[nodiscard]] Eigen::MatrixXd tm_rate_closed_form(const SpaceFormModel& model,
                                                  const BergerParams& params,
                                                  const FrameVector& xi, const FrameVector& w);

struct RateSample {
    double sigma = 0.0;
    double fd_norm = 0.0;          ///< ||d/dsigma script_R|| by central differences
    double reference_norm = 0.0;   ///< zero on T1M, closed form on TM
    double residual = 0.0;         ///< ||fd - reference||
};

struct RateCheck {
    std::vector<RateSample> samples;
    double max_fd_norm = 0.0;
    double max_reference_norm = 0.0;
    double max_residual = 0.0;
    /// max_residual / max_reference_norm; equals max_residual when the reference is zero.
    double relative_residual = 0.0;
};

/// Central finite difference of script_R_matrix along the trajectory, compared
/// with zero (T1M) or tm_rate_closed_form (TM). Needs at least 3 samples.
[[nodiscard]] RateCheck script_R_rate_check(const Trajectory& traj);

} // namespace berger
