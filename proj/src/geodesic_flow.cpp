#include "berger/geodesic_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "berger/errors.hpp"

namespace berger {

namespace {

constexpr double kRhsConstraintTol = 1e-6;
constexpr double kDriftAbortTol = 1e-4;
constexpr double kUnitSpeedTol = 1e-12;

StateDerivative rhs_TM_unchecked(const BundleState& s, const SpaceFormModel& model,
                                 const BergerParams& params) {
    const double d2 = params.delta * params.delta;
    const FrameVector Jxi = apply_J(s.xi);
    const double mu = s.w.dot(Jxi);
    const double kappa = d2 / (1.0 + d2 * s.xi.squaredNorm());
    StateDerivative k;
    k.du = -script_R_apply(model, params, s.xi, s.w, s.u);
    k.dxi = s.w;
    k.dw = -2.0 * d2 * mu * (apply_J(s.w) - kappa * s.w.dot(s.xi) * Jxi);
    return k;
}

StateDerivative rhs_T1M_unchecked(const BundleState& s, const SpaceFormModel& model,
                                  const BergerParams& params) {
    const double d2 = params.delta * params.delta;
    const FrameVector Jxi = apply_J(s.xi);
    const double mu = s.w.dot(Jxi);
    const double c2 = s.w.squaredNorm();
    StateDerivative k;
    k.du = -script_R_apply(model, params, s.xi, s.w, s.u);
    k.dxi = s.w;
    k.dw = -c2 * s.xi - 2.0 * d2 * mu * (apply_J(s.w) + mu * s.xi);
    return k;
}

BundleState advance(const BundleState& s, const StateDerivative& k, double h) {
    BundleState out;
    out.sigma = s.sigma + h;
    out.u = s.u + h * k.du;
    out.xi = s.xi + h * k.dxi;
    out.w = s.w + h * k.dw;
    return out;
}

bool finite(const BundleState& s) {
    return std::isfinite(s.sigma) && s.u.allFinite() && s.xi.allFinite() && s.w.allFinite();
}

void check_state_dims(const SpaceFormModel& model, const BundleState& s) {
    check_dim(model, s.u, "u");
    check_dim(model, s.xi, "xi");
    check_dim(model, s.w, "w");
}

} // namespace

std::string to_string(Bundle b) { return b == Bundle::TM ? "TM" : "T1M"; }

Bundle parse_bundle(const std::string& s) {
    if (s == "TM") return Bundle::TM;
    if (s == "T1M") return Bundle::T1M;
    throw InvalidArgument("bundle must be TM or T1M, got '" + s + "'");
}

Diagnostics diagnostics(const BundleState& s, const BergerParams& params) {
    const double d2 = params.delta * params.delta;
    Diagnostics d;
    d.c = s.w.norm();
    d.mu = s.w.dot(apply_J(s.xi));
    d.lambda = std::sqrt(d.c * d.c + d2 * d.mu * d.mu);
    d.xi_norm = s.xi.norm();
    d.xi_dot_w = s.xi.dot(s.w);
    d.lifted_speed = s.u.squaredNorm() + d.lambda * d.lambda;
    return d;
}

void check_t1m_state(const BundleState& s, double tol) {
    const double norm_defect = std::abs(s.xi.norm() - 1.0);
    const double ortho_defect = std::abs(s.xi.dot(s.w));
    if (norm_defect > tol || ortho_defect > tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "state off the unit tangent bundle: ||xi|-1| = %.3e, |<xi,w>| = %.3e (tol %.1e)",
                      norm_defect, ortho_defect, tol);
        throw ConstraintViolation(buf);
    }
}

void FlowConfig::validate() const {
    model.validate();
    params.validate();
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step must be positive");
    if (!(sigma_max > 0.0) || !std::isfinite(sigma_max))
        throw InvalidArgument("sigma_max must be positive");
    if (step > sigma_max) throw InvalidArgument("step must not exceed sigma_max");
    if (sample_stride < 1) throw InvalidArgument("sample_stride must be >= 1");
}

StateDerivative rhs_TM(const BundleState& s, const SpaceFormModel& model,
                       const BergerParams& params) {
    check_state_dims(model, s);
    return rhs_TM_unchecked(s, model, params);
}

StateDerivative rhs_T1M(const BundleState& s, const SpaceFormModel& model,
                        const BergerParams& params) {
    check_state_dims(model, s);
    check_t1m_state(s, kRhsConstraintTol);
    return rhs_T1M_unchecked(s, model, params);
}

InitialState prepare_initial(const FrameVector& xi0, const FrameVector& w0,
                             const FrameVector& u_dir, const BergerParams& params, Bundle bundle) {
    params.validate();
    if (xi0.size() == 0 || xi0.size() % 2 != 0 || w0.size() != xi0.size() ||
        u_dir.size() != xi0.size())
        throw DimensionMismatch("prepare_initial: xi0, w0, u_dir must share an even length");
    if (!xi0.allFinite() || !w0.allFinite() || !u_dir.allFinite())
        throw InvalidArgument("prepare_initial: non-finite input");
    const double xi_norm = xi0.norm();
    if (xi_norm == 0.0) throw InvalidArgument("prepare_initial: xi0 must be nonzero");

    InitialState out;
    BundleState& s = out.state;
    s.sigma = 0.0;
    if (bundle == Bundle::T1M) {
        s.xi = xi0 / xi_norm;
        s.w = w0 - w0.dot(s.xi) * s.xi;
    } else {
        s.xi = xi0;
        s.w = w0;
    }

    const Diagnostics d = diagnostics({0.0, FrameVector(xi0.size()), s.xi, s.w}, params);
    const double lambda_sq = d.lambda * d.lambda;
    if (lambda_sq > 1.0 + kUnitSpeedTol) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "infeasible initial speed: lambda^2 = %.17g > 1", lambda_sq);
        throw InfeasibleSpeed(buf, lambda_sq);
    }
    if (std::abs(lambda_sq - 1.0) <= kUnitSpeedTol) {
        s.u = FrameVector(xi0.size());
        out.vertical = true;
        return out;
    }
    const double dir_norm = u_dir.norm();
    if (dir_norm == 0.0)
        throw InvalidArgument("prepare_initial: u_dir is zero but lambda^2 < 1 needs a direction");
    s.u = std::sqrt(1.0 - lambda_sq) / dir_norm * u_dir;
    return out;
}

Trajectory integrate(const FlowConfig& config, const BundleState& state0) {
    config.validate();
    const SpaceFormModel& model = config.model;
    const BergerParams& params = config.params;
    check_state_dims(model, state0);
    if (!finite(state0)) throw IntegrationError("non-finite initial state", state0.sigma);
    const bool unit = config.bundle == Bundle::T1M;
    if (unit) check_t1m_state(state0, kRhsConstraintTol);

    auto rhs = [&](const BundleState& s) {
        return unit ? rhs_T1M_unchecked(s, model, params) : rhs_TM_unchecked(s, model, params);
    };

    const long long steps = std::max(1LL, std::llround(config.sigma_max / config.step));
    const double h = config.step;
    Trajectory traj;
    traj.config = config;
    traj.samples.reserve(static_cast<std::size_t>(steps / config.sample_stride + 2));

    BundleState s = state0;
    const double sigma0 = state0.sigma;
    traj.samples.push_back({s, diagnostics(s, params)});

    for (long long i = 1; i <= steps; ++i) {
        const StateDerivative k1 = rhs(s);
        const StateDerivative k2 = rhs(advance(s, k1, 0.5 * h));
        const StateDerivative k3 = rhs(advance(s, k2, 0.5 * h));
        const StateDerivative k4 = rhs(advance(s, k3, h));
        BundleState next;
        next.sigma = sigma0 + static_cast<double>(i) * h;
        next.u = s.u + (h / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
        next.xi = s.xi + (h / 6.0) * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
        next.w = s.w + (h / 6.0) * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);

        if (!finite(next)) throw IntegrationError("non-finite state encountered", s.sigma);
        if (unit) {
            if (config.renormalize) next.xi /= next.xi.norm();
            const double drift =
                std::max(std::abs(next.xi.norm() - 1.0), std::abs(next.xi.dot(next.w)));
            if (drift > kDriftAbortTol) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "unit-bundle constraint drift %.3e exceeds %.1e",
                              drift, kDriftAbortTol);
                throw IntegrationError(buf, s.sigma);
            }
        }
        s = std::move(next);
        if (i % config.sample_stride == 0) traj.samples.push_back({s, diagnostics(s, params)});
    }
    return traj;
}

double DriftReport::worst_t1m() const {
    return std::max({c, mu, xi_norm, xi_dot_w, lifted_speed, lambda});
}

DriftReport conserved_report(const Trajectory& traj) {
    if (traj.samples.empty()) throw InvalidArgument("conserved_report: empty trajectory");
    const Diagnostics& d0 = traj.samples.front().diag;
    DriftReport r;
    for (const Sample& smp : traj.samples) {
        const Diagnostics& d = smp.diag;
        r.c = std::max(r.c, std::abs(d.c - d0.c));
        r.mu = std::max(r.mu, std::abs(d.mu - d0.mu));
        r.xi_norm = std::max(r.xi_norm, std::abs(d.xi_norm - d0.xi_norm));
        r.xi_dot_w = std::max(r.xi_dot_w, std::abs(d.xi_dot_w - d0.xi_dot_w));
        r.lifted_speed = std::max(r.lifted_speed, std::abs(d.lifted_speed - d0.lifted_speed));
        r.lambda = std::max(r.lambda, std::abs(d.lambda - d0.lambda));
    }
    return r;
}

Eigen::MatrixXd tm_rate_closed_form(const SpaceFormModel& model, const BergerParams& params,
                                    const FrameVector& xi, const FrameVector& w) {
    const double d2 = params.delta * params.delta;
    const FrameVector Jxi = apply_J(xi);
    const double xi_sq = xi.squaredNorm();
    const double coeff = 2.0 * d2 * d2 * d2 * w.dot(Jxi) * w.dot(xi) * (1.0 - xi_sq) / (1.0 + d2 * xi_sq);
    return coeff * riemann_matrix(model, xi, Jxi);
}

RateCheck script_R_rate_check(const Trajectory& traj) {
    const auto& smp = traj.samples;
    if (smp.size() < 3) throw InvalidArgument("script_R_rate_check: needs at least 3 samples");
    const SpaceFormModel& model = traj.config.model;
    const BergerParams& params = traj.config.params;

    std::vector<Eigen::MatrixXd> ops;
    ops.reserve(smp.size());
    for (const Sample& s : smp) ops.push_back(script_R_matrix(model, params, s.state.xi, s.state.w));

    RateCheck out;
    for (std::size_t j = 1; j + 1 < smp.size(); ++j) {
        const double span = smp[j + 1].state.sigma - smp[j - 1].state.sigma;
        const Eigen::MatrixXd fd = (ops[j + 1] - ops[j - 1]) / span;
        Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(fd.rows(), fd.cols());
        if (traj.config.bundle == Bundle::TM)
            ref = tm_rate_closed_form(model, params, smp[j].state.xi, smp[j].state.w);
        RateSample r;
        r.sigma = smp[j].state.sigma;
        r.fd_norm = fd.norm();
        r.reference_norm = ref.norm();
        r.residual = (fd - ref).norm();
        out.max_fd_norm = std::max(out.max_fd_norm, r.fd_norm);
        out.max_reference_norm = std::max(out.max_reference_norm, r.reference_norm);
        out.max_residual = std::max(out.max_residual, r.residual);
        out.samples.push_back(r);
    }
    out.relative_residual = out.max_reference_norm > 0.0 ? out.max_residual / out.max_reference_norm
                                                         : out.max_residual;
    return out;
}

} // namespace berger
