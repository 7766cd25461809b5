#include "berger/frenet_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "berger/errors.hpp"

namespace berger {

namespace {

constexpr double kChainConstraintTol = 1e-6;

std::string describe(const CurvatureProfile& p) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "bundle=%s n=%d p_max=%d samples=%zu chains=%s",
                  to_string(p.bundle).c_str(), p.complex_dim, p.p_max, p.sigmas.size(),
                  p.numeric ? "numeric" : "algebraic");
    return buf;
}

} // namespace

DerivativeChain algebraic_chain(const BundleState& state, const SpaceFormModel& model,
                                const BergerParams& params, int p_max, Bundle bundle) {
    if (p_max < 2) throw InvalidArgument("algebraic_chain: p_max must be >= 2");
    if (bundle == Bundle::TM)
        throw NotParallel("algebraic_chain: the chain recursion is only used on the unit tangent bundle");
    check_dim(model, state.u, "u");
    check_t1m_state(state, kChainConstraintTol);

    const Eigen::MatrixXd R = script_R_matrix(model, params, state.xi, state.w);
    DerivativeChain chain;
    chain.at_sigma = state.sigma;
    chain.vectors.reserve(static_cast<std::size_t>(p_max));
    chain.vectors.push_back(state.u);
    for (int p = 1; p < p_max; ++p) chain.vectors.emplace_back(-(R * chain.vectors.back()));
    return chain;
}

std::vector<double> central_difference_weights(int order, int half) {
    if (order < 0 || half < 0 || 2 * half < order)
        throw InvalidArgument("central_difference_weights: stencil too small for the order");
    // Fornberg's recursion on nodes x_i = i - half, evaluated at 0.
    const int N = 2 * half;
    const int M = order;
    std::vector<double> x(static_cast<std::size_t>(N + 1));
    for (int i = 0; i <= N; ++i) x[i] = static_cast<double>(i - half);
    std::vector<std::vector<double>> c(N + 1, std::vector<double>(M + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i <= N; ++i) {
        const int mn = std::min(i, M);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(N + 1));
    for (int i = 0; i <= N; ++i) w[i] = c[i][M];
    return w;
}

int numeric_chain_half_width(int p_max) { return p_max / 2; }

DerivativeChain numeric_chain(const Trajectory& traj, std::size_t center_index, int p_max) {
    if (p_max < 2) throw InvalidArgument("numeric_chain: p_max must be >= 2");
    const auto& smp = traj.samples;
    const int reach = numeric_chain_half_width(p_max);
    if (center_index < static_cast<std::size_t>(reach) || center_index + reach >= smp.size())
        throw InvalidArgument("numeric_chain: insufficient stencil around the center sample");

    const double h = smp[center_index + 1].state.sigma - smp[center_index].state.sigma;
    for (std::size_t j = center_index - reach; j < center_index + reach; ++j) {
        const double hj = smp[j + 1].state.sigma - smp[j].state.sigma;
        if (std::abs(hj - h) > 1e-9 * std::abs(h))
            throw InvalidArgument("numeric_chain: samples are not uniformly spaced");
    }

    DerivativeChain chain;
    chain.at_sigma = smp[center_index].state.sigma;
    chain.vectors.push_back(smp[center_index].state.u);
    for (int order = 1; order < p_max; ++order) {
        const int half = (order + 1) / 2;
        const std::vector<double> w = central_difference_weights(order, half);
        FrameVector d(smp[center_index].state.u.size());
        for (int k = -half; k <= half; ++k) {
            const double wk = w[static_cast<std::size_t>(k + half)];
            if (wk != 0.0) d += wk * smp[center_index + k].state.u;
        }
        d /= std::pow(h, order);
        chain.vectors.push_back(std::move(d));
    }
    return chain;
}

CurvatureResult generalized_curvatures(const DerivativeChain& chain, double rank_tol) {
    if (chain.vectors.empty()) throw InvalidArgument("generalized_curvatures: empty chain");
    const double speed = chain.vectors.front().norm();
    if (!(speed > 0.0))
        throw DegenerateProjection("generalized_curvatures: zero first derivative (vertical geodesic)");

    CurvatureResult out;
    out.gram.push_back(1.0);
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> r;
    for (std::size_t i = 0; i < chain.vectors.size(); ++i) {
        const Eigen::VectorXd& x = chain.vectors[i];
        Eigen::VectorXd v = x;
        // Two Gram-Schmidt passes keep the residual orthogonal to rounding level.
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& q : basis) v -= q.dot(v) * q;
        const double ri = v.norm();
        const double xn = x.norm();
        const double ratio = i == 0 ? 1.0 : (xn > 0.0 ? (ri * ri) / (xn * xn) : 0.0);
        out.ratio.push_back(ratio);
        out.gram.push_back(out.gram.back() * ri * ri);
        if (i > 0 && ratio < rank_tol) break;
        basis.push_back(v / ri);
        r.push_back(ri);
    }
    out.effective_rank = static_cast<int>(r.size());
    for (std::size_t i = 1; i < r.size(); ++i) out.k.push_back(r[i] / (r[i - 1] * r[0]));
    return out;
}

CurvatureProfile curvature_profile(const Trajectory& traj, int p_max, int stride,
                                   double rank_tol) {
    if (stride < 1) throw InvalidArgument("curvature_profile: stride must be >= 1");
    if (p_max < 2) throw InvalidArgument("curvature_profile: p_max must be >= 2");
    const FlowConfig& cfg = traj.config;
    CurvatureProfile prof;
    prof.complex_dim = cfg.model.n;
    prof.p_max = p_max;
    prof.bundle = cfg.bundle;
    prof.numeric = cfg.bundle == Bundle::TM;

    const std::size_t count = traj.samples.size();
    std::size_t first = 0;
    std::size_t last = count;
    if (prof.numeric) {
        const auto reach = static_cast<std::size_t>(numeric_chain_half_width(p_max));
        if (count < 2 * reach + 1)
            throw InvalidArgument("curvature_profile: trajectory too short for numeric chains");
        first = reach;
        last = count - reach;
    }
    for (std::size_t j = first; j < last; j += static_cast<std::size_t>(stride)) {
        const DerivativeChain chain =
            prof.numeric ? numeric_chain(traj, j, p_max)
                         : algebraic_chain(traj.samples[j].state, cfg.model, cfg.params, p_max,
                                           cfg.bundle);
        const CurvatureResult res = generalized_curvatures(chain, rank_tol);
        std::vector<double> row(static_cast<std::size_t>(p_max - 1), 0.0);
        std::copy(res.k.begin(), res.k.end(), row.begin());
        prof.sigmas.push_back(chain.at_sigma);
        prof.curvatures.push_back(std::move(row));
        prof.effective_rank.push_back(res.effective_rank);
        prof.gram_determinants.push_back(res.gram);
        prof.rank_ratios.push_back(res.ratio);
    }
    return prof;
}

double relative_variation(const CurvatureProfile& profile, const std::vector<int>& indices,
                          double floor) {
    if (profile.curvatures.empty()) return 0.0;
    const std::vector<double>& k0 = profile.curvatures.front();
    std::vector<int> which = indices;
    if (which.empty()) {
        const int present = std::max(0, profile.effective_rank.front() - 1);
        for (int i = 1; i <= present; ++i) which.push_back(i);
    }
    double worst = 0.0;
    for (int i : which) {
        if (i < 1 || i > static_cast<int>(k0.size()))
            throw InvalidArgument("relative_variation: curvature index out of range");
        const double ref = k0[static_cast<std::size_t>(i - 1)];
        const double scale = std::max(ref, floor);
        for (const auto& row : profile.curvatures)
            worst = std::max(worst, std::abs(row[static_cast<std::size_t>(i - 1)] - ref) / scale);
    }
    return worst;
}

TheoremVerdict constancy_verdict(const CurvatureProfile& profile, double tol, double floor) {
    TheoremVerdict v;
    v.claim = "geodesic_curvatures_constant";
    v.tolerance = tol;
    v.residual = relative_variation(profile, {}, floor);
    v.pass = v.residual <= tol;
    v.configuration = describe(profile);
    return v;
}

VanishingVerdict vanishing_verdict(const CurvatureProfile& profile, double tol) {
    if (profile.complex_dim < 4)
        throw Inapplicable("vanishing_verdict: k_6 is undefined for n < 4");
    if (profile.p_max < 8) throw Inapplicable("vanishing_verdict: needs p_max >= 8");
    VanishingVerdict v;
    v.claim = "sixth_curvature_vanishes";
    v.tolerance = tol;
    int max_rank = 0;
    for (std::size_t j = 0; j < profile.curvatures.size(); ++j) {
        const auto& row = profile.curvatures[j];
        const double scale = std::max(row[0], 1.0);
        v.residual = std::max(v.residual, row[5] / scale);
        max_rank = std::max(max_rank, profile.effective_rank[j]);
    }
    v.first_vanishing_index = max_rank <= profile.p_max - 1 ? max_rank : 0;
    v.pass = v.residual <= tol;
    v.configuration = describe(profile);
    return v;
}

std::vector<SpanResidual> span_residual(const SpaceFormModel& model, const BergerParams& params,
                                        const FrameVector& xi, const FrameVector& w, int q_max) {
    if (q_max < 1) throw InvalidArgument("span_residual: q_max must be >= 1");
    check_dim(model, xi, "xi");
    check_dim(model, w, "w");
    if (std::abs(xi.norm() - 1.0) > kChainConstraintTol)
        throw ConstraintViolation("span_residual: xi must be a unit vector");

    const Eigen::MatrixXd R = script_R_matrix(model, params, xi, w);
    const Eigen::MatrixXd J = J_matrix(model.n);
    const Eigen::MatrixXd E = Eigen::MatrixXd::Identity(R.rows(), R.cols());
    const Eigen::MatrixXd R2 = R * R;
    const Eigen::Index cells = R.size();

    auto stack = [cells](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
        Eigen::MatrixXd A(cells, 3);
        A.col(0) = a.reshaped();
        A.col(1) = b.reshaped();
        A.col(2) = c.reshaped();
        return A;
    };
    const Eigen::MatrixXd even_basis = stack(R2, J * R, E);
    const Eigen::MatrixXd odd_basis = stack(J * R2, R, J);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> even_fit(even_basis);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> odd_fit(odd_basis);

    std::vector<SpanResidual> out;
    Eigen::MatrixXd P = R;
    for (int power = 2; power <= 2 * q_max + 1; ++power) {
        P = P * R;
        const Eigen::VectorXd target = P.reshaped();
        const double norm = target.norm();
        double res = 0.0;
        if (norm > 0.0) {
            const auto& fit = power % 2 == 0 ? even_fit : odd_fit;
            const auto& basis = power % 2 == 0 ? even_basis : odd_basis;
            const Eigen::VectorXd coeff = fit.solve(target);
            res = (target - basis * coeff).norm() / norm;
        }
        out.push_back({power, res});
    }
    return out;
}

} // namespace berger
