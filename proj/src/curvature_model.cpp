#include "berger/curvature_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "berger/errors.hpp"
#include "berger/sampling.hpp"

namespace berger {

FrameVector::FrameVector(std::initializer_list<double> values)
    : Eigen::VectorXd(static_cast<Eigen::Index>(values.size())) {
    std::copy(values.begin(), values.end(), data());
}

FrameVector FrameVector::zero(int n) { return FrameVector(2 * n); }

FrameVector FrameVector::basis(int n, int i) {
    if (i < 0 || i >= 2 * n) throw InvalidArgument("basis index out of range");
    FrameVector e(2 * n);
    e[i] = 1.0;
    return e;
}

void SpaceFormModel::validate() const {
    if (n < 1) throw InvalidArgument("complex dimension n must be >= 1");
    if (!std::isfinite(m)) throw InvalidArgument("holomorphic sectional curvature m must be finite");
}

void BergerParams::validate() const {
    if (!std::isfinite(delta) || delta < 0.0)
        throw InvalidArgument("delta must be finite and nonnegative");
}

void check_dim(const SpaceFormModel& model, const FrameVector& X, const char* name) {
    if (X.size() != model.real_dim())
        throw DimensionMismatch(std::string(name) + ": expected " +
                                std::to_string(model.real_dim()) + " components, got " +
                                std::to_string(X.size()));
}

FrameVector apply_J(const FrameVector& X) {
    if (X.size() % 2 != 0) throw DimensionMismatch("apply_J: odd number of components");
    FrameVector JX(X.size());
    for (Eigen::Index k = 0; k < X.size(); k += 2) {
        JX[k] = -X[k + 1];
        JX[k + 1] = X[k];
    }
    return JX;
}

Eigen::MatrixXd J_matrix(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 0; k < 2 * n; k += 2) {
        J(k + 1, k) = 1.0;
        J(k, k + 1) = -1.0;
    }
    return J;
}

double inner(const FrameVector& X, const FrameVector& Y) {
    if (X.size() != Y.size()) throw DimensionMismatch("inner: dimension mismatch");
    return X.dot(Y);
}

FrameVector riemann(const SpaceFormModel& model, const FrameVector& X, const FrameVector& Y,
                    const FrameVector& Z) {
    check_dim(model, X, "X");
    check_dim(model, Y, "Y");
    check_dim(model, Z, "Z");
    const FrameVector JX = apply_J(X);
    const FrameVector JY = apply_J(Y);
    const FrameVector JZ = apply_J(Z);
    const double s = 0.25 * model.m;
    FrameVector out = Y.dot(Z) * X - X.dot(Z) * Y + JY.dot(Z) * JX - JX.dot(Z) * JY +
                      2.0 * X.dot(JY) * JZ;
    out *= s;
    return out;
}

FrameVector script_R_apply(const SpaceFormModel& model, const BergerParams& params,
                           const FrameVector& xi, const FrameVector& xidot, const FrameVector& X) {
    const FrameVector Jxi = apply_J(xi);
    const double mu = inner(xidot, Jxi);
    FrameVector out = riemann(model, xi, xidot, X);
    const double twist = params.delta * params.delta * mu;
    if (twist != 0.0) out += twist * riemann(model, xi, Jxi, X);
    return out;
}

Eigen::MatrixXd script_R_matrix(const SpaceFormModel& model, const BergerParams& params,
                                const FrameVector& xi, const FrameVector& xidot) {
    const int d = model.real_dim();
    Eigen::MatrixXd M(d, d);
    for (int j = 0; j < d; ++j)
        M.col(j) = script_R_apply(model, params, xi, xidot, FrameVector::basis(model.n, j));
    return M;
}

Eigen::MatrixXd riemann_matrix(const SpaceFormModel& model, const FrameVector& X,
                               const FrameVector& Y) {
    const int d = model.real_dim();
    Eigen::MatrixXd M(d, d);
    for (int j = 0; j < d; ++j) M.col(j) = riemann(model, X, Y, FrameVector::basis(model.n, j));
    return M;
}

double symmetry_residuals(const SpaceFormModel& model, int sample_count, std::uint64_t seed) {
    model.validate();
    if (sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    auto track = [&worst](double r) { worst = std::max(worst, std::abs(r)); };
    auto track_vec = [&worst](const FrameVector& v) { worst = std::max(worst, v.cwiseAbs().maxCoeff()); };

    for (int s = 0; s < sample_count; ++s) {
        const FrameVector X = random_gaussian(rng, model.n);
        const FrameVector Y = random_gaussian(rng, model.n);
        const FrameVector Z = random_gaussian(rng, model.n);
        const FrameVector W = random_gaussian(rng, model.n);
        const FrameVector RXYZ = riemann(model, X, Y, Z);

        track_vec(RXYZ + riemann(model, Y, X, Z));
        track(RXYZ.dot(W) + riemann(model, X, Y, W).dot(Z));
        track(RXYZ.dot(W) - riemann(model, Z, W, X).dot(Y));
        track_vec(RXYZ + riemann(model, Y, Z, X) + riemann(model, Z, X, Y));
        track_vec(riemann(model, apply_J(X), apply_J(Y), Z) - RXYZ);
        track_vec(riemann(model, X, Y, apply_J(Z)) - apply_J(RXYZ));

        const FrameVector U(X / X.norm());
        const FrameVector JU = apply_J(U);
        track(riemann(model, U, JU, JU).dot(U) - model.m);
    }
    return worst;
}

} // namespace berger
