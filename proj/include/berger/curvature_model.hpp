#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace berger {

/**
 * Tangent vector of the base manifold written in a parallel, orthonormal,
 * J-adapted frame. The complex structure pairs consecutive axes, so a
 * vector of complex dimension n carries 2n real components.
 *
 * Inherits from Eigen::VectorXd so that expression templates keep working;
 * the distinct type marks values that live in the base tangent space.
 */
class FrameVector : public Eigen::VectorXd {
public:
    FrameVector() = default;

    explicit FrameVector(Eigen::Index size) : Eigen::VectorXd(Eigen::VectorXd::Zero(size)) {}

    template <typename Derived>
    FrameVector(const Eigen::MatrixBase<Derived>& other) : Eigen::VectorXd(other) {}

    template <typename Derived>
    FrameVector& operator=(const Eigen::MatrixBase<Derived>& other) {
        Eigen::VectorXd::operator=(other);
        return *this;
    }

    FrameVector(std::initializer_list<double> values);

    /// Zero vector of complex dimension n.
    static FrameVector zero(int n);

    /// The i-th frame vector e_i (0-based) of complex dimension n.
    static FrameVector basis(int n, int i);

    [[nodiscard]] int complex_dim() const noexcept { return static_cast<int>(size() / 2); }
    [[nodiscard]] bool all_finite() const noexcept { return allFinite(); }
};

/// Complex space form of complex dimension n and holomorphic sectional curvature m.
struct SpaceFormModel {
    int n = 4;
    double m = 4.0;

    /// Throws InvalidArgument unless n >= 1 and m is finite.
    void validate() const;
    [[nodiscard]] int real_dim() const noexcept { return 2 * n; }
};

/// Magnitude of the fiberwise Berger deformation along J xi.
struct BergerParams {
    double delta = 0.5;

    void validate() const;
};

/// Throws DimensionMismatch if X does not have 2n components.
void check_dim(const SpaceFormModel& model, const FrameVector& X, const char* name);

[[nodiscard]] FrameVector apply_J(const FrameVector& X);

/// Matrix of J in the adapted frame.
[[nodiscard]] Eigen::MatrixXd J_matrix(int n);

[[nodiscard]] double inner(const FrameVector& X, const FrameVector& Y);

/**
 * Curvature operator R(X,Y)Z of the complex space form:
 *
 *   m/4 ( <Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY + 2<X,JY>JZ ).
 *
 * Evaluated from the closed formula; no rank-4 array is ever stored.
 */
[[nodiscard]] FrameVector riemann(const SpaceFormModel& model, const FrameVector& X,
                                  const FrameVector& Y, const FrameVector& Z);

/// Twisted operator applied to X: R(xi, xidot)X + delta^2 <xidot, J xi> R(xi, J xi)X.
[[nodiscard]] FrameVector script_R_apply(const SpaceFormModel& model, const BergerParams& params,
                                         const FrameVector& xi, const FrameVector& xidot,
                                         const FrameVector& X);

/// Column j is script_R_apply(..., e_j). Skew-adjoint and J-commuting.
[[nodiscard]] Eigen::MatrixXd script_R_matrix(const SpaceFormModel& model,
                                              const BergerParams& params, const FrameVector& xi,
                                              const FrameVector& xidot);

/// Matrix of Z -> R(X,Y)Z.
[[nodiscard]] Eigen::MatrixXd riemann_matrix(const SpaceFormModel& model, const FrameVector& X,
                                             const FrameVector& Y);

/**
 * Largest absolute residual of the curvature identities on random inputs:
 * skewness in each pair, pair symmetry, first Bianchi identity,
 * R(JX,JY) = R(X,Y), RJ = JR, and holomorphic sectional curvature m.
 */
[[nodiscard]] double symmetry_residuals(const SpaceFormModel& model, int sample_count,
                                        std::uint64_t seed);

} // namespace berger
