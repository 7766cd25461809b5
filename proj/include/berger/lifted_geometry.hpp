#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "berger/curvature_model.hpp"
#include "berger/sampling.hpp"

namespace berger {

/// Tangent vector to TM split as (horizontal projection, vertical projection).
struct LiftedVector {
    FrameVector h;
    FrameVector v;

    static LiftedVector zero(int n) { return {FrameVector::zero(n), FrameVector::zero(n)}; }
    static LiftedVector horizontal(const FrameVector& X) { return {X, FrameVector(X.size())}; }
    static LiftedVector vertical(const FrameVector& X) { return {FrameVector(X.size()), X}; }

    LiftedVector& operator+=(const LiftedVector& o);
    LiftedVector& operator-=(const LiftedVector& o);
    [[nodiscard]] double max_abs() const;
};

LiftedVector operator+(LiftedVector a, const LiftedVector& b);
LiftedVector operator-(LiftedVector a, const LiftedVector& b);
LiftedVector operator*(double s, LiftedVector a);

/// Fiber coordinate of a bundle point; the base point is implicit.
struct FiberPoint {
    FrameVector xi;
};

enum class LiftKind { horizontal, vertical };

/// One of the three abstract base fields of a jet.
enum class Field : int { X = 0, Y = 1, Z = 2 };

/// A base field lifted horizontally or vertically.
struct LiftedField {
    Field field;
    LiftKind kind;
};

/**
 * Pointwise 1-jet of three base vector fields X, Y, Z: their values and all
 * covariant derivatives nabla_A B. Any choice of values is admissible.
 */
struct FieldJet {
    std::array<FrameVector, 3> value;
    /// derivative[a][b] = nabla_{field a} (field b)
    std::array<std::array<FrameVector, 3>, 3> derivative;

    [[nodiscard]] const FrameVector& at(Field f) const { return value[static_cast<int>(f)]; }
    [[nodiscard]] const FrameVector& nabla(Field a, Field b) const {
        return derivative[static_cast<int>(a)][static_cast<int>(b)];
    }

    /// Gaussian values and derivatives scaled by `scale`.
    static FieldJet random(Rng& rng, int n, double scale = 1.0);
};

/// Which of the four rules differentiates the lifted metric.
enum class DerivativeRule { hh_by_h, vv_by_h, hh_by_v, vv_by_v };

/// Selects the connection formula; the mutated variant flips the sign of the
/// delta^4 correction in the vertical-vertical line.
enum class ConnectionVariant { exact, flipped_vv_sign };

/// Deformed Sasaki metric: <h,h> + <v,v> + delta^2 <A.v, J xi><B.v, J xi>.
[[nodiscard]] double lifted_inner(const BergerParams& params, const FiberPoint& at,
                                  const LiftedVector& A, const LiftedVector& B);

/// Lift of the value of a jet field.
[[nodiscard]] LiftedVector lift(const FieldJet& jets, LiftedField f);

/// Bracket of two lifted fields evaluated from the jet.
[[nodiscard]] LiftedVector lift_bracket(LiftedField A, LiftedField B, const FieldJet& jets,
                                        const FiberPoint& at, const SpaceFormModel& model);

/// Bracket of X (kind_a) and Y (kind_b).
[[nodiscard]] LiftedVector lift_bracket(LiftKind kind_a, LiftKind kind_b, const FieldJet& jets,
                                        const FiberPoint& at, const SpaceFormModel& model);

/// Directional derivative dir<<first, second>> by one of the differentiation rules.
[[nodiscard]] double metric_derivative(DerivativeRule rule, Field dir, Field first, Field second,
                                       const FieldJet& jets, const FiberPoint& at,
                                       const BergerParams& params);

/// X<<Y, Z>> by the given rule.
[[nodiscard]] double metric_derivative(DerivativeRule rule, const FieldJet& jets,
                                       const FiberPoint& at, const BergerParams& params);

/// A<<B, C>> for arbitrary lift kinds; zero when B and C have different kinds.
[[nodiscard]] double lifted_metric_derivative(LiftedField A, LiftedField B, LiftedField C,
                                              const FieldJet& jets, const FiberPoint& at,
                                              const BergerParams& params);

/// Levi-Civita connection of the deformed metric on lifted fields.
[[nodiscard]] LiftedVector lifted_connection(LiftedField A, LiftedField B, const FieldJet& jets,
                                             const FiberPoint& at, const BergerParams& params,
                                             const SpaceFormModel& model,
                                             ConnectionVariant variant = ConnectionVariant::exact);

/// nabla~_{X^kind_a} Y^kind_b.
[[nodiscard]] LiftedVector lifted_connection(LiftKind kind_a, LiftKind kind_b,
                                             const FieldJet& jets, const FiberPoint& at,
                                             const BergerParams& params,
                                             const SpaceFormModel& model,
                                             ConnectionVariant variant = ConnectionVariant::exact);

/// max over all 8 kind assignments of (X, Y, Z) of |2<<nabla~_A B, C>> - Koszul right side|.
[[nodiscard]] double koszul_residual(const FieldJet& jets, const FiberPoint& at,
                                     const BergerParams& params, const SpaceFormModel& model,
                                     ConnectionVariant variant = ConnectionVariant::exact);

/// max over kind pairs of |nabla~_A B - nabla~_B A - [A, B]|.
[[nodiscard]] double torsion_residual(const FieldJet& jets, const FiberPoint& at,
                                      const BergerParams& params, const SpaceFormModel& model,
                                      ConnectionVariant variant = ConnectionVariant::exact);

/// max over all 8 kind assignments of |A<<B,C>> - <<nabla~_A B, C>> - <<B, nabla~_A C>>|.
[[nodiscard]] double metric_compatibility_residual(
    const FieldJet& jets, const FiberPoint& at, const BergerParams& params,
    const SpaceFormModel& model, ConnectionVariant variant = ConnectionVariant::exact);

struct ConnectionSweep {
    int jets = 0;
    double koszul = 0.0;
    double torsion = 0.0;
    double compatibility = 0.0;

    [[nodiscard]] double worst() const;
};

/**
 * Runs the three connection checks on `jet_count` random jets. Fiber norms
 * cycle through `xi_norms`; an empty list means unit fibers.
 */
[[nodiscard]] ConnectionSweep connection_sweep(const SpaceFormModel& model,
                                               const BergerParams& params, int jet_count,
                                               std::uint64_t seed,
                                               const std::vector<double>& xi_norms,
                                               ConnectionVariant variant = ConnectionVariant::exact);

} // namespace berger
