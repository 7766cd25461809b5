#include "berger/lifted_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "berger/errors.hpp"

namespace berger {

namespace {

constexpr std::array<LiftKind, 2> kKinds{LiftKind::horizontal, LiftKind::vertical};

double vertical_inner(const BergerParams& params, const FiberPoint& at, const FrameVector& X,
                      const FrameVector& Y) {
    const FrameVector Jxi = apply_J(at.xi);
    return X.dot(Y) + params.delta * params.delta * X.dot(Jxi) * Y.dot(Jxi);
}

} // namespace

LiftedVector& LiftedVector::operator+=(const LiftedVector& o) {
    h += o.h;
    v += o.v;
    return *this;
}

LiftedVector& LiftedVector::operator-=(const LiftedVector& o) {
    h -= o.h;
    v -= o.v;
    return *this;
}

double LiftedVector::max_abs() const {
    return std::max(h.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
}

LiftedVector operator+(LiftedVector a, const LiftedVector& b) { return a += b; }
LiftedVector operator-(LiftedVector a, const LiftedVector& b) { return a -= b; }
LiftedVector operator*(double s, LiftedVector a) {
    a.h *= s;
    a.v *= s;
    return a;
}

FieldJet FieldJet::random(Rng& rng, int n, double scale) {
    FieldJet jet;
    for (int a = 0; a < 3; ++a) {
        jet.value[a] = scale * random_gaussian(rng, n);
        for (int b = 0; b < 3; ++b) jet.derivative[a][b] = scale * random_gaussian(rng, n);
    }
    return jet;
}

double lifted_inner(const BergerParams& params, const FiberPoint& at, const LiftedVector& A,
                    const LiftedVector& B) {
    if (A.h.size() != B.h.size() || A.v.size() != B.v.size() || A.v.size() != at.xi.size())
        throw DimensionMismatch("lifted_inner: dimension mismatch");
    return A.h.dot(B.h) + vertical_inner(params, at, A.v, B.v);
}

LiftedVector lift(const FieldJet& jets, LiftedField f) {
    const FrameVector& X = jets.at(f.field);
    return f.kind == LiftKind::horizontal ? LiftedVector::horizontal(X) : LiftedVector::vertical(X);
}

LiftedVector lift_bracket(LiftedField A, LiftedField B, const FieldJet& jets, const FiberPoint& at,
                          const SpaceFormModel& model) {
    const FrameVector& X = jets.at(A.field);
    const FrameVector& Y = jets.at(B.field);
    if (A.kind == LiftKind::horizontal && B.kind == LiftKind::horizontal) {
        return {FrameVector(jets.nabla(A.field, B.field) - jets.nabla(B.field, A.field)),
                FrameVector(-riemann(model, X, Y, at.xi))};
    }
    if (A.kind == LiftKind::horizontal) return LiftedVector::vertical(jets.nabla(A.field, B.field));
    if (B.kind == LiftKind::horizontal)
        return LiftedVector::vertical(FrameVector(-jets.nabla(B.field, A.field)));
    return LiftedVector::zero(model.n);
}

LiftedVector lift_bracket(LiftKind kind_a, LiftKind kind_b, const FieldJet& jets,
                          const FiberPoint& at, const SpaceFormModel& model) {
    return lift_bracket({Field::X, kind_a}, {Field::Y, kind_b}, jets, at, model);
}

double metric_derivative(DerivativeRule rule, Field dir, Field first, Field second,
                         const FieldJet& jets, const FiberPoint& at, const BergerParams& params) {
    const FrameVector& B = jets.at(first);
    const FrameVector& C = jets.at(second);
    switch (rule) {
    case DerivativeRule::hh_by_h:
        return jets.nabla(dir, first).dot(C) + B.dot(jets.nabla(dir, second));
    case DerivativeRule::vv_by_h:
        return vertical_inner(params, at, jets.nabla(dir, first), C) +
               vertical_inner(params, at, B, jets.nabla(dir, second));
    case DerivativeRule::hh_by_v:
        return 0.0;
    case DerivativeRule::vv_by_v: {
        const FrameVector JD = apply_J(jets.at(dir));
        const FrameVector Jxi = apply_J(at.xi);
        return params.delta * params.delta * (B.dot(JD) * C.dot(Jxi) + B.dot(Jxi) * C.dot(JD));
    }
    }
    return 0.0;
}

double metric_derivative(DerivativeRule rule, const FieldJet& jets, const FiberPoint& at,
                         const BergerParams& params) {
    return metric_derivative(rule, Field::X, Field::Y, Field::Z, jets, at, params);
}

double lifted_metric_derivative(LiftedField A, LiftedField B, LiftedField C, const FieldJet& jets,
                                const FiberPoint& at, const BergerParams& params) {
    if (B.kind != C.kind) return 0.0;
    const bool pair_h = B.kind == LiftKind::horizontal;
    const bool dir_h = A.kind == LiftKind::horizontal;
    const DerivativeRule rule = pair_h ? (dir_h ? DerivativeRule::hh_by_h : DerivativeRule::hh_by_v)
                                       : (dir_h ? DerivativeRule::vv_by_h : DerivativeRule::vv_by_v);
    return metric_derivative(rule, A.field, B.field, C.field, jets, at, params);
}

LiftedVector lifted_connection(LiftedField A, LiftedField B, const FieldJet& jets,
                               const FiberPoint& at, const BergerParams& params,
                               const SpaceFormModel& model, ConnectionVariant variant) {
    const FrameVector& X = jets.at(A.field);
    const FrameVector& Y = jets.at(B.field);
    const FrameVector& xi = at.xi;

    if (A.kind == LiftKind::horizontal && B.kind == LiftKind::horizontal)
        return {jets.nabla(A.field, B.field), FrameVector(-0.5 * riemann(model, X, Y, xi))};
    if (A.kind == LiftKind::horizontal)
        return {FrameVector(0.5 * script_R_apply(model, params, xi, Y, X)), jets.nabla(A.field, B.field)};
    if (B.kind == LiftKind::horizontal)
        return LiftedVector::horizontal(FrameVector(0.5 * script_R_apply(model, params, xi, X, Y)));

    const double d2 = params.delta * params.delta;
    const FrameVector Jxi = apply_J(xi);
    const double x_jxi = X.dot(Jxi);
    const double y_jxi = Y.dot(Jxi);
    double kappa = d2 / (1.0 + d2 * xi.squaredNorm());
    if (variant == ConnectionVariant::flipped_vv_sign) kappa = -kappa;
    FrameVector out = x_jxi * apply_J(Y) + y_jxi * apply_J(X) -
                      kappa * (Y.dot(xi) * x_jxi + X.dot(xi) * y_jxi) * Jxi;
    out *= d2;
    return LiftedVector::vertical(out);
}

LiftedVector lifted_connection(LiftKind kind_a, LiftKind kind_b, const FieldJet& jets,
                               const FiberPoint& at, const BergerParams& params,
                               const SpaceFormModel& model, ConnectionVariant variant) {
    return lifted_connection({Field::X, kind_a}, {Field::Y, kind_b}, jets, at, params, model,
                             variant);
}

double koszul_residual(const FieldJet& jets, const FiberPoint& at, const BergerParams& params,
                       const SpaceFormModel& model, ConnectionVariant variant) {
    double worst = 0.0;
    for (LiftKind ka : kKinds) {
        for (LiftKind kb : kKinds) {
            for (LiftKind kc : kKinds) {
                const LiftedField A{Field::X, ka};
                const LiftedField B{Field::Y, kb};
                const LiftedField C{Field::Z, kc};
                const LiftedVector a = lift(jets, A);
                const LiftedVector b = lift(jets, B);
                const LiftedVector c = lift(jets, C);

                const double lhs =
                    2.0 * lifted_inner(params, at,
                                       lifted_connection(A, B, jets, at, params, model, variant), c);
                const double rhs =
                    lifted_metric_derivative(A, B, C, jets, at, params) +
                    lifted_metric_derivative(B, A, C, jets, at, params) -
                    lifted_metric_derivative(C, A, B, jets, at, params) +
                    lifted_inner(params, at, lift_bracket(A, B, jets, at, model), c) +
                    lifted_inner(params, at, lift_bracket(C, A, jets, at, model), b) -
                    lifted_inner(params, at, lift_bracket(B, C, jets, at, model), a);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

double torsion_residual(const FieldJet& jets, const FiberPoint& at, const BergerParams& params,
                        const SpaceFormModel& model, ConnectionVariant variant) {
    double worst = 0.0;
    for (LiftKind ka : kKinds) {
        for (LiftKind kb : kKinds) {
            const LiftedField A{Field::X, ka};
            const LiftedField B{Field::Y, kb};
            const LiftedVector defect = lifted_connection(A, B, jets, at, params, model, variant) -
                                        lifted_connection(B, A, jets, at, params, model, variant) -
                                        lift_bracket(A, B, jets, at, model);
            worst = std::max(worst, defect.max_abs());
        }
    }
    return worst;
}

double metric_compatibility_residual(const FieldJet& jets, const FiberPoint& at,
                                     const BergerParams& params, const SpaceFormModel& model,
                                     ConnectionVariant variant) {
    double worst = 0.0;
    for (LiftKind ka : kKinds) {
        for (LiftKind kb : kKinds) {
            for (LiftKind kc : kKinds) {
                const LiftedField A{Field::X, ka};
                const LiftedField B{Field::Y, kb};
                const LiftedField C{Field::Z, kc};
                const double rule = lifted_metric_derivative(A, B, C, jets, at, params);
                const double split =
                    lifted_inner(params, at, lifted_connection(A, B, jets, at, params, model, variant),
                                 lift(jets, C)) +
                    lifted_inner(params, at, lift(jets, B),
                                 lifted_connection(A, C, jets, at, params, model, variant));
                worst = std::max(worst, std::abs(rule - split));
            }
        }
    }
    return worst;
}

double ConnectionSweep::worst() const { return std::max({koszul, torsion, compatibility}); }

ConnectionSweep connection_sweep(const SpaceFormModel& model, const BergerParams& params,
                                 int jet_count, std::uint64_t seed,
                                 const std::vector<double>& xi_norms, ConnectionVariant variant) {
    model.validate();
    params.validate();
    if (jet_count < 1) throw InvalidArgument("jet_count must be >= 1");
    Rng rng(seed);
    ConnectionSweep sweep;
    sweep.jets = jet_count;
    for (int j = 0; j < jet_count; ++j) {
        const double norm = xi_norms.empty() ? 1.0 : xi_norms[j % xi_norms.size()];
        const FiberPoint at{FrameVector(norm * random_unit(rng, model.n))};
        const FieldJet jets = FieldJet::random(rng, model.n);
        sweep.koszul = std::max(sweep.koszul, koszul_residual(jets, at, params, model, variant));
        sweep.torsion = std::max(sweep.torsion, torsion_residual(jets, at, params, model, variant));
        sweep.compatibility = std::max(
            sweep.compatibility, metric_compatibility_residual(jets, at, params, model, variant));
    }
    return sweep;
}

} // namespace berger
