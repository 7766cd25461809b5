#include <doctest.h>

#include "berger/curvature_model.hpp"
#include "berger/lifted_geometry.hpp"

using namespace berger;

namespace {

constexpr LiftKind H = LiftKind::horizontal;
constexpr LiftKind V = LiftKind::vertical;

// Classical Sasaki connection, written independently of the library.
LiftedVector sasaki(LiftKind a, LiftKind b, const FieldJet& j, const FrameVector& xi,
                    const SpaceFormModel& model) {
    const FrameVector& X = j.at(Field::X);
    const FrameVector& Y = j.at(Field::Y);
    const FrameVector& dXY = j.nabla(Field::X, Field::Y);
    if (a == H && b == H)
        return {dXY, FrameVector(-0.5 * riemann(model, X, Y, xi))};
    if (a == H && b == V)
        return {FrameVector(0.5 * riemann(model, xi, Y, X)), dXY};
    if (a == V && b == H)
        return {FrameVector(0.5 * riemann(model, xi, X, Y)), FrameVector(X.size())};
    return LiftedVector::zero(model.n);
}

} // namespace

TEST_CASE("lifted inner product") {
    Rng rng(1);
    const FrameVector xi = random_unit(rng, 2);
    const LiftedVector a{random_gaussian(rng, 2), random_gaussian(rng, 2)};
    const LiftedVector b{random_gaussian(rng, 2), random_gaussian(rng, 2)};

    CHECK(lifted_inner({0.0}, {xi}, a, b) == doctest::Approx(inner(a.h, b.h) + inner(a.v, b.v)));

    const LiftedVector hopf = LiftedVector::vertical(apply_J(xi));
    CHECK(lifted_inner({0.7}, {xi}, hopf, hopf) == doctest::Approx(1.0 + 0.49));

    const LiftedVector ha = LiftedVector::horizontal(a.h), hb = LiftedVector::horizontal(b.h);
    CHECK(lifted_inner({2.0}, {FrameVector(3.0 * xi)}, ha, hb) == doctest::Approx(inner(a.h, b.h)));
}

TEST_CASE("brackets of lifts") {
    Rng rng(2);
    const SpaceFormModel model{2, 4.0};
    const FieldJet jets = FieldJet::random(rng, 2);
    const FiberPoint at{random_gaussian(rng, 2)};

    CHECK(lift_bracket(V, V, jets, at, model).max_abs() == 0.0);

    const LiftedVector hv = lift_bracket(H, V, jets, at, model);
    CHECK(hv.h.norm() == 0.0);
    CHECK(hv.v.isApprox(jets.nabla(Field::X, Field::Y)));

    FieldJet symmetric = jets;
    for (auto& row : symmetric.derivative)
        for (auto& d : row) d.setZero();
    CHECK(lift_bracket(H, H, symmetric, at, {2, 0.0}).max_abs() == 0.0);
}

TEST_CASE("metric differentiation rules") {
    Rng rng(3);
    const FieldJet jets = FieldJet::random(rng, 2);
    const FiberPoint at{random_gaussian(rng, 2)};

    CHECK(metric_derivative(DerivativeRule::hh_by_v, jets, at, {0.9}) == 0.0);
    CHECK(metric_derivative(DerivativeRule::vv_by_v, jets, at, {0.0}) == 0.0);

    // vv_by_v against a finite difference of the metric along xi + t X.
    const BergerParams p{0.8};
    const FrameVector& X = jets.at(Field::X);
    const LiftedVector Y = LiftedVector::vertical(jets.at(Field::Y));
    const LiftedVector Z = LiftedVector::vertical(jets.at(Field::Z));
    const double t = 1e-5;
    const double fd = (lifted_inner(p, {FrameVector(at.xi + t * X)}, Y, Z) -
                       lifted_inner(p, {FrameVector(at.xi - t * X)}, Y, Z)) /
                      (2 * t);
    CHECK(metric_derivative(DerivativeRule::vv_by_v, jets, at, p) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("connection reduces to Sasaki at delta = 0") {
    Rng rng(4);
    const SpaceFormModel model{2, 4.0};
    for (int t = 0; t < 50; ++t) {
        const FieldJet jets = FieldJet::random(rng, 2);
        const FiberPoint at{random_gaussian(rng, 2)};
        for (LiftKind a : {H, V})
            for (LiftKind b : {H, V}) {
                const LiftedVector got = lifted_connection(a, b, jets, at, {0.0}, model);
                CHECK((got - sasaki(a, b, jets, at.xi, model)).max_abs() <= 1e-12);
            }
    }
}

TEST_CASE("vertical-vertical connection") {
    Rng rng(5);
    const SpaceFormModel model{2, 4.0};
    FieldJet jets = FieldJet::random(rng, 2);
    const FiberPoint at{random_unit(rng, 2)};

    CHECK(lifted_connection(V, V, jets, at, {0.0}, model).max_abs() == 0.0);

    jets.value[1] = jets.value[0];
    const FrameVector& X = jets.at(Field::X);
    const FrameVector jxi = apply_J(at.xi);
    const double d = 0.6, d2 = d * d;
    const double a = inner(X, jxi), b = inner(X, at.xi);
    const FrameVector expected =
        d2 * (2 * a * apply_J(X) - (2 * d2 / (1 + d2)) * a * b * jxi);
    const LiftedVector got = lifted_connection(V, V, jets, at, {d}, model);
    CHECK(got.h.norm() == 0.0);
    CHECK((got.v - expected).norm() < 1e-14);

    FieldJet flat_jets = jets;
    flat_jets.derivative[0][1].setZero();
    CHECK(lifted_connection(H, H, flat_jets, at, {d}, {2, 0.0}).max_abs() == 0.0);
}

TEST_CASE("Koszul, torsion and compatibility residuals") {
    Rng rng(6);
    const SpaceFormModel model{2, 4.0};
    for (double xi_norm : {1.0, 0.3}) {
        for (double d : {0.7, 0.0}) {
            for (int t = 0; t < 20; ++t) {
                const FieldJet jets = FieldJet::random(rng, 2);
                const FiberPoint at{FrameVector(xi_norm * random_unit(rng, 2))};
                CHECK(koszul_residual(jets, at, {d}, model) <= 1e-10);
                CHECK(torsion_residual(jets, at, {d}, model) <= 1e-10);
                CHECK(metric_compatibility_residual(jets, at, {d}, model) <= 1e-10);
            }
        }
    }
    const FieldJet jets = FieldJet::random(rng, 2);
    CHECK(torsion_residual(jets, {random_gaussian(rng, 2)}, {0.0}, {2, 0.0}) <= 1e-12);
}

TEST_CASE("mutated connection is caught") {
    const ConnectionSweep ok = connection_sweep({2, 4.0}, {0.7}, 50, 9, {0.3, 1.0, 1.7});
    CHECK(ok.worst() <= 1e-10);
    const ConnectionSweep bad = connection_sweep({2, 4.0}, {0.7}, 50, 9, {0.3, 1.0, 1.7},
                                                 ConnectionVariant::flipped_vv_sign);
    CHECK(bad.koszul > 1e-3);
}
