// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run everything
//   acceptance --only N   run criterion N (1..11)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "berger/experiment.hpp"
#include "berger/frenet_analysis.hpp"
#include "berger/geodesic_flow.hpp"
#include "berger/lifted_geometry.hpp"

using namespace berger;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

std::string format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* fmt, ...) {
    char buf[1024];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FlowConfig flow(Bundle b, int n, double m, double delta, double step, double sigma_max,
                int stride = 1) {
    FlowConfig f;
    f.bundle = b;
    f.model = {n, m};
    f.params = {delta};
    f.step = step;
    f.sigma_max = sigma_max;
    f.sample_stride = stride;
    return f;
}

/// Seeded random unit-bundle state, lambda^2 uniform in [0.05, 0.8].
BundleState random_t1m(Rng& rng, int n, double delta) {
    const InitialData d = random_initial_data(n, {delta}, Bundle::T1M, 1.0, rng);
    return prepare_initial(d.xi, d.xi_dot, d.u_dir, {delta}, Bundle::T1M).state;
}

/// Same data, TM bundle, fiber vector rescaled to |xi| = xi_norm.
BundleState random_tm(Rng& rng, int n, double delta, double xi_norm) {
    const InitialData d = random_initial_data(n, {delta}, Bundle::TM, xi_norm, rng);
    return prepare_initial(d.xi, d.xi_dot, d.u_dir, {delta}, Bundle::TM).state;
}

double state_distance(const BundleState& a, const BundleState& b) {
    return std::sqrt((a.u - b.u).squaredNorm() + (a.xi - b.xi).squaredNorm() +
                     (a.w - b.w).squaredNorm());
}

// ---- criteria ----

Outcome connection_correctness() {
    constexpr int kJets = 1000;
    constexpr double kTol = 1e-10;
    const auto t0 = std::chrono::steady_clock::now();
    double koszul = 0.0, torsion = 0.0;
    std::uint64_t seed = 1;
    int sweeps = 0;
    for (int n : {1, 2, 4})
        for (double m : {0.0, 4.0, -2.0})
            for (double d : {0.0, 0.5, 2.0})
                for (double xi_norm : {0.3, 1.0, 1.7}) {
                    const ConnectionSweep s = connection_sweep({n, m}, {d}, kJets, seed++, {xi_norm});
                    koszul = std::max(koszul, s.koszul);
                    torsion = std::max(torsion, s.torsion);
                    ++sweeps;
                }
    const double elapsed = seconds_since(t0);
    return {koszul <= kTol && torsion <= kTol && elapsed < 10.0,
            format("%d configs x %d jets: max koszul %.2e, max torsion %.2e (tol %.0e); %.2f s (< 10 s)",
                   sweeps, kJets, koszul, torsion, kTol, elapsed)};
}

Outcome sasaki_reduction() {
    constexpr double kTol = 1e-12;
    const LiftKind H = LiftKind::horizontal, V = LiftKind::vertical;
    Rng rng(2);
    double worst = 0.0;
    for (int n : {1, 2, 4})
        for (double m : {0.0, 4.0, -2.0})
            for (int t = 0; t < 200; ++t) {
                const SpaceFormModel model{n, m};
                const FieldJet j = FieldJet::random(rng, n);
                const FiberPoint at{FrameVector(random_uniform(rng, 0.2, 2.0) * random_unit(rng, n))};
                const FrameVector& X = j.at(Field::X);
                const FrameVector& Y = j.at(Field::Y);
                const FrameVector& dXY = j.nabla(Field::X, Field::Y);
                const FrameVector zero = FrameVector::zero(n);
                // Classical Sasaki connection.
                const LiftedVector expected[2][2] = {
                    {{dXY, FrameVector(-0.5 * riemann(model, X, Y, at.xi))},
                     {FrameVector(0.5 * riemann(model, at.xi, Y, X)), dXY}},
                    {{FrameVector(0.5 * riemann(model, at.xi, X, Y)), zero}, {zero, zero}}};
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const LiftedVector got = lifted_connection(a ? V : H, b ? V : H, j, at, {0.0}, model);
                        worst = std::max(worst, (got - expected[a][b]).max_abs());
                    }
            }
    return {worst <= kTol, format("1800 random jets, delta = 0: max deviation from classical formulas %.2e (tol %.0e)",
                                  worst, kTol)};
}

Outcome conservation() {
    constexpr double kDriftTol = 1e-8;
    const int n = 2;
    const double m = 4.0, d = 0.8, sigma = 20.0;
    Rng rng(3);
    double drift = 0.0;
    std::vector<BundleState> starts;
    for (int t = 0; t < 5; ++t) {
        starts.push_back(random_t1m(rng, n, d));
        const Trajectory traj = integrate(flow(Bundle::T1M, n, m, d, 1e-3, sigma, 100), starts.back());
        drift = std::max(drift, conserved_report(traj).worst_t1m());
    }

    // Endpoint error against a fine reference: coarse steps so the RK4
    // truncation error dominates rounding.
    double worst_ratio_dev = 0.0, min_ratio = 1e300, max_ratio = 0.0;
    for (const BundleState& s0 : starts) {
        const auto end = [&](double h) {
            return integrate(flow(Bundle::T1M, n, m, d, h, sigma, static_cast<int>(std::lround(sigma / h))), s0)
                .samples.back()
                .state;
        };
        const BundleState ref = end(0.00125);
        const double e1 = state_distance(end(0.02), ref);
        const double e2 = state_distance(end(0.01), ref);
        const double ratio = e1 / e2;
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
        worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 16.0));
    }
    const bool pass = drift <= kDriftTol && min_ratio >= 14.0 && max_ratio <= 18.0;
    return {pass, format("5 runs n=2 m=4 delta=0.8, sigma in [0,20]: max drift %.2e (tol %.0e); "
                         "step-halving ratio in [%.2f, %.2f] (need [14, 18])",
                         drift, kDriftTol, min_ratio, max_ratio)};
}

Outcome operator_rate() {
    constexpr double kT1mTol = 1e-6, kTmRelTol = 1e-5;
    Rng rng(4);
    double t1m = 0.0;
    for (double d : {0.3, 0.8, 1.5}) {
        const BundleState s0 = random_t1m(rng, 4, d);
        const RateCheck rc = script_R_rate_check(integrate(flow(Bundle::T1M, 4, 4.0, d, 1e-3, 1.0), s0));
        t1m = std::max(t1m, rc.max_fd_norm);
    }
    double tm_rel = 0.0, fd = 0.0, closed = 0.0;
    for (int t = 0; t < 3; ++t) {
        const BundleState s0 = random_tm(rng, 4, 1.0, 0.5);
        const RateCheck rc = script_R_rate_check(integrate(flow(Bundle::TM, 4, 4.0, 1.0, 1e-3, 1.0), s0));
        tm_rel = std::max(tm_rel, rc.relative_residual);
        fd = std::max(fd, rc.max_fd_norm);
        closed = std::max(closed, rc.max_reference_norm);
    }
    return {t1m <= kT1mTol && tm_rel <= kTmRelTol,
            format("T1M max |dR/dsigma| %.2e (tol %.0e); TM |xi0|=0.5 delta=1: relative residual %.2e "
                   "(tol %.0e), max FD rate %.2e vs closed form %.2e",
                   t1m, kT1mTol, tm_rel, kTmRelTol, fd, closed)};
}

/// Max relative error of numeric against algebraic chains, p <= 4, with
/// samples `stride` integrator steps (1e-3) apart.
double chain_error(const BundleState& s0, const SpaceFormModel& model, double d, int stride) {
    constexpr int kP = 4;
    constexpr double kStep = 1e-3;
    const int half = numeric_chain_half_width(kP);
    const Trajectory traj = integrate(
        flow(Bundle::T1M, model.n, model.m, d, kStep, (2 * half + 2) * stride * kStep, stride), s0);
    const std::size_t c = static_cast<std::size_t>(half);
    const DerivativeChain num = numeric_chain(traj, c, kP);
    const DerivativeChain alg = algebraic_chain(traj.samples[c].state, model, {d}, kP);
    double worst = 0.0;
    for (std::size_t p = 0; p < alg.vectors.size(); ++p)
        worst = std::max(worst, (num.vectors[p] - alg.vectors[p]).norm() / alg.vectors[p].norm());
    return worst;
}

Outcome chain_oracle() {
    constexpr double kTol = 1e-4;
    Rng rng(5);
    double at_step = 0.0, min_order = 1e300, max_order = 0.0;
    for (int t = 0; t < 10; ++t) {
        const double d = random_uniform(rng, 0.0, 1.5);
        const BundleState s0 = random_t1m(rng, 4, d);
        at_step = std::max(at_step, chain_error(s0, {4, 4.0}, d, 1));
        // Order measured where truncation dominates rounding in the fourth difference.
        const double e_fine = chain_error(s0, {4, 4.0}, d, 10);
        const double e_coarse = chain_error(s0, {4, 4.0}, d, 20);
        const double order = std::log2(e_coarse / e_fine);
        min_order = std::min(min_order, order);
        max_order = std::max(max_order, order);
    }
    return {at_step <= kTol && min_order >= 1.5 && max_order <= 2.5,
            format("10 configs, p <= 4: max relative error %.2e at step 1e-3 (tol %.0e); "
                   "observed order at spacing 1e-2/2e-2 in [%.2f, %.2f] (need [1.5, 2.5])",
                   at_step, kTol, min_order, max_order)};
}

Outcome norm_identities() {
    constexpr double kNormTol = 1e-7, kSpeedTol = 1e-10;
    Rng rng(6);
    double norm_dev = 0.0, speed_dev = 0.0;
    for (int t = 0; t < 5; ++t) {
        const double d = random_uniform(rng, 0.0, 1.5);
        const SpaceFormModel model{4, 4.0};
        const BundleState s0 = random_t1m(rng, 4, d);
        const Trajectory traj = integrate(flow(Bundle::T1M, 4, 4.0, d, 1e-3, 20.0, 500), s0);
        std::vector<double> first;
        for (const Sample& s : traj.samples) {
            const DerivativeChain chain = algebraic_chain(s.state, model, {d}, 6);
            for (std::size_t p = 0; p < chain.vectors.size(); ++p) {
                if (first.size() <= p) first.push_back(chain.vectors[p].norm());
                norm_dev = std::max(norm_dev, std::abs(chain.vectors[p].norm() - first[p]));
            }
            const double predicted = std::sqrt(1.0 - s.diag.c * s.diag.c - d * d * s.diag.mu * s.diag.mu);
            speed_dev = std::max(speed_dev, std::abs(s.state.u.norm() - predicted));
        }
    }
    return {norm_dev <= kNormTol && speed_dev <= kSpeedTol,
            format("5 runs over sigma in [0,20]: max ||x^(p)| drift| %.2e for p <= 6 (tol %.0e); "
                   "max speed identity error %.2e (tol %.0e)",
                   norm_dev, kNormTol, speed_dev, kSpeedTol)};
}

Outcome curvature_constancy() {
    constexpr double kTol = 1e-6;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(7);
    double worst = 0.0;
    int configs = 0, min_rank = 99, max_rank = 0;
    for (double d : {0.3, 0.9})
        for (int t = 0; t < 50; ++t) {
            const BundleState s0 = random_t1m(rng, 4, d);
            // 50 samples, 200 steps apart.
            const Trajectory traj = integrate(flow(Bundle::T1M, 4, 4.0, d, 1e-3, 9.8, 200), s0);
            const CurvatureProfile prof = curvature_profile(traj, 6, 1);
            worst = std::max(worst, relative_variation(prof, {1, 2, 3, 4, 5}));
            for (int r : prof.effective_rank) {
                min_rank = std::min(min_rank, r);
                max_rank = std::max(max_rank, r);
            }
            ++configs;
        }
    const double elapsed = seconds_since(t0);
    return {worst <= kTol && elapsed < 60.0,
            format("%d configs x 50 samples, n=4 m=4 delta in {0.3, 0.9}: max relative variation of k1..k5 "
                   "%.2e (tol %.0e); chain rank %d..%d; %.2f s (< 60 s)",
                   configs, worst, kTol, min_rank, max_rank, elapsed)};
}

Outcome sixth_curvature() {
    constexpr double kTol = 1e-7, kCollapseTol = 1e-12;
    Rng rng(8);
    double worst = 0.0, collapse = 0.0;
    int configs = 0;
    std::string counterexamples;
    for (double d : {0.0, 0.5, 1.2})
        for (int t = 0; t < 100; ++t) {
            const BundleState s0 = random_t1m(rng, 4, d);
            const CurvatureResult r = generalized_curvatures(algebraic_chain(s0, {4, 4.0}, {d}, 8));
            std::vector<double> k(7, 0.0);
            std::copy(r.k.begin(), r.k.end(), k.begin());
            const double value = k[5] / std::max(k[0], 1.0);
            // Squared sine between x^(7) and span{x', ..., x^(6)}.
            const double ratio = r.ratio.size() > 6 ? r.ratio[6] : 0.0;
            worst = std::max(worst, value);
            collapse = std::max(collapse, ratio);
            if (value > kTol || ratio > kCollapseTol)
                counterexamples += format(" [delta=%.1f #%d: k=(%.3e %.3e %.3e %.3e %.3e %.3e), ratio %.2e]",
                                          d, t, k[0], k[1], k[2], k[3], k[4], k[5], ratio);
            ++configs;
        }
    return {worst <= kTol && collapse <= kCollapseTol,
            format("%d configs n=4 m=4 delta in {0, 0.5, 1.2}: max k6/max(k1,1) %.2e (tol %.0e); "
                   "max D7/(D6 |x^(7)|^2) %.2e (tol %.0e)%s",
                   configs, worst, kTol, collapse, kCollapseTol,
                   counterexamples.empty() ? "; no counterexamples" : counterexamples.c_str())};
}

Outcome span_identities() {
    constexpr double kTol = 1e-10;
    Rng rng(9);
    double worst = 0.0;
    int configs = 0;
    for (int n : {2, 4, 6})
        for (double m : {4.0, -2.0, 1.0})
            for (int t = 0; t < 10; ++t) {
                const double d = random_uniform(rng, 0.0, 2.0);
                const BundleState s = random_t1m(rng, n, d);
                for (const SpanResidual& r : span_residual({n, m}, {d}, s.xi, s.w, 5))
                    worst = std::max(worst, r.residual);
                ++configs;
            }
    return {worst <= kTol, format("%d unit-bundle states, powers 2..11: max relative residual %.2e (tol %.0e)",
                                  configs, worst, kTol)};
}

Outcome tm_divergence() {
    constexpr double kThreshold = 1e-2, kConstancyTol = 1e-6;
    Rng rng(10);
    double tm_min = 1e300, t1m_max = 0.0;
    for (int t = 0; t < 3; ++t) {
        const double d = 1.0;
        Rng twin = rng;
        const BundleState unit = random_t1m(rng, 4, d);
        const BundleState tangent = random_tm(twin, 4, d, 0.5);
        const auto profile = [&](Bundle b, const BundleState& s0, int p_max) {
            return curvature_profile(integrate(flow(b, 4, 4.0, d, 1e-3, 10.0, 10), s0), p_max, 10);
        };
        tm_min = std::min(tm_min, relative_variation(profile(Bundle::TM, tangent, 3), {1}));
        t1m_max = std::max(t1m_max, relative_variation(profile(Bundle::T1M, unit, 6), {1, 2, 3, 4, 5}));
    }
    return {tm_min > kThreshold && t1m_max <= kConstancyTol,
            format("3 matched pairs, |xi0| = 0.5 on TM, delta=1: min TM k1 relative variation %.2e "
                   "(need > %.0e); max T1M variation %.2e (tol %.0e)",
                   tm_min, kThreshold, t1m_max, kConstancyTol)};
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "berger_acceptance_determinism";
    ExperimentConfig cfg = load_config({{"out", dir.string()}});
    const std::string a = cmd_theorems(cfg).report.dump();
    const std::string b = cmd_theorems(cfg).report.dump();
    std::filesystem::remove_all(dir);
    return {a == b && !a.empty(), format("two default theorems runs: %zu-byte reports %s", a.size(),
                                         a == b ? "identical" : "differ")};
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "connection correctness", connection_correctness},
        {2, "Sasaki reduction", sasaki_reduction},
        {3, "unit-bundle conservation", conservation},
        {4, "twisted operator rate", operator_rate},
        {5, "derivative chain oracle", chain_oracle},
        {6, "chain norms and speed", norm_identities},
        {7, "constant curvatures", curvature_constancy},
        {8, "sixth curvature vanishes", sixth_curvature},
        {9, "power span identities", span_identities},
        {10, "TM curvatures vary", tm_divergence},
        {11, "determinism", determinism},
    };
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] C%-2d %-26s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
