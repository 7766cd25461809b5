#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "berger/experiment.hpp"
#include "berger/frenet_analysis.hpp"
#include "berger/lifted_geometry.hpp"

namespace berger {

using nlohmann::json;

namespace {

namespace anchor {
constexpr const char* koszul = "Levi-Civita connection of the deformed Sasaki metric: Koszul identity";
constexpr const char* torsion = "Levi-Civita connection of the deformed Sasaki metric: torsion-free";
constexpr const char* compat = "differentiation rules of the deformed metric: metric compatibility";
constexpr const char* conservation = "unit-bundle geodesics: c = const, mu = const";
constexpr const char* lifted_speed = "geodesic energy of the deformed metric (unit lifted speed)";
constexpr const char* rate_t1m = "twisted curvature operator is parallel along unit-bundle projections";
constexpr const char* rate_tm = "twisted curvature operator rate along tangent-bundle projections";
constexpr const char* chain_oracle = "x^(p+1) = (-1)^p script_R^p x' along unit-bundle projections";
constexpr const char* norm_constancy = "|x^(p)| = const along unit-bundle projections";
constexpr const char* speed_identity = "ds/dsigma = sqrt(1 - c^2 - delta^2 mu^2)";
constexpr const char* constancy = "all geodesic curvatures of unit-bundle projections are constant";
constexpr const char* vanishing = "over CP^n: k_6 = ... = k_{2n-1} = 0";
constexpr const char* spans = "script_R^2q in span{R^2, JR, E}, script_R^(2q+1) in span{JR^2, R, J}";
constexpr const char* divergence = "tangent-bundle projections do not have constant curvatures";
} // namespace anchor

constexpr int kRateWindowSteps = 1000;
constexpr int kSpanPowers = 5;
constexpr int kNormChainLength = 6;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string status_name(ClaimStatus s) {
    switch (s) {
    case ClaimStatus::pass: return "pass";
    case ClaimStatus::fail: return "fail";
    case ClaimStatus::inapplicable: return "inapplicable";
    }
    return "fail";
}

json drift_json(const DriftReport& d) {
    return json{{"c", d.c},           {"mu", d.mu},
                {"xi_norm", d.xi_norm}, {"xi_dot_w", d.xi_dot_w},
                {"lifted_speed", d.lifted_speed}, {"lambda", d.lambda}};
}

FlowConfig flow_with(const ExperimentConfig& cfg, Bundle bundle, double sigma_max, int stride) {
    FlowConfig f = cfg.flow;
    f.bundle = bundle;
    f.sigma_max = sigma_max;
    f.sample_stride = stride;
    return f;
}

/// Initial state of the requested bundle derived from the config's data.
InitialState state_for(const ExperimentConfig& cfg, Bundle bundle) {
    ExperimentConfig c = cfg;
    c.flow.bundle = bundle;
    if (!c.initial.random && bundle == Bundle::TM)
        c.initial.xi = FrameVector(c.initial.xi * (c.xi_norm / c.initial.xi.norm()));
    return initial_state(c);
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + name + " to " + dir);
    out << content;
}

Report new_report(const std::string& command, const ExperimentConfig& cfg) {
    Report r;
    r.command = command;
    r.config = cfg.to_json();
    r.include_timing = cfg.timing;
    return r;
}

CommandResult finish(Report report, const ExperimentConfig& cfg, std::vector<std::string> files) {
    CommandResult out;
    out.report = std::move(report);
    out.exit_code = out.report.overall_pass() ? 0 : 1;
    const std::string name = out.report.command + "_report.json";
    write_file(cfg.out_dir, name, out.report.dump());
    files.push_back(name);
    out.files = std::move(files);
    return out;
}

// ---- individual claim suites ----

void connection_claims(const ExperimentConfig& cfg, Report& r) {
    const ConnectionSweep sweep =
        connection_sweep(cfg.flow.model, cfg.flow.params, cfg.samples, cfg.flow.seed,
                         {0.3, 1.0, 1.7}, cfg.mutation);
    json detail{{"jets", sweep.jets}, {"xi_norms", {0.3, 1.0, 1.7}}};
    Claim k = make_claim("connection.koszul", anchor::koszul, sweep.koszul, cfg.tol.connection);
    k.detail = detail;
    Claim t = make_claim("connection.torsion", anchor::torsion, sweep.torsion, cfg.tol.connection);
    t.detail = detail;
    Claim c = make_claim("connection.metric_compatibility", anchor::compat, sweep.compatibility,
                         cfg.tol.connection);
    c.detail = detail;
    r.claims.push_back(std::move(k));
    r.claims.push_back(std::move(t));
    r.claims.push_back(std::move(c));
}

Claim conservation_claim(const Trajectory& traj, const ExperimentConfig& cfg) {
    const DriftReport d = conserved_report(traj);
    Claim c;
    if (traj.config.bundle == Bundle::T1M) {
        c = make_claim("flow.t1m_conservation", anchor::conservation, d.worst_t1m(),
                       cfg.tol.conservation);
    } else {
        c = make_claim("flow.lifted_speed", anchor::lifted_speed, d.lifted_speed,
                       cfg.tol.conservation);
        c.note = "c, mu, |xi| and <xi,w> drifts on TM are informational";
    }
    c.detail = json{{"drift", drift_json(d)},
                    {"sigma_max", traj.samples.back().state.sigma},
                    {"samples", traj.samples.size()}};
    return c;
}

/// Max absolute deviation of |x^(p)|, p <= 6, across the profile samples.
Claim norm_constancy_claim(const Trajectory& traj, const ExperimentConfig& cfg, int stride) {
    const int length = std::min(kNormChainLength, std::max(2, cfg.p_max));
    std::vector<double> first;
    double worst = 0.0;
    for (std::size_t j = 0; j < traj.samples.size(); j += static_cast<std::size_t>(stride)) {
        const DerivativeChain chain = algebraic_chain(traj.samples[j].state, cfg.flow.model,
                                                      cfg.flow.params, length);
        std::vector<double> norms;
        for (const auto& v : chain.vectors) norms.push_back(v.norm());
        if (first.empty()) first = norms;
        for (std::size_t p = 0; p < norms.size(); ++p)
            worst = std::max(worst, std::abs(norms[p] - first[p]));
    }
    Claim c = make_claim("chain.norm_constancy", anchor::norm_constancy, worst, cfg.tol.norm_constancy);
    c.detail = json{{"p_max", length}, {"initial_norms", first}};
    return c;
}

Claim speed_identity_claim(const Trajectory& traj, const ExperimentConfig& cfg) {
    const double d2 = cfg.flow.params.delta * cfg.flow.params.delta;
    double worst = 0.0;
    for (const Sample& s : traj.samples) {
        const double predicted = std::sqrt(std::max(0.0, 1.0 - s.diag.c * s.diag.c - d2 * s.diag.mu * s.diag.mu));
        worst = std::max(worst, std::abs(s.state.u.norm() - predicted));
    }
    return make_claim("chain.speed_identity", anchor::speed_identity, worst, cfg.tol.speed_identity);
}

Claim span_claim(const BundleState& s, const ExperimentConfig& cfg) {
    const auto res = span_residual(cfg.flow.model, cfg.flow.params, s.xi, s.w, kSpanPowers);
    double worst = 0.0;
    json per = json::object();
    for (const SpanResidual& r : res) {
        worst = std::max(worst, r.residual);
        per[std::to_string(r.power)] = r.residual;
    }
    Claim c = make_claim("spans.power_relations", anchor::spans, worst, cfg.tol.span);
    c.detail = json{{"residual_by_power", per}};
    return c;
}

bool vanishing_applies(const ExperimentConfig& cfg, std::string& why) {
    if (cfg.flow.model.n < 4) {
        why = "inapplicable (k_6 undefined for n < 4)";
        return false;
    }
    if (!(cfg.flow.model.m > 0.0)) {
        why = "inapplicable (requires m > 0)";
        return false;
    }
    if (cfg.p_max < 8) {
        why = "inapplicable (requires p_max >= 8)";
        return false;
    }
    return true;
}

json profile_summary(const CurvatureProfile& prof) {
    json first = json::array();
    if (!prof.curvatures.empty())
        for (double k : prof.curvatures.front()) first.push_back(k);
    int min_rank = prof.effective_rank.empty() ? 0 : prof.effective_rank.front();
    int max_rank = min_rank;
    for (int r : prof.effective_rank) {
        min_rank = std::min(min_rank, r);
        max_rank = std::max(max_rank, r);
    }
    return json{{"samples", prof.sigmas.size()},
                {"k_at_first_sample", first},
                {"effective_rank_min", min_rank},
                {"effective_rank_max", max_rank}};
}

/// Largest D_7 / (D_6 |x^(7)|^2) over the profile, the ratio that governs k_6.
double k6_collapse_ratio(const CurvatureProfile& prof) {
    double worst = 0.0;
    for (const auto& ratios : prof.rank_ratios) {
        const double r = ratios.size() > 6 ? ratios[6] : 0.0;
        worst = std::max(worst, r);
    }
    return worst;
}

void profile_claims(const CurvatureProfile& prof, const ExperimentConfig& cfg, Report& r) {
    const TheoremVerdict cv = constancy_verdict(prof, cfg.tol.constancy);
    Claim c = make_claim("curvatures.constant", anchor::constancy, cv.residual, cv.tolerance);
    c.detail = profile_summary(prof);
    r.claims.push_back(std::move(c));

    std::string why;
    if (vanishing_applies(cfg, why)) {
        const VanishingVerdict vv = vanishing_verdict(prof, cfg.tol.vanishing);
        Claim v = make_claim("curvatures.k6_vanishes", anchor::vanishing, vv.residual, vv.tolerance);
        v.detail = json{{"first_vanishing_index", vv.first_vanishing_index},
                        {"k6_collapse_ratio", k6_collapse_ratio(prof)}};
        r.claims.push_back(std::move(v));
    } else {
        r.claims.push_back(inapplicable_claim("curvatures.k6_vanishes", anchor::vanishing, why));
    }
}

Trajectory run_flow(const FlowConfig& flow, const BundleState& s0) { return integrate(flow, s0); }

Claim rate_t1m_claim(const BundleState& s0, const ExperimentConfig& cfg) {
    const double window = std::min(cfg.flow.sigma_max, kRateWindowSteps * cfg.flow.step);
    const Trajectory traj = run_flow(flow_with(cfg, Bundle::T1M, window, 1), s0);
    const RateCheck rc = script_R_rate_check(traj);
    Claim c = make_claim("rate.t1m_parallel", anchor::rate_t1m, rc.max_fd_norm, cfg.tol.rate_t1m);
    c.detail = json{{"window", window}, {"samples", traj.samples.size()}};
    return c;
}

Claim rate_tm_claim(const BundleState& s0, const ExperimentConfig& cfg) {
    const double window = std::min(cfg.flow.sigma_max, kRateWindowSteps * cfg.flow.step);
    const Trajectory traj = run_flow(flow_with(cfg, Bundle::TM, window, 1), s0);
    const RateCheck rc = script_R_rate_check(traj);
    Claim c = make_claim("rate.tm_closed_form", anchor::rate_tm, rc.relative_residual,
                         cfg.tol.rate_tm_relative);
    c.detail = json{{"window", window},
                    {"max_fd_rate_norm", rc.max_fd_norm},
                    {"max_closed_form_norm", rc.max_reference_norm},
                    {"max_abs_residual", rc.max_residual},
                    {"xi_norm_initial", s0.xi.norm()}};
    if (rc.max_reference_norm > 0.0 && rc.max_fd_norm < 1e-3 * rc.max_reference_norm)
        c.note = "finite-difference rate is at integration-noise level while the closed form is not";
    return c;
}

/// Relative deviation of numeric from algebraic chains for p <= 4 at the given sample spacing.
double chain_oracle_error(const BundleState& s0, const ExperimentConfig& cfg, int spacing_steps) {
    constexpr int kOraclePmax = 4;
    const int reach = numeric_chain_half_width(kOraclePmax);
    const double window = (2 * reach + 2) * spacing_steps * cfg.flow.step;
    const Trajectory traj = run_flow(flow_with(cfg, Bundle::T1M, window, spacing_steps), s0);
    const std::size_t center = static_cast<std::size_t>(reach);
    const DerivativeChain numeric = numeric_chain(traj, center, kOraclePmax);
    const DerivativeChain exact = algebraic_chain(traj.samples[center].state, cfg.flow.model,
                                                  cfg.flow.params, kOraclePmax);
    double worst = 0.0;
    for (std::size_t p = 0; p < exact.vectors.size(); ++p) {
        const double scale = exact.vectors[p].norm();
        const double err = (numeric.vectors[p] - exact.vectors[p]).norm();
        worst = std::max(worst, scale > 0.0 ? err / scale : err);
    }
    return worst;
}

Claim chain_oracle_claim(const BundleState& s0, const ExperimentConfig& cfg) {
    const double e1 = chain_oracle_error(s0, cfg, 1);
    // Order is read off coarser spacings where truncation dominates rounding.
    const double e10 = chain_oracle_error(s0, cfg, 10);
    const double e20 = chain_oracle_error(s0, cfg, 20);
    Claim c = make_claim("chain.oracle", anchor::chain_oracle, e1, cfg.tol.chain_relative);
    c.detail = json{{"relative_error_spacing_1_step", e1},
                    {"relative_error_spacing_10_steps", e10},
                    {"relative_error_spacing_20_steps", e20},
                    {"observed_order", e10 > 0.0 && e20 > 0.0 ? std::log2(e20 / e10) : 0.0}};
    return c;
}

Claim k6_sweep_claim(const ExperimentConfig& cfg) {
    double worst = 0.0;
    double worst_ratio = 0.0;
    int passed = 0;
    json failures = json::array();
    for (int s = 0; s < cfg.sweep; ++s) {
        const std::uint64_t seed = cfg.flow.seed + 1 + static_cast<std::uint64_t>(s);
        Rng rng(seed);
        const InitialData d = random_initial_data(cfg.flow.model.n, cfg.flow.params, Bundle::T1M,
                                                  1.0, rng);
        const InitialState init = prepare_initial(d.xi, d.xi_dot, d.u_dir, cfg.flow.params, Bundle::T1M);
        const DerivativeChain chain =
            algebraic_chain(init.state, cfg.flow.model, cfg.flow.params, cfg.p_max);
        const CurvatureResult res = generalized_curvatures(chain, cfg.tol.rank_tol);
        std::vector<double> k(static_cast<std::size_t>(cfg.p_max - 1), 0.0);
        std::copy(res.k.begin(), res.k.end(), k.begin());
        const double value = k[5] / std::max(k[0], 1.0);
        const double ratio = res.ratio.size() > 6 ? res.ratio[6] : 0.0;
        worst = std::max(worst, value);
        worst_ratio = std::max(worst_ratio, ratio);
        if (value <= cfg.tol.vanishing) {
            ++passed;
        } else {
            failures.push_back(json{{"seed", seed}, {"k", k}});
        }
    }
    Claim c = make_claim("curvatures.k6_sweep", anchor::vanishing, worst, cfg.tol.vanishing);
    c.detail = json{{"configs", cfg.sweep},
                    {"passed", passed},
                    {"max_k6_collapse_ratio", worst_ratio},
                    {"counterexamples", failures}};
    return c;
}

Claim divergence_claim(const BundleState& tm0, const ExperimentConfig& cfg) {
    if (cfg.flow.model.m == 0.0)
        return inapplicable_claim("curvatures.tm_nonconstant", anchor::divergence,
                                  "inapplicable (flat model has k_1 = 0)");
    const Trajectory traj =
        run_flow(flow_with(cfg, Bundle::TM, cfg.flow.sigma_max, cfg.flow.sample_stride), tm0);
    const CurvatureProfile prof = curvature_profile(traj, 3, cfg.profile_stride, cfg.tol.rank_tol);
    const double variation = relative_variation(prof, {1});
    Claim c = make_claim("curvatures.tm_nonconstant", anchor::divergence, variation,
                         cfg.tol.divergence, ">");
    c.detail = json{{"k1_at_first_sample", prof.curvatures.front()[0]},
                    {"samples", prof.sigmas.size()},
                    {"xi_norm_initial", tm0.xi.norm()}};
    if (c.status == ClaimStatus::fail)
        c.note = "k_1 along the tangent-bundle projection is constant to integration accuracy";
    return c;
}

} // namespace

Claim make_claim(std::string id, std::string anchor_text, double residual, double tolerance,
                 std::string comparison) {
    Claim c;
    c.id = std::move(id);
    c.anchor = std::move(anchor_text);
    c.residual = residual;
    c.tolerance = tolerance;
    c.comparison = std::move(comparison);
    const bool ok = c.comparison == ">" ? residual > tolerance : residual <= tolerance;
    c.status = ok ? ClaimStatus::pass : ClaimStatus::fail;
    return c;
}

Claim inapplicable_claim(std::string id, std::string anchor_text, std::string note) {
    Claim c;
    c.id = std::move(id);
    c.anchor = std::move(anchor_text);
    c.status = ClaimStatus::inapplicable;
    c.note = std::move(note);
    return c;
}

bool Report::overall_pass() const {
    return std::none_of(claims.begin(), claims.end(),
                        [](const Claim& c) { return c.status == ClaimStatus::fail; });
}

std::vector<std::string> Report::failed_claims() const {
    std::vector<std::string> out;
    for (const Claim& c : claims)
        if (c.status == ClaimStatus::fail) out.push_back(c.id);
    return out;
}

json Report::to_json() const {
    json claims_json = json::array();
    for (const Claim& c : claims) {
        json j{{"id", c.id},
               {"anchor", c.anchor},
               {"status", status_name(c.status)},
               {"pass", c.status != ClaimStatus::fail},
               {"comparison", c.comparison},
               {"residual", c.residual},
               {"tolerance", c.tolerance},
               {"detail", c.detail}};
        if (!c.note.empty()) j["note"] = c.note;
        claims_json.push_back(std::move(j));
    }
    json env{{"precision", "binary64"}};
    if (config.is_object()) {
        env["step"] = config.value("step", 0.0);
        env["seed"] = config.value("seed", 0);
    }
    json j{{"command", command},
           {"config", config},
           {"environment", env},
           {"claims", claims_json},
           {"failed", failed_claims()},
           {"overall_pass", overall_pass()}};
    if (include_timing) j["timing_seconds"] = elapsed_seconds;
    return j;
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

std::string trajectory_csv(const Trajectory& traj) {
    const int d = traj.config.model.real_dim();
    std::ostringstream out;
    out << "sigma";
    for (const char* name : {"u", "xi", "w"})
        for (int i = 1; i <= d; ++i) out << ',' << name << '_' << i;
    out << ",c,mu,lambda,xi_norm,lifted_speed\n";
    for (const Sample& s : traj.samples) {
        out << fmt(s.state.sigma);
        for (const FrameVector* v : {&s.state.u, &s.state.xi, &s.state.w})
            for (int i = 0; i < d; ++i) out << ',' << fmt((*v)[i]);
        out << ',' << fmt(s.diag.c) << ',' << fmt(s.diag.mu) << ',' << fmt(s.diag.lambda) << ','
            << fmt(s.diag.xi_norm) << ',' << fmt(s.diag.lifted_speed) << '\n';
    }
    return out.str();
}

std::string profile_csv(const CurvatureProfile& profile) {
    std::ostringstream out;
    out << "sigma";
    for (int i = 1; i < profile.p_max; ++i) out << ",k_" << i;
    out << ",effective_rank\n";
    for (std::size_t j = 0; j < profile.sigmas.size(); ++j) {
        out << fmt(profile.sigmas[j]);
        for (double k : profile.curvatures[j]) out << ',' << fmt(k);
        out << ',' << profile.effective_rank[j] << '\n';
    }
    return out.str();
}

CommandResult cmd_verify_connection(const ExperimentConfig& cfg) {
    Report r = new_report("verify-connection", cfg);
    connection_claims(cfg, r);
    return finish(std::move(r), cfg, {});
}

CommandResult cmd_integrate(const ExperimentConfig& cfg) {
    Report r = new_report("integrate", cfg);
    const InitialState init = initial_state(cfg);
    const Trajectory traj = integrate(cfg.flow, init.state);
    Claim c = conservation_claim(traj, cfg);
    if (init.vertical) c.note = "vertical geodesic: the projected curve is a point";
    r.claims.push_back(std::move(c));
    write_file(cfg.out_dir, "trajectory.csv", trajectory_csv(traj));
    return finish(std::move(r), cfg, {"trajectory.csv"});
}

CommandResult cmd_curvatures(const ExperimentConfig& cfg) {
    Report r = new_report("curvatures", cfg);
    const InitialState init = initial_state(cfg);
    if (init.vertical)
        throw DegenerateProjection("vertical geodesic: x' = 0, curvatures are undefined");
    const Trajectory traj = integrate(cfg.flow, init.state);
    const CurvatureProfile prof = curvature_profile(traj, cfg.p_max, cfg.profile_stride, cfg.tol.rank_tol);

    if (cfg.flow.bundle == Bundle::T1M) {
        profile_claims(prof, cfg, r);
        r.claims.push_back(norm_constancy_claim(traj, cfg, cfg.profile_stride));
        r.claims.push_back(speed_identity_claim(traj, cfg));
        r.claims.push_back(span_claim(init.state, cfg));
    } else {
        Claim c = inapplicable_claim("curvatures.constant", anchor::constancy, "not-applicable (TM)");
        c.residual = relative_variation(prof, {1});
        c.detail = profile_summary(prof);
        c.detail["k1_relative_variation"] = c.residual;
        r.claims.push_back(std::move(c));
        r.claims.push_back(speed_identity_claim(traj, cfg));
    }
    write_file(cfg.out_dir, "profile.csv", profile_csv(prof));
    return finish(std::move(r), cfg, {"profile.csv"});
}

CommandResult cmd_theorems(const ExperimentConfig& cfg) {
    Report r = new_report("theorems", cfg);
    connection_claims(cfg, r);

    const InitialState unit = state_for(cfg, Bundle::T1M);
    if (unit.vertical)
        throw DegenerateProjection("vertical geodesic: x' = 0, curvatures are undefined");
    const InitialState tangent = state_for(cfg, Bundle::TM);

    const Trajectory traj = run_flow(flow_with(cfg, Bundle::T1M, cfg.flow.sigma_max, cfg.flow.sample_stride),
                                     unit.state);
    r.claims.push_back(conservation_claim(traj, cfg));
    r.claims.push_back(rate_t1m_claim(unit.state, cfg));
    r.claims.push_back(rate_tm_claim(tangent.state, cfg));
    r.claims.push_back(chain_oracle_claim(unit.state, cfg));
    r.claims.push_back(norm_constancy_claim(traj, cfg, cfg.profile_stride));
    r.claims.push_back(speed_identity_claim(traj, cfg));

    const CurvatureProfile prof = curvature_profile(traj, cfg.p_max, cfg.profile_stride, cfg.tol.rank_tol);
    profile_claims(prof, cfg, r);
    std::string why;
    if (vanishing_applies(cfg, why))
        r.claims.push_back(k6_sweep_claim(cfg));
    else
        r.claims.push_back(inapplicable_claim("curvatures.k6_sweep", anchor::vanishing, why));
    r.claims.push_back(span_claim(unit.state, cfg));
    r.claims.push_back(divergence_claim(tangent.state, cfg));
    return finish(std::move(r), cfg, {});
}

CommandResult run_command(const std::string& name, const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    CommandResult res;
    if (name == "verify-connection") res = cmd_verify_connection(cfg);
    else if (name == "integrate") res = cmd_integrate(cfg);
    else if (name == "curvatures") res = cmd_curvatures(cfg);
    else if (name == "theorems") res = cmd_theorems(cfg);
    else throw UsageError("unknown command '" + name + "'");
    res.report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.timing) write_file(cfg.out_dir, res.report.command + "_report.json", res.report.dump());
    return res;
}

} // namespace berger
