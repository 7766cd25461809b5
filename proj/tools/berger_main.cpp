#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "berger/experiment.hpp"

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::optional<std::string> bundle;
    std::optional<int> n;
    std::optional<double> m;
    std::optional<double> delta;
    std::optional<double> step;
    std::optional<double> sigma_max;
    std::optional<int> p_max;
    std::optional<long long> seed;
    std::optional<int> samples;
    std::optional<std::string> out;
    std::optional<std::string> mutation;
    bool timing = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--bundle", f.bundle, "TM or T1M")->check(CLI::IsMember({"TM", "T1M"}));
    cmd->add_option("--n", f.n, "complex dimension");
    cmd->add_option("--m", f.m, "holomorphic sectional curvature");
    cmd->add_option("--delta", f.delta, "fiber deformation");
    cmd->add_option("--step", f.step, "RK4 step");
    cmd->add_option("--sigma-max", f.sigma_max, "integration length");
    cmd->add_option("--pmax", f.p_max, "length of the derivative chain");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--samples", f.samples, "random jets for connection checks");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--mutation", f.mutation, "none or vv-sign");
    cmd->add_flag("--timing", f.timing, "record wall time in the report");
}

json overrides(const Flags& f) {
    json o = json::object();
    if (f.bundle) o["bundle"] = *f.bundle;
    if (f.n) o["n"] = *f.n;
    if (f.m) o["m"] = *f.m;
    if (f.delta) o["delta"] = *f.delta;
    if (f.step) o["step"] = *f.step;
    if (f.sigma_max) o["sigma_max"] = *f.sigma_max;
    if (f.p_max) o["p_max"] = *f.p_max;
    if (f.seed) o["seed"] = *f.seed;
    if (f.samples) o["samples"] = *f.samples;
    if (f.out) o["out"] = *f.out;
    if (f.mutation) o["mutation"] = *f.mutation;
    if (f.timing) o["timing"] = true;
    return o;
}

void summarize(const berger::CommandResult& res, const std::string& out_dir) {
    for (const auto& c : res.report.claims) {
        const char* tag = c.status == berger::ClaimStatus::pass   ? "PASS"
                          : c.status == berger::ClaimStatus::fail ? "FAIL"
                                                                  : "N/A ";
        if (c.status == berger::ClaimStatus::inapplicable)
            std::printf("%s  %-34s %s\n", tag, c.id.c_str(), c.note.c_str());
        else
            std::printf("%s  %-34s residual=%.3e %s %.1e\n", tag, c.id.c_str(), c.residual,
                        c.comparison.c_str(), c.tolerance);
    }
    for (const auto& f : res.files) std::printf("wrote %s/%s\n", out_dir.c_str(), f.c_str());
    std::fflush(stdout);
    const auto failed = res.report.failed_claims();
    if (!failed.empty()) {
        std::fprintf(stderr, "failed anchors:\n");
        for (const auto& c : res.report.claims)
            if (c.status == berger::ClaimStatus::fail)
                std::fprintf(stderr, "  %s: %s\n", c.id.c_str(), c.anchor.c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesics of deformed Sasaki metrics over complex space forms"};
    app.require_subcommand(1);
    Flags flags;
    for (const char* name : {"verify-connection", "integrate", "curvatures", "theorems"})
        add_flags(app.add_subcommand(name), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    berger::ExperimentConfig config;
    try {
        config = berger::load_config_file(flags.config, overrides(flags));
    } catch (const berger::ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        for (const auto& k : e.keys()) std::cerr << "  offending key: " << k << "\n";
        return 2;
    } catch (const berger::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        const berger::CommandResult res = berger::run_command(command, config);
        summarize(res, config.out_dir);
        return res.exit_code;
    } catch (const berger::InfeasibleSpeed& e) {
        std::cerr << "infeasible initial speed: " << e.what() << "\n";
    } catch (const berger::DegenerateProjection& e) {
        std::cerr << "degenerate projection: " << e.what() << "\n";
    } catch (const berger::IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << " (last good sigma "
                  << e.last_good_sigma() << ")\n";
    } catch (const berger::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}
