#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "berger/experiment.hpp"

namespace berger {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "bundle",  "n",       "m",       "delta",   "step",       "sigma_max",      "sample_stride",
    "seed",    "p_max",   "samples", "sweep",   "profile_stride", "xi_norm",    "out",
    "mutation", "timing", "renormalize", "tolerances", "initial"};

const std::set<std::string> kInitialKeys = {"xi", "xi_dot", "u_dir"};

json tolerances_json(const Tolerances& t) {
    return json{{"connection", t.connection},
                {"conservation", t.conservation},
                {"rate_t1m", t.rate_t1m},
                {"rate_tm_relative", t.rate_tm_relative},
                {"chain_relative", t.chain_relative},
                {"norm_constancy", t.norm_constancy},
                {"speed_identity", t.speed_identity},
                {"constancy", t.constancy},
                {"vanishing", t.vanishing},
                {"span", t.span},
                {"rank_tol", t.rank_tol},
                {"divergence", t.divergence}};
}

json vector_json(const FrameVector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

std::string mutation_name(ConnectionVariant v) {
    return v == ConnectionVariant::exact ? "none" : "vv-sign";
}

/// Collects every offending key before reporting.
class Parser {
public:
    explicit Parser(const json& doc) : doc_(doc) {}

    template <typename T>
    T get(const std::string& key, const json& from, const std::string& path) {
        try {
            return from.at(key).get<T>();
        } catch (const json::exception&) {
            bad(path.empty() ? key : path + "." + key);
            return T{};
        }
    }

    template <typename T>
    T get(const std::string& key) {
        return get<T>(key, doc_, "");
    }

    double number(const std::string& key, const json& from, const std::string& path = "") {
        const json& v = from.at(key);
        if (!v.is_number()) {
            bad(path.empty() ? key : path + "." + key);
            return 0.0;
        }
        return v.get<double>();
    }

    long long integer(const std::string& key) {
        const json& v = doc_.at(key);
        if (!v.is_number_integer()) {
            bad(key);
            return 0;
        }
        return v.get<long long>();
    }

    void bad(const std::string& key) {
        for (const auto& k : keys_)
            if (k == key) return;
        keys_.push_back(key);
    }

    void require(bool ok, const std::string& key) {
        if (!ok) bad(key);
    }

    [[nodiscard]] const std::vector<std::string>& keys() const { return keys_; }

private:
    const json& doc_;
    std::vector<std::string> keys_;
};

FrameVector parse_vector(Parser& p, const json& initial, const std::string& key, int n) {
    const json& v = initial.at(key);
    const std::string path = "initial." + key;
    if (!v.is_array()) {
        p.bad(path);
        return {};
    }
    FrameVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            p.bad(path);
            return {};
        }
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    if (out.size() != 2 * n || !out.allFinite()) p.bad(path);
    return out;
}

} // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["bundle"] = to_string(flow.bundle);
    j["n"] = flow.model.n;
    j["m"] = flow.model.m;
    j["delta"] = flow.params.delta;
    j["step"] = flow.step;
    j["sigma_max"] = flow.sigma_max;
    j["sample_stride"] = flow.sample_stride;
    j["seed"] = flow.seed;
    j["renormalize"] = flow.renormalize;
    j["p_max"] = p_max;
    j["samples"] = samples;
    j["sweep"] = sweep;
    j["profile_stride"] = profile_stride;
    j["xi_norm"] = xi_norm;
    j["out"] = out_dir;
    j["mutation"] = mutation_name(mutation);
    j["timing"] = timing;
    j["tolerances"] = tolerances_json(tol);
    if (initial.random) {
        j["initial"] = "random";
    } else {
        j["initial"] = json{{"xi", vector_json(initial.xi)},
                            {"xi_dot", vector_json(initial.xi_dot)},
                            {"u_dir", vector_json(initial.u_dir)}};
    }
    return j;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.flow.bundle = Bundle::T1M;
    c.flow.model = {4, 4.0};
    c.flow.params = {0.5};
    c.flow.step = 1e-3;
    c.flow.sigma_max = 20.0;
    c.flow.sample_stride = 10;
    c.flow.seed = 0;
    return c;
}

ExperimentConfig load_config(const json& document, const json& overrides) {
    if (!document.is_null() && !document.is_object())
        throw UsageError("config document must be a JSON object");
    if (!overrides.is_object()) throw UsageError("overrides must be a JSON object");

    std::vector<std::string> unknown;
    for (const json* layer : {&document, &overrides}) {
        if (layer->is_null()) continue;
        for (auto it = layer->begin(); it != layer->end(); ++it) {
            if (!kTopKeys.count(it.key())) unknown.push_back(it.key());
        }
    }
    if (!unknown.empty()) throw ConfigError("unknown configuration keys", unknown);

    json merged = default_config().to_json();
    if (!document.is_null()) {
        for (auto it = document.begin(); it != document.end(); ++it) {
            if (it.key() == "tolerances" && it.value().is_object())
                for (auto t = it.value().begin(); t != it.value().end(); ++t)
                    merged["tolerances"][t.key()] = t.value();
            else
                merged[it.key()] = it.value();
        }
    }
    for (auto it = overrides.begin(); it != overrides.end(); ++it) merged[it.key()] = it.value();

    Parser p(merged);
    ExperimentConfig c = default_config();

    const auto bundle = p.get<std::string>("bundle");
    if (bundle == "TM") c.flow.bundle = Bundle::TM;
    else if (bundle == "T1M") c.flow.bundle = Bundle::T1M;
    else p.bad("bundle");

    c.flow.model.n = static_cast<int>(p.integer("n"));
    p.require(c.flow.model.n >= 1, "n");
    c.flow.model.m = p.number("m", merged);
    p.require(std::isfinite(c.flow.model.m), "m");
    c.flow.params.delta = p.number("delta", merged);
    p.require(std::isfinite(c.flow.params.delta) && c.flow.params.delta >= 0.0, "delta");
    c.flow.step = p.number("step", merged);
    p.require(std::isfinite(c.flow.step) && c.flow.step > 0.0, "step");
    c.flow.sigma_max = p.number("sigma_max", merged);
    p.require(std::isfinite(c.flow.sigma_max) && c.flow.sigma_max > 0.0, "sigma_max");
    p.require(c.flow.step <= c.flow.sigma_max, "step");
    c.flow.sample_stride = static_cast<int>(p.integer("sample_stride"));
    p.require(c.flow.sample_stride >= 1, "sample_stride");
    const long long seed = p.integer("seed");
    p.require(seed >= 0, "seed");
    c.flow.seed = static_cast<std::uint64_t>(seed);
    c.flow.renormalize = p.get<bool>("renormalize");

    c.p_max = static_cast<int>(p.integer("p_max"));
    p.require(c.p_max >= 2, "p_max");
    c.samples = static_cast<int>(p.integer("samples"));
    p.require(c.samples >= 1, "samples");
    c.sweep = static_cast<int>(p.integer("sweep"));
    p.require(c.sweep >= 1, "sweep");
    c.profile_stride = static_cast<int>(p.integer("profile_stride"));
    p.require(c.profile_stride >= 1, "profile_stride");
    c.xi_norm = p.number("xi_norm", merged);
    p.require(std::isfinite(c.xi_norm) && c.xi_norm > 0.0, "xi_norm");
    c.out_dir = p.get<std::string>("out");
    p.require(!c.out_dir.empty(), "out");
    const auto mutation = p.get<std::string>("mutation");
    if (mutation == "none") c.mutation = ConnectionVariant::exact;
    else if (mutation == "vv-sign") c.mutation = ConnectionVariant::flipped_vv_sign;
    else p.bad("mutation");
    c.timing = p.get<bool>("timing");

    const json& tol = merged.at("tolerances");
    if (!tol.is_object()) {
        p.bad("tolerances");
    } else {
        const json defaults = tolerances_json(Tolerances{});
        for (auto it = tol.begin(); it != tol.end(); ++it)
            if (!defaults.contains(it.key())) p.bad("tolerances." + it.key());
        auto read = [&](const char* key, double& field) {
            if (!tol.contains(key)) return;
            field = p.number(key, tol, "tolerances");
            p.require(std::isfinite(field) && field > 0.0, std::string("tolerances.") + key);
        };
        read("connection", c.tol.connection);
        read("conservation", c.tol.conservation);
        read("rate_t1m", c.tol.rate_t1m);
        read("rate_tm_relative", c.tol.rate_tm_relative);
        read("chain_relative", c.tol.chain_relative);
        read("norm_constancy", c.tol.norm_constancy);
        read("speed_identity", c.tol.speed_identity);
        read("constancy", c.tol.constancy);
        read("vanishing", c.tol.vanishing);
        read("span", c.tol.span);
        read("rank_tol", c.tol.rank_tol);
        read("divergence", c.tol.divergence);
    }

    const json& init = merged.at("initial");
    if (init.is_string()) {
        if (init.get<std::string>() != "random") p.bad("initial");
        c.initial.random = true;
    } else if (init.is_object()) {
        c.initial.random = false;
        for (auto it = init.begin(); it != init.end(); ++it)
            if (!kInitialKeys.count(it.key())) p.bad("initial." + it.key());
        for (const char* key : {"xi", "xi_dot", "u_dir"})
            if (!init.contains(key)) p.bad(std::string("initial.") + key);
        if (c.flow.model.n >= 1) {
            const int n = c.flow.model.n;
            if (init.contains("xi")) c.initial.xi = parse_vector(p, init, "xi", n);
            if (init.contains("xi_dot")) c.initial.xi_dot = parse_vector(p, init, "xi_dot", n);
            if (init.contains("u_dir")) c.initial.u_dir = parse_vector(p, init, "u_dir", n);
            if (c.initial.xi.size() > 0 && c.initial.xi.norm() == 0.0) p.bad("initial.xi");
        }
    } else {
        p.bad("initial");
    }

    if (!p.keys().empty()) {
        std::ostringstream msg;
        msg << "invalid configuration values:";
        for (const auto& k : p.keys()) msg << ' ' << k;
        throw ConfigError(msg.str(), p.keys());
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path, const json& overrides) {
    if (path.empty()) return load_config(json::object(), overrides);
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("malformed config file '" + path + "': " + e.what());
    }
    return load_config(doc, overrides);
}

InitialData random_initial_data(int n, const BergerParams& params, Bundle bundle, double xi_norm,
                                Rng& rng) {
    InitialData data;
    data.random = true;
    data.xi = random_unit(rng, n);
    FrameVector w = random_gaussian(rng, n);
    w -= w.dot(data.xi) * data.xi;
    const double lambda_sq_target = random_uniform(rng, 0.05, 0.8);
    const double d2 = params.delta * params.delta;
    const double mu = w.dot(apply_J(data.xi));
    const double lambda_sq = w.squaredNorm() + d2 * mu * mu;
    data.xi_dot = std::sqrt(lambda_sq_target / lambda_sq) * w;
    data.u_dir = random_unit(rng, n);
    if (bundle == Bundle::TM) data.xi *= xi_norm;
    return data;
}

InitialState initial_state(const ExperimentConfig& config) {
    if (config.initial.random) {
        Rng rng(config.flow.seed);
        const InitialData d = random_initial_data(config.flow.model.n, config.flow.params,
                                                  config.flow.bundle, config.xi_norm, rng);
        return prepare_initial(d.xi, d.xi_dot, d.u_dir, config.flow.params, config.flow.bundle);
    }
    return prepare_initial(config.initial.xi, config.initial.xi_dot, config.initial.u_dir,
                           config.flow.params, config.flow.bundle);
}

} // namespace berger
