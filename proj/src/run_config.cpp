#include "knn/run_config.hpp"

#include <algorithm>
#include <stdexcept>

namespace knn {

namespace {

const char* format_name(OutputFormat f) {
    switch (f) {
    case OutputFormat::Csv:
        return "csv";
    case OutputFormat::Json:
        return "json";
    case OutputFormat::Default:
        break;
    }
    return "default";
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv")
        return OutputFormat::Csv;
    if (s == "json")
        return OutputFormat::Json;
    if (s == "default" || s.empty())
        return OutputFormat::Default;
    throw std::invalid_argument("unknown output format: " + s);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key))
        into = j.at(key).get<T>();
}

}  // namespace

std::vector<std::string> subcommand_names() {
    return {"analytic", "mc", "sweep", "curvature", "regge", "invert"};
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["manifold"] = {{"kind", manifold}, {"params", params}};
    j["k"] = k;
    j["N"] = N;
    j["trials"] = trials;
    j["seed"] = seed;
    j["streams"] = streams;
    j["alpha"] = alpha;
    j["output"] = output;
    j["format"] = format_name(format);
    j["fit"] = fit;
    j["nuisance"] = nuisance;
    j["order"] = order;
    j["jet"] = {{"K", jet.K},
                {"lap_K", jet.lap_K},
                {"grad_K_sq", jet.grad_K_sq},
                {"bilap_K", jet.bilap_K}};
    j["off"] = off_path;
    j["quad_rel_tol"] = tolerances.quad_rel_tol;
    j["ode_rel_tol"] = tolerances.ode_rel_tol;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw std::invalid_argument("config: top level must be a JSON object");
    static const std::vector<std::string> known{
        "subcommand", "manifold", "k",     "N",   "trials", "seed",         "streams",
        "alpha",      "output",   "format", "fit", "nuisance", "order",     "jet",
        "off",        "quad_rel_tol", "ode_rel_tol"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    RunConfig c;
    try {
        read(j, "subcommand", c.subcommand);
        if (j.contains("manifold")) {
            const auto& m = j.at("manifold");
            if (m.is_string()) {
                c.manifold = m.get<std::string>();
            } else {
                read(m, "kind", c.manifold);
                if (m.contains("params"))
                    c.params = m.at("params").get<std::map<std::string, double>>();
            }
        }
        read(j, "k", c.k);
        read(j, "N", c.N);
        read(j, "trials", c.trials);
        read(j, "seed", c.seed);
        read(j, "streams", c.streams);
        read(j, "alpha", c.alpha);
        read(j, "output", c.output);
        if (j.contains("format"))
            c.format = parse_format(j.at("format").get<std::string>());
        read(j, "fit", c.fit);
        read(j, "nuisance", c.nuisance);
        read(j, "order", c.order);
        if (j.contains("jet")) {
            const auto& t = j.at("jet");
            read(t, "K", c.jet.K);
            read(t, "lap_K", c.jet.lap_K);
            read(t, "grad_K_sq", c.jet.grad_K_sq);
            read(t, "bilap_K", c.jet.bilap_K);
        }
        read(j, "off", c.off_path);
        read(j, "quad_rel_tol", c.tolerances.quad_rel_tol);
        read(j, "ode_rel_tol", c.tolerances.ode_rel_tol);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

void RunConfig::validate() const {
    const auto subs = subcommand_names();
    if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
        throw std::invalid_argument("unknown subcommand: " + subcommand);
    if (k.empty() || N.empty())
        throw std::invalid_argument("k and N lists must not be empty");
    for (long long kk : k)
        if (kk < 1)
            throw std::invalid_argument("k values must be >= 1");
    for (long long n : N)
        if (n < 1)
            throw std::invalid_argument("N values must be >= 1");
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
    if (streams < 1)
        throw std::invalid_argument("streams must be >= 1");
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (!(tolerances.quad_rel_tol > 0.0) || !(tolerances.ode_rel_tol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (fit && alpha != 1.0)
        throw std::invalid_argument("--fit needs alpha = 1 (the reduced variable is a first moment)");
}

OutputFormat RunConfig::resolved_format() const {
    if (format != OutputFormat::Default)
        return format;
    return (subcommand == "mc" || subcommand == "sweep") ? OutputFormat::Csv : OutputFormat::Json;
}

}  // namespace knn
