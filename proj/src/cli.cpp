#include "knn/cli.hpp"

#include "knn/catalog.hpp"
#include "knn/manifold.hpp"
#include "knn/mc.hpp"
#include "knn/quadrature.hpp"
#include "knn/regge.hpp"
#include "knn/series.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace knn {

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string json_scalar_text(const nlohmann::json& v) {
    if (v.is_number_float())
        return num(v.get<double>());
    if (v.is_string())
        return v.get<std::string>();
    return v.dump();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int surface_dimension(const Manifold& m) { return m.dimension(); }

// Coefficient of 1/N in the reduced mean for the manifold, when the theory gives one.
std::optional<double> expected_c1(const Manifold& m, long long k) {
    if (m.kind() == ManifoldKind::FlatTorusD) {
        const double d = m.dimension();
        return -(1.0 / d + 1.0 / (d * d)) / 2.0;
    }
    if (m.kind() == ManifoldKind::Polyhedron)
        return std::nullopt;  // the smooth-surface value is not expected on polyhedra
    return subleading_coeff(k, TopologyInfo::from_chi(m.chi()));
}

void check_grid(const RunConfig& cfg) {
    for (long long k : cfg.k)
        for (long long n : cfg.N)
            if (n < k)
                throw std::invalid_argument("every N must be >= every k (got k=" +
                                            std::to_string(k) + ", N=" + std::to_string(n) + ")");
}

Report run_analytic(const RunConfig& cfg) {
    const Manifold m = make_manifold(cfg.manifold, cfg.params);
    check_grid(cfg);
    std::optional<AreaInverseFn> inverse = m.area_inverse();
    const bool flat_kind = m.kind() == ManifoldKind::FlatTorus2D ||
                           m.kind() == ManifoldKind::SphereChord ||
                           m.kind() == ManifoldKind::FlatTorusD;
    if (m.kind() == ManifoldKind::FlatTorusD)
        inverse = closed_area_inverse("flat-d", m.dimension());
    if (!inverse)
        throw std::invalid_argument("analytic: no closed-form disc area for manifold " +
                                    cfg.manifold);
    Report rep;
    for (long long k : cfg.k) {
        for (long long n : cfg.N) {
            const MomentSpec ms{k, n, cfg.alpha};
            std::optional<double> series_value;
            if (cfg.alpha == 1.0) {
                ResultRow s{"series", m.name(), k, n, cfg.alpha, 0.0, 0.0, cfg.seed, {}, ""};
                if (m.kind() == ManifoldKind::SphereGeodesic) {
                    const SphereSum sum = sphere_mean_exact(ms);
                    s.value = sum.value;
                    s.uncertainty = std::abs(sum.tail_estimate);
                    s.extras["terms"] = static_cast<double>(sum.terms);
                    s.note = "arcsine series";
                } else {
                    s.value = flat_mean(DimensionSpec{m.dimension()}, ms);
                    s.note = "flat formula";
                }
                series_value = s.value;
                rep.rows.push_back(std::move(s));
            }
            const MomentResult q = moment_from_area_inverse(*inverse, ms);
            ResultRow r{"quadrature", m.name(), k, n, cfg.alpha, q.value, q.error, cfg.seed, {}, ""};
            r.note = inverse->name;
            if (series_value)
                r.extras["agreement"] = std::abs(q.value - *series_value);
            if (flat_kind && m.kind() != ManifoldKind::FlatTorusD) {
                AreaInverseFn truth = m.kind() == ManifoldKind::FlatTorus2D
                                          ? closed_area_inverse("flat-torus-2d")
                                          : *inverse;
                r.extras["remainder_bound"] = remainder_bound(truth, m.flatness(), ms);
            } else if (m.kind() == ManifoldKind::FlatTorusD) {
                // The flat inverse is exact below l0; only the bound speaks for the torus.
                r.extras["remainder_bound"] = remainder_bound(*inverse, m.flatness(), ms);
            }
            rep.rows.push_back(std::move(r));
        }
    }
    return rep;
}

Report run_mc(const RunConfig& cfg, bool sweep) {
    const Manifold m = make_manifold(cfg.manifold, cfg.params);
    check_grid(cfg);
    if (sweep && cfg.fit) {
        long long lo = *std::min_element(cfg.N.begin(), cfg.N.end());
        long long hi = *std::max_element(cfg.N.begin(), cfg.N.end());
        if (static_cast<double>(hi) < 10.0 * static_cast<double>(lo))
            throw std::invalid_argument("sweep --fit: the N grid must span at least a decade");
    }
    const int k_max = static_cast<int>(*std::max_element(cfg.k.begin(), cfg.k.end()));
    const double gamma = 1.0 / m.dimension();
    const double c0 = flat_leading_coefficient(surface_dimension(m));

    std::map<long long, ScalingEstimate> scaling;
    for (long long k : cfg.k)
        scaling[k] = ScalingEstimate{k, gamma, c0, {}, std::nullopt};

    Report rep;
    for (long long n : cfg.N) {
        SampleConfig sc;
        sc.N = n;
        sc.k_max = k_max;
        sc.alpha = cfg.alpha;
        sc.trials = cfg.trials;
        sc.seed = seed_for(cfg.seed, n);
        sc.streams = cfg.streams;
        const Accumulator acc = estimate_moments(m, sc);
        for (long long k : cfg.k) {
            ResultRow r{"mc", m.name(), k, n, cfg.alpha, acc.mean(static_cast<int>(k)),
                        acc.stderr_of_mean(static_cast<int>(k)), cfg.seed, {}, ""};
            if (cfg.alpha == 1.0) {
                auto& se = scaling[k];
                se.add(n, r.value, r.uncertainty);
                r.extras["reduced"] = se.points.back().reduced;
                r.extras["reduced_stderr"] = se.points.back().reduced_stderr;
            }
            rep.rows.push_back(std::move(r));
        }
    }
    rep.summary["trials_per_N"] = cfg.trials;
    if (sweep && cfg.fit) {
        bool first = true;
        for (long long k : cfg.k) {
            const SubleadingFit fit = fit_subleading(scaling[k], cfg.nuisance);
            const std::string tag = "_k" + std::to_string(k);
            rep.summary["fitted_c1" + tag] = fit.c1;
            rep.summary["fitted_c1_stderr" + tag] = fit.c1_stderr;
            if (fit.c2) {
                rep.summary["fitted_c2" + tag] = *fit.c2;
                rep.summary["fitted_c2_stderr" + tag] = *fit.c2_stderr;
            }
            if (auto e = expected_c1(m, k))
                rep.summary["expected_c1" + tag] = *e;
            if (first) {
                rep.summary["fitted_c1"] = fit.c1;
                rep.summary["fitted_c1_stderr"] = fit.c1_stderr;
                first = false;
            }
        }
    }
    return rep;
}

Report run_curvature(const RunConfig& cfg) {
    const PatchAtlas atlas = make_atlas(cfg.manifold, cfg.params);
    const int order = std::clamp(cfg.order, 0, 3);
    Report rep;
    rep.summary["area"] = atlas_area(atlas, cfg.tolerances.quad_rel_tol);
    const double chi = gauss_bonnet_chi(atlas, cfg.tolerances);
    rep.summary["chi"] = chi;
    rep.summary["declared_chi"] = atlas.declared_chi;
    const PowerSeries avg = surface_average_series(atlas, order, cfg.tolerances);
    for (std::size_t j = 0; j < avg.coeffs.size(); ++j)
        rep.summary["c" + std::to_string(j)] = avg.coeffs[j];
    if (avg.coeffs.size() > 1) {
        rep.summary["w_coefficient"] = avg.coeffs[1] / avg.coeffs[0];
        rep.summary["chi_over_12"] = chi / 12.0;
    }
    return rep;
}

Report run_regge(const RunConfig& cfg) {
    PolyhedralSurface p;
    if (!cfg.off_path.empty()) {
        std::ifstream in(cfg.off_path);
        if (!in)
            throw std::invalid_argument("cannot open OFF file: " + cfg.off_path);
        p = read_off(in, cfg.off_path);
    } else if (cfg.manifold == "cube") {
        p = make_cube();
    } else if (cfg.manifold == "tetrahedron") {
        p = make_tetrahedron();
    } else if (cfg.manifold == "flat-torus-mesh") {
        auto it = cfg.params.find("n");
        p = make_flat_torus_mesh(it == cfg.params.end() ? 4 : static_cast<int>(it->second));
    } else {
        throw std::invalid_argument("regge: unknown polyhedron " + cfg.manifold +
                                    " (use cube, tetrahedron, flat-torus-mesh or --off)");
    }
    const EulerResult e = deficit_and_euler(p);
    Report rep;
    rep.summary["V"] = e.V;
    rep.summary["E"] = e.E;
    rep.summary["F"] = e.F;
    rep.summary["chi_combinatorial"] = e.chi_combinatorial();
    rep.summary["chi_from_deficits"] = e.chi_from_deficits;
    rep.summary["deficit_sum"] = e.deficit_sum;
    const auto q = as_multiple_of_pi(e.deficit_sum);
    std::ostringstream frac;
    frac << q.numerator();
    if (q.denominator() != 1)
        frac << "/" << q.denominator();
    rep.summary["deficit_sum_over_pi"] = frac.str();
    if (p.declared_chi)
        rep.summary["declared_chi"] = *p.declared_chi;
    nlohmann::json deficits = nlohmann::json::array();
    for (const auto& v : e.vertices)
        deficits.push_back(v.deficit);
    rep.summary["deficits"] = deficits;
    return rep;
}

Report run_invert(const RunConfig& cfg) {
    auto it = cfg.params.find("dim");
    const int d = it == cfg.params.end() ? 2 : static_cast<int>(it->second);
    const AreaPolynomial area =
        d == 2 ? area_series_from_curvature(cfg.jet, cfg.order) : flat_area_polynomial(d);
    const PowerSeries s = invert_area_series(area);
    Report rep;
    rep.summary["gamma"] = s.gamma;
    rep.summary["step"] = s.step;
    for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
        rep.summary["c" + std::to_string(j)] = s.coeffs[j];
        rep.summary["c" + std::to_string(j) + "_over_c0"] = s.coeffs[j] / s.coeffs[0];
    }
    return rep;
}

void write_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move output into place: " + ec.message());
    }
}

}  // namespace

std::uint64_t seed_for(std::uint64_t base, long long N) {
    return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(N)));
}

Report run(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.subcommand == "analytic")
        return run_analytic(cfg);
    if (cfg.subcommand == "mc")
        return run_mc(cfg, false);
    if (cfg.subcommand == "sweep")
        return run_mc(cfg, true);
    if (cfg.subcommand == "curvature")
        return run_curvature(cfg);
    if (cfg.subcommand == "regge")
        return run_regge(cfg);
    if (cfg.subcommand == "invert")
        return run_invert(cfg);
    throw std::invalid_argument("unknown subcommand: " + cfg.subcommand);
}

std::string render(const Report& r, OutputFormat format) {
    if (format == OutputFormat::Json) {
        nlohmann::json j;
        j["schema"] = kSchemaVersion;
        j["rows"] = nlohmann::json::array();
        for (const auto& row : r.rows) {
            nlohmann::json o{{"engine", row.engine}, {"manifold", row.manifold},
                             {"k", row.k},           {"N", row.N},
                             {"alpha", row.alpha},   {"value", row.value},
                             {"uncertainty", row.uncertainty}, {"seed", row.seed}};
            for (const auto& [key, v] : row.extras)
                o[key] = v;
            if (!row.note.empty())
                o["note"] = row.note;
            j["rows"].push_back(std::move(o));
        }
        j["summary"] = r.summary;
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "schema=" << kSchemaVersion << "\n";
    out << "engine,manifold,k,N,alpha,value,uncertainty,seed,note\n";
    for (const auto& row : r.rows) {
        std::string note = row.note;
        for (const auto& [key, v] : row.extras) {
            if (!note.empty())
                note += ";";
            note += key + "=" + num(v);
        }
        out << row.engine << "," << csv_field(row.manifold) << "," << row.k << "," << row.N << ","
            << num(row.alpha) << "," << num(row.value) << "," << num(row.uncertainty) << ","
            << row.seed << "," << csv_field(note) << "\n";
    }
    for (const auto& [key, v] : r.summary.items())
        out << "#summary," << key << "," << csv_field(json_scalar_text(v)) << "\n";
    return out.str();
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"k-nearest-neighbour distance scaling on closed manifolds"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::vector<std::string> param_args;
    std::string format_arg;
    std::string config_path;
    bool streams_given = false;

    const std::map<std::string, std::string> blurb{
        {"analytic", "series and quadrature means for closed-form manifolds"},
        {"mc", "Monte Carlo moments of the k-th neighbour distance"},
        {"sweep", "Monte Carlo over an N grid, optionally fitting the 1/N term"},
        {"curvature", "Gauss-Bonnet and surface-averaged inverse-area series of an atlas"},
        {"regge", "deficit angles and Euler characteristic of a polyhedral surface"},
        {"invert", "inverse-area series from a curvature jet or a flat ball"},
    };
    for (const auto& name : subcommand_names()) {
        auto it = blurb.find(name);
        CLI::App* sub = app.add_subcommand(name, it == blurb.end() ? std::string() : it->second);
        sub->add_option("--manifold", cfg.manifold, "manifold or surface name");
        sub->add_option("--param", param_args, "manifold parameter key=value (repeatable)");
        sub->add_option("--k", cfg.k, "neighbour ranks, comma separated")->delimiter(',');
        sub->add_option("--n", cfg.N, "site counts, comma separated")->delimiter(',');
        sub->add_option("--trials", cfg.trials, "Monte Carlo trials per N");
        sub->add_option("--seed", cfg.seed, "base random seed");
        sub->add_option_function<int>(
            "--streams",
            [&](const int& s) {
                cfg.streams = s;
                streams_given = true;
            },
            "worker streams (default: KNN_WORKERS or 1)");
        sub->add_option("--alpha", cfg.alpha, "moment order");
        sub->add_option("--output", cfg.output, "output file (default: standard output)");
        sub->add_option("--format", format_arg, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--fit", cfg.fit, "fit the 1/N coefficient (sweep)");
        sub->add_flag("--nuisance", cfg.nuisance, "add a 1/N^2 term to the fit");
        sub->add_option("--order", cfg.order,
                        "series order: l-power 2..8 for invert, last coefficient 0..3 for curvature");
        sub->add_option("--K", cfg.jet.K, "Gaussian curvature (invert)");
        sub->add_option("--lap-K", cfg.jet.lap_K, "Laplacian of K (invert)");
        sub->add_option("--grad-K-sq", cfg.jet.grad_K_sq, "squared gradient of K (invert)");
        sub->add_option("--bilap-K", cfg.jet.bilap_K, "bi-Laplacian of K (invert)");
        sub->add_option("--dim", [&](const CLI::results_t& res) {
            cfg.params["dim"] = std::stod(res.at(0));
            return true;
        }, "dimension (flat-torus-d, invert)");
        sub->add_option("--off", cfg.off_path, "OFF mesh file (regge)");
        sub->add_option("--quad-rel-tol", cfg.tolerances.quad_rel_tol, "quadrature tolerance");
        sub->add_option("--ode-rel-tol", cfg.tolerances.ode_rel_tol, "geodesic ODE tolerance");
        sub->add_option("--config", config_path, "JSON config; its keys override flags");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg.subcommand = app.get_subcommands().front()->get_name();
        for (const auto& p : param_args) {
            const auto eq = p.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::invalid_argument("--param expects key=value, got " + p);
            try {
                cfg.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
            } catch (const std::logic_error&) {
                throw std::invalid_argument("--param value is not a number: " + p);
            }
        }
        if (!format_arg.empty())
            cfg.format = format_arg == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        if (!streams_given) {
            if (const char* env = std::getenv("KNN_WORKERS")) {
                try {
                    cfg.streams = std::stoi(env);
                } catch (const std::logic_error&) {
                    throw std::invalid_argument("KNN_WORKERS must be a positive integer");
                }
            }
        }
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw std::invalid_argument("cannot open config file: " + config_path);
            nlohmann::json file;
            try {
                file = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
            }
            nlohmann::json merged = cfg.to_json();
            merged.update(file);
            cfg = RunConfig::from_json(merged);
        }
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        const Report rep = run(cfg);
        const std::string text = render(rep, cfg.resolved_format());
        if (cfg.output.empty())
            out << text;
        else
            write_atomically(cfg.output, text);
        return 0;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace knn
