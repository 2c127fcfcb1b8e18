// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// pamctl: command-line front end for lattice and continuum campaigns.
// Exit codes: 0 success, 1 invalid model or failed check, 2 I/O or config errors.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pam/analysis.hpp"
#include "pam/continuum.hpp"
#include "pam/greens.hpp"
#include "pam/io.hpp"
#include "pam/kernel.hpp"
#include "pam/odeclass.hpp"
#include "pam/sde.hpp"
#include "pam/svg.hpp"

namespace fs = std::filesystem;
using pam::io::json;

namespace {

struct Common {
    std::string model = "srw1";
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir = "out";
};

void add_common(CLI::App* app, Common& c, bool with_model = true)
{
    if (with_model) app->add_option("--model", c.model, "Built-in model (srw1..srw4) or model-v1 JSON file");
    app->add_option("--config", c.config, "Configuration file (see --help-config)");
    app->add_option("--seed", c.seed, "Master seed (overrides config)");
    app->add_option("--threads", c.threads, "Worker threads (0 = all cores); output does not depend on it");
    app->add_option("--out-dir", c.out_dir, "Output directory");
}

pam::io::Config load_config(const Common& c)
{
    return c.config.empty() ? pam::io::Config{} : pam::io::Config::load(c.config);
}

/// --model wins over [model] name/file in the config.
std::string model_source(const Common& c, const pam::io::Config& cfg, bool model_given)
{
    if (model_given) return c.model;
    if (cfg.has("model", "file")) {
        fs::path p = cfg.get("model", "file", "");
        if (p.is_relative() && !c.config.empty()) p = fs::path(c.config).parent_path() / p;
        return p.string();
    }
    return cfg.get("model", "name", c.model.c_str());
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

json fit_to_json(const pam::DecayFit& f)
{
    return {{"law", f.law == pam::DecayLaw::CubeRoot ? "d1" : "d2"},
            {"v", f.v},
            {"vSe", f.v_se},
            {"intercept", f.intercept},
            {"ci", {f.ci.lo, f.ci.hi}},
            {"level", f.level},
            {"ciExcludesZero", f.ci_excludes_zero()},
            {"points", f.points}};
}

std::string moments_csv(const pam::MomentSeries& mean, const pam::MomentSeries& frac)
{
    std::ostringstream os;
    os.precision(17);
    os << "t,mean_mass,mean_mass_se,moment,moment_se\n";
    for (std::size_t i = 0; i < mean.times.size(); ++i)
        os << mean.times[i] << ',' << mean.estimates[i] << ',' << mean.se[i] << ',' << frac.estimates[i] << ','
           << frac.se[i] << '\n';
    return os.str();
}

std::string trajectories_csv(const std::vector<pam::MassTrajectory>& trs)
{
    std::ostringstream os;
    pam::write_trajectory_csv(os, trs);
    return os.str();
}

std::string moment_chart(const pam::MomentSeries& s, const std::string& title)
{
    pam::svg::Chart c;
    c.title = title;
    c.x_label = "t";
    c.y_label = "E[m_t^" + fmt(s.eta) + "]";
    c.log_x = true;
    c.log_y = true;
    pam::svg::Series line{"estimate", s.times, s.estimates, s.se};
    c.series.push_back(line);
    return pam::svg::render(c);
}

/// Mean-mass and decay summary shared by simulate and continuum.
json campaign_summary(const std::vector<pam::MassTrajectory>& trs, double eta, pam::DecayLaw law)
{
    std::vector<double> final_mass;
    std::uint64_t clamps = 0;
    std::size_t overflow = 0, extinct = 0;
    for (const auto& t : trs) {
        final_mass.push_back(t.mass.back());
        clamps += t.clamp_count;
        overflow += t.box_overflow ? 1 : 0;
        extinct += t.extinct_at >= 0.0 ? 1 : 0;
    }
    json j;
    j["replicas"] = trs.size();
    j["initialMass"] = trs.front().mass.front();
    j["finalMassMean"] = pam::stats::mean(final_mass);
    j["finalMassSe"] = trs.size() > 1 ? pam::stats::standard_error(final_mass) : 0.0;
    j["clampCount"] = clamps;
    j["boundaryFlagged"] = overflow;
    j["extinct"] = extinct;
    if (trs.size() >= 2 && trs.front().times.back() >= 10.0) {
        try {
            j["decayFit"] = fit_to_json(pam::fit_decay_replicas(trs, eta, law, 1.0, 0.95));
        } catch (const pam::Error& e) {
            j["decayFit"] = {{"error", e.what()}};
        }
    }
    return j;
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

int cmd_validate(const std::string& spec)
{
    try {
        const auto m = pam::io::load_model(spec);
        const auto& tau = m.tau;
        std::cout << "model " << spec << ": valid\n"
                  << "  dimension      " << tau.dim() << "\n"
                  << "  support size   " << tau.jumps().size() << "\n"
                  << "  range R0       " << tau.range() << "\n"
                  << "  self loop      " << tau.self_loop() << "\n"
                  << "  symmetric      " << (tau.symmetric() ? "yes" : "no") << "\n"
                  << "  max coord var  " << tau.max_coordinate_variance() << "\n"
                  << "  transient      " << (tau.dim() >= 3 ? "yes" : "no") << "\n"
                  << "  sigma          " << pam::io::nonlinearity_to_json(m.sigma).dump() << "\n"
                  << "  hash           " << pam::io::model_hash(m) << "\n";
        return 0;
    } catch (const pam::Error& e) {
        std::cerr << "invalid model: " << e.what() << "\n";
        return e.kind() == pam::ErrorKind::Io ? 2 : 1;
    }
}

struct SimulateArgs {
    std::optional<double> lambda, horizon, dt;
    std::optional<std::size_t> replicas;
    std::optional<double> eta;
};

int cmd_simulate(const Common& c, bool model_given, const SimulateArgs& a)
{
    const auto cfg = load_config(c);
    const auto source = model_source(c, cfg, model_given);
    const auto model = pam::io::load_model(source);
    auto p = pam::io::sim_params_from(cfg, "simulate");
    if (c.seed) p.seed = *c.seed;
    if (a.lambda) p.lambda = *a.lambda;
    if (a.horizon) p.horizon = *a.horizon;
    if (a.dt) p.dt = *a.dt;
    if (a.replicas) p.replicas = *a.replicas;
    const double eta = a.eta.value_or(cfg.get("simulate", "eta", 0.5));

    pam::io::Manifest man("simulate", p.seed);
    man.set_model(model, source);
    auto params = pam::io::sim_params_to_json(p);
    params["eta"] = eta;
    man.set_params(params);

    const auto trs = pam::simulate_campaign(p, model, c.threads);
    const auto mean = pam::fractional_moment(trs, 1.0);
    const auto frac = pam::fractional_moment(trs, eta);
    const fs::path out = c.out_dir;
    man.write_output(out, "trajectories.csv", trajectories_csv(trs));
    if (trs.size() >= 2) {
        man.write_output(out, "moments.csv", moments_csv(mean, frac));
        man.write_output(out, "moments.svg", moment_chart(frac, "fractional moment"));
    }
    const auto law = model.tau.dim() == 2 ? pam::DecayLaw::SqrtLog : pam::DecayLaw::CubeRoot;
    auto summary = campaign_summary(trs, eta, law);
    man.write_output(out, "summary.json", summary.dump(2) + "\n");
    man.save(out, "manifest-simulate.json");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct SweepArgs {
    std::string lambdas;
    std::optional<int> dim;
    std::optional<double> threshold, horizon, dt;
    std::optional<std::size_t> replicas;
};

int cmd_sweep(const Common& c, bool model_given, const SweepArgs& a)
{
    const auto cfg = load_config(c);
    std::string source = a.dim ? "srw" + std::to_string(*a.dim) : model_source(c, cfg, model_given);
    const auto model = pam::io::load_model(source);
    pam::SimParams p;
    p.horizon = 20.0;
    p.dt = 0.05;
    p.replicas = 200;
    p.scheme = model.sigma.is_linear() ? pam::Scheme::MultiplicativeSplit : pam::Scheme::EulerMaruyama;
    p.box = pam::BoxPolicy::growth();
    p.extinction_mass = 1e-6;
    p = pam::io::sim_params_from(cfg, "sweep", p);
    if (c.seed) p.seed = *c.seed;
    if (a.horizon) p.horizon = *a.horizon;
    if (a.dt) p.dt = *a.dt;
    if (a.replicas) p.replicas = *a.replicas;
    const double threshold = a.threshold.value_or(cfg.get("sweep", "threshold", 0.25 * p.c0));
    const auto lambdas = a.lambdas.empty() ? cfg.get_list("sweep", "lambdas", {0.5, 1.0, 2.0, 4.0, 8.0})
                                           : pam::io::Config::parse_list(a.lambdas);

    pam::io::Manifest man("sweep", p.seed);
    man.set_model(model, source);
    auto params = pam::io::sim_params_to_json(p);
    params["lambdas"] = lambdas;
    params["threshold"] = threshold;
    man.set_params(params);

    const auto s = pam::survival_sweep(model, p, lambdas, threshold, c.threads);
    std::ostringstream csv;
    csv.precision(17);
    csv << "lambda,survival,survival_se,laplace,laplace_se\n";
    for (std::size_t i = 0; i < s.lambdas.size(); ++i)
        csv << s.lambdas[i] << ',' << s.survival[i] << ',' << s.survival_se[i] << ',' << s.laplace[i] << ','
            << s.laplace_se[i] << '\n';
    const fs::path out = c.out_dir;
    man.write_output(out, "sweep.csv", csv.str());

    json j;
    j["lambdas"] = s.lambdas;
    j["survival"] = s.survival;
    j["survivalSe"] = s.survival_se;
    j["laplace"] = s.laplace;
    j["laplaceSe"] = s.laplace_se;
    j["boundaryFlagged"] = s.overflow_count;
    j["lambdaC"] = number(s.lambda_c);
    if (s.lambdas.size() >= 3) {
        const auto mono = pam::laplace_monotonicity_test(s);
        j["laplaceMonotone"] = mono.pass;
        j["laplaceViolations"] = mono.violations.size();
    }
    if (model.tau.dim() >= 3) {
        try {
            pam::GreensOptions go;
            go.mc_replicas = 0;
            const auto g = pam::upsilon_zero(model.tau, go);
            j["upsilonZero"] = g.upsilon_zero;
            j["lambdaLowerBound"] = pam::lambda_lower_bound(model.sigma, g);
        } catch (const pam::Error&) {
        }
    }
    man.write_output(out, "sweep.json", j.dump(2) + "\n");

    pam::svg::Chart chart;
    chart.title = "survival sweep";
    chart.x_label = "lambda";
    chart.y_label = "probability / Laplace";
    chart.series.push_back({"P{m_T > threshold}", s.lambdas, s.survival, s.survival_se, "#1f77b4"});
    chart.series.push_back({"E exp(-m_T)", s.lambdas, s.laplace, s.laplace_se, "#d62728"});
    man.write_output(out, "sweep.svg", pam::svg::render(chart));
    man.save(out, "manifest-sweep.json");
    std::cout << csv.str();
    return 0;
}

int cmd_kernel(const Common& c, double t, int radius, std::optional<double> q)
{
    const auto model = pam::io::load_model(c.model);
    if (radius <= 0) radius = pam::default_box_radius(model.tau, t);
    const auto k = pam::transition_kernel(model.tau, t, radius);
    pam::io::Manifest man("kernel", 0);
    man.set_model(model, c.model);
    man.set_params({{"t", t}, {"radius", radius}});
    const fs::path out = c.out_dir;
    std::ostringstream csv;
    pam::write_kernel_csv(csv, k);
    man.write_output(out, "kernel.csv", csv.str());
    json j{{"t", t}, {"radius", radius}, {"truncationError", k.truncation_error}, {"terms", k.terms}};
    if (q) {
        std::vector<double> grid;
        for (double s = 1.0; s <= 100.0 + 1e-9; s *= std::pow(10.0, 0.25)) grid.push_back(s);
        const auto h = pam::check_hoeffding_bound(model.tau, *q, grid);
        j["hoeffding"] = {{"q", *q}, {"fittedC", h.fitted_c}, {"points", h.points_checked},
                          {"violations", h.violations.size()}};
    }
    man.write_output(out, "kernel.json", j.dump(2) + "\n");
    man.save(out, "manifest-kernel.json");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_greens(const Common& c, std::size_t mc_replicas, double mc_horizon)
{
    const auto model = pam::io::load_model(c.model);
    pam::GreensOptions o;
    o.mc_replicas = mc_replicas;
    o.mc_horizon = mc_horizon;
    o.threads = c.threads;
    if (c.seed) o.mc_seed = *c.seed;
    const auto r = pam::upsilon_zero(model.tau, o);
    pam::io::Manifest man("greens", o.mc_seed);
    man.set_model(model, c.model);
    man.set_params({{"mcReplicas", mc_replicas}, {"mcHorizon", mc_horizon}, {"excisionRadius", o.excision_radius},
                    {"relTol", o.rel_tol}});
    json j;
    j["dimension"] = r.dim;
    j["upsilonZero"] = r.upsilon_zero;
    j["returnProbability"] = r.return_probability;
    j["quadratureError"] = r.quadrature_error;
    j["latticeIndex"] = r.lattice_index;
    j["lambdaLowerBound"] = pam::lambda_lower_bound(model.sigma, r);
    if (r.has_mc) {
        j["monteCarlo"] = {{"estimate", r.mc_estimate},
                           {"se", r.mc_se},
                           {"tailCorrection", r.mc_tail_correction},
                           {"returnProbability", r.mc_return_probability},
                           {"returnProbabilitySe", r.mc_return_se},
                           {"replicas", r.mc_replicas},
                           {"horizon", r.mc_horizon},
                           {"consistencyGap", r.consistency_gap()}};
    }
    const fs::path out = c.out_dir;
    std::ostringstream trace;
    pam::write_quadrature_trace_csv(trace, r);
    man.write_output(out, "greens.json", j.dump(2) + "\n");
    man.write_output(out, "quadrature_trace.csv", trace.str());
    man.save(out, "manifest-greens.json");
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct OdeArgs {
    std::string input;
    double delta = 1.0, alpha = 1.0, gamma = 1.0, a = 1.0, b = 2.0;
    bool fit = false;
};

int cmd_odeclass(const Common& c, const OdeArgs& a)
{
    const auto series = pam::io::parse_series_csv(pam::io::read_file(a.input), a.input);
    pam::SampledFunction f;
    f.times = series.t;
    f.values = series.f;
    pam::estimate_derivatives(f);
    pam::ClassParameters p{a.alpha, a.delta, a.gamma, a.a, a.b};
    json j;
    if (a.fit) {
        std::vector<double> grid;
        for (double g = 1e-3; g <= 10.0 + 1e-12; g *= std::pow(10.0, 0.1)) grid.push_back(g);
        const auto fit = pam::fit_class_parameters(f, a.delta, a.a, a.b, grid);
        j["fit"] = {{"feasible", fit.feasible}, {"alpha", fit.params.alpha}, {"gamma", fit.params.gamma}};
        if (fit.feasible) p = fit.params;
    }
    const auto m = pam::check_membership(f, p);
    j["params"] = {{"alpha", p.alpha}, {"delta", p.delta}, {"gamma", p.gamma}, {"a", p.a}, {"b", p.b}};
    j["membership"] = {{"pass", m.pass},          {"worstMargin", m.worst_margin}, {"worstTime", m.worst_time},
                       {"argmaxK", m.argmax_k},   {"points", m.points},            {"failures", m.failures}};
    const auto e = pam::predicted_exponent(a.delta);
    j["exponent"] = e.kind == pam::ExponentDescriptor::Kind::Power ? json{{"kind", "power"}, {"nu", e.nu}}
                                                                  : json{{"kind", "sqrtlog"}};
    try {
        const auto d = pam::verify_decay_conclusion(f, a.delta);
        j["decay"] = {{"limsupEstimate", d.limsup_estimate}, {"pass", d.pass}, {"threshold", pam::kStrictNegativity}};
    } catch (const pam::Error& err) {
        j["decay"] = {{"error", err.what()}};
    }
    pam::io::Manifest man("odeclass", 0);
    man.set_params({{"input", a.input}, {"delta", a.delta}, {"fit", a.fit}});
    const fs::path out = c.out_dir;
    man.write_output(out, "odeclass.json", j.dump(2) + "\n");
    man.save(out, "manifest-odeclass.json");
    std::cout << j.dump(2) << "\n";
    return m.pass ? 0 : 1;
}

struct ContinuumArgs {
    std::optional<double> lambda, horizon, dx, half_width;
    std::optional<std::size_t> replicas;
};

int cmd_continuum(const Common& c, const ContinuumArgs& a)
{
    const auto cfg = load_config(c);
    pam::ContinuumParams p;
    p.lambda = cfg.get("continuum", "lambda", p.lambda);
    p.dx = cfg.get("continuum", "dx", p.dx);
    p.dt = cfg.get("continuum", "dt", p.dt);
    p.horizon = cfg.get("continuum", "T", p.horizon);
    p.half_width = cfg.get("continuum", "half_width", p.half_width);
    p.replicas = cfg.get<std::size_t>("continuum", "replicas", p.replicas);
    p.seed = cfg.get<std::uint64_t>("continuum", "seed", p.seed);
    p.samples_per_decade = cfg.get("continuum", "samples_per_decade", p.samples_per_decade);
    p.first_sample = cfg.get("continuum", "first_sample", p.first_sample);
    if (c.seed) p.seed = *c.seed;
    if (a.lambda) p.lambda = *a.lambda;
    if (a.horizon) p.horizon = *a.horizon;
    if (a.dx) p.dx = *a.dx;
    if (a.half_width) p.half_width = *a.half_width;
    if (a.replicas) p.replicas = *a.replicas;
    const auto sigma = pam::Nonlinearity::linear(1.0);

    pam::io::Manifest man("continuum", p.seed);
    man.set_kind("continuum");
    man.set_params({{"lambda", p.lambda}, {"dx", p.dx}, {"dt", p.step()}, {"T", p.horizon}, {"halfWidth", p.width()},
                    {"replicas", p.replicas}, {"seed", p.seed}, {"samples_per_decade", p.samples_per_decade},
                    {"first_sample", p.first_sample}, {"psi0", "exp(-x^2)"}, {"sigma", "id"}});
    const auto trs = pam::mass_paths(pam::simulate_continuum(p, sigma, pam::gaussian_bump, c.threads));
    const fs::path out = c.out_dir;
    man.write_output(out, "continuum_trajectories.csv", trajectories_csv(trs));
    if (trs.size() >= 2) {
        const auto mean = pam::fractional_moment(trs, 1.0);
        const auto half = pam::fractional_moment(trs, 0.5);
        man.write_output(out, "continuum_moments.csv", moments_csv(mean, half));
        man.write_output(out, "continuum_moments.svg", moment_chart(half, "continuum mass, eta = 1/2"));
    }
    auto summary = campaign_summary(trs, 0.5, pam::DecayLaw::CubeRoot);
    man.write_output(out, "continuum_summary.json", summary.dump(2) + "\n");
    man.save(out, "manifest-continuum.json");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct FitArgs {
    std::string law = "d1";
    std::string input;
    std::string trajectories;
    double eta = 0.5;
    double t_min = 1.0;
};

int cmd_fit(const Common& c, const FitArgs& a)
{
    const auto law = a.law == "d2" ? pam::DecayLaw::SqrtLog : pam::DecayLaw::CubeRoot;
    if (a.law != "d1" && a.law != "d2") throw pam::Error(pam::ErrorKind::Parse, "--law must be d1 or d2");
    pam::DecayFit fit;
    json params{{"law", a.law}, {"tMin", a.t_min}};
    if (!a.trajectories.empty()) {
        const auto trs = pam::io::parse_trajectory_csv(pam::io::read_file(a.trajectories), a.trajectories);
        fit = pam::fit_decay_replicas(trs, a.eta, law, a.t_min, 0.95);
        params["trajectories"] = a.trajectories;
        params["eta"] = a.eta;
    } else {
        const auto s = pam::io::parse_series_csv(pam::io::read_file(a.input), a.input);
        pam::MomentSeries ms;
        ms.times = s.t;
        ms.estimates = s.f;
        ms.se.assign(s.t.size(), 0.0);
        fit = pam::fit_decay(ms, law, a.t_min);
        params["input"] = a.input;
    }
    pam::io::Manifest man("fit", 0);
    man.set_params(params);
    const auto j = fit_to_json(fit);
    const fs::path out = c.out_dir;
    man.write_output(out, "fit.json", j.dump(2) + "\n");
    man.save(out, "manifest-fit.json");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_report(const Common& c)
{
    const fs::path dir = c.out_dir;
    require(fs::is_directory(dir), pam::ErrorKind::Io, "no such directory " + dir.string());
    std::vector<fs::path> manifests;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind("manifest", 0) == 0 && e.path().extension() == ".json")
            manifests.push_back(e.path());
    std::sort(manifests.begin(), manifests.end());
    std::ostringstream md;
    md << "# Run report\n\n";
    bool all_ok = true;
    for (const auto& m : manifests) {
        json j;
        try {
            j = json::parse(pam::io::read_file(m));
        } catch (const json::exception& e) {
            throw pam::Error(pam::ErrorKind::Parse, m.string() + ": " + e.what());
        }
        const auto check = pam::io::verify_manifest(dir, j);
        all_ok = all_ok && check.ok;
        md << "## " << j.value("command", std::string("?")) << "\n\n"
           << "- campaign: " << j.value("campaignId", std::string()) << "\n"
           << "- seed: " << j.value("seed", std::uint64_t{0}) << "\n"
           << "- code version: " << j.value("codeVersion", std::string()) << "\n"
           << "- outputs verified: " << (check.ok ? "yes" : "NO") << "\n";
        for (const auto& p : check.problems) md << "  - " << p << "\n";
        for (const auto& o : j.at("outputs")) {
            const auto name = o.at("path").get<std::string>();
            if (fs::path(name).extension() != ".json") continue;
            md << "\n### " << name << "\n\n```json\n" << pam::io::read_file(dir / name) << "```\n";
        }
        md << "\n";
    }
    if (manifests.empty()) md << "No manifests found.\n";
    pam::io::write_file(dir / "report.md", md.str());
    std::cout << md.str();
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pamctl: parabolic Anderson model campaigns, bounds and decay checks"};
    app.require_subcommand(0, 1);
    bool help_config = false;
    app.add_flag("--help-config", help_config, "Print the configuration schema and exit");
    app.set_version_flag("--version", pam::io::kCodeVersion);

    Common common;

    std::string validate_model;
    auto* validate = app.add_subcommand("validate", "Validate a model document or built-in model");
    validate->add_option("model", validate_model, "Model file or built-in name")->required();

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run replicas from c0 delta_0 and write trajectories");
    add_common(simulate, common);
    simulate->add_option("--lambda", sim_args.lambda, "Noise strength");
    simulate->add_option("--T", sim_args.horizon, "Horizon");
    simulate->add_option("--dt", sim_args.dt, "Time step");
    simulate->add_option("--replicas", sim_args.replicas, "Number of replicas");
    simulate->add_option("--eta", sim_args.eta, "Moment exponent for moments.csv");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Survival and Laplace functional over a lambda grid");
    add_common(sweep, common);
    sweep->add_option("--lambdas", sweep_args.lambdas, "start:stop:count or comma list");
    sweep->add_option("--d", sweep_args.dim, "Use the nearest-neighbour walk in this dimension")
        ->check(CLI::Range(1, 4));
    sweep->add_option("--threshold", sweep_args.threshold, "Survival threshold in (0, c0)");
    sweep->add_option("--T", sweep_args.horizon, "Horizon");
    sweep->add_option("--dt", sweep_args.dt, "Time step");
    sweep->add_option("--replicas", sweep_args.replicas, "Replicas per lambda");

    double kernel_t = 1.0;
    int kernel_radius = 0;
    std::optional<double> kernel_q;
    auto* kernel = app.add_subcommand("kernel", "Transition kernel p_t on a box, optional tail-bound fit");
    add_common(kernel, common);
    kernel->add_option("--t", kernel_t, "Time")->required();
    kernel->add_option("--radius", kernel_radius, "Box radius (0 = automatic)");
    kernel->add_option("--q", kernel_q, "Fit the Gaussian tail constant for K <= q t");

    std::size_t greens_mc = 0;
    double greens_horizon = 1e3;
    auto* greens = app.add_subcommand("greens", "Expected collision local time Upsilon(0) and bounds");
    add_common(greens, common);
    greens->add_option("--mc-replicas", greens_mc, "Monte Carlo cross-check replicas (0 = off)");
    greens->add_option("--mc-horizon", greens_horizon, "Monte Carlo horizon");

    OdeArgs ode_args;
    auto* odeclass = app.add_subcommand("odeclass", "Check a sampled (t, f) series against the ODE class");
    add_common(odeclass, common, false);
    odeclass->add_option("--input", ode_args.input, "CSV with columns t,f")->required();
    odeclass->add_option("--delta", ode_args.delta, "delta");
    odeclass->add_option("--alpha", ode_args.alpha, "alpha");
    odeclass->add_option("--gamma", ode_args.gamma, "gamma");
    odeclass->add_option("--a", ode_args.a, "lower end of the K range");
    odeclass->add_option("--b", ode_args.b, "K range upper end is b t");
    odeclass->add_flag("--fit", ode_args.fit, "Fit (alpha, gamma) before checking");

    ContinuumArgs cont_args;
    auto* continuum = app.add_subcommand("continuum", "1-D stochastic heat equation from exp(-x^2)");
    add_common(continuum, common, false);
    continuum->add_option("--lambda", cont_args.lambda, "Noise strength");
    continuum->add_option("--T", cont_args.horizon, "Horizon");
    continuum->add_option("--dx", cont_args.dx, "Grid spacing");
    continuum->add_option("--half-width", cont_args.half_width, "Domain half width");
    continuum->add_option("--replicas", cont_args.replicas, "Number of replicas");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit log E[m^eta] against t^{1/3} (d1) or sqrt(log t) (d2)");
    add_common(fit, common, false);
    fit->add_option("--law", fit_args.law, "d1 | d2");
    auto* fit_in = fit->add_option("--input", fit_args.input, "CSV with columns t,f");
    auto* fit_tr = fit->add_option("--trajectories", fit_args.trajectories, "Trajectory CSV");
    fit_in->excludes(fit_tr);
    fit->add_option("--eta", fit_args.eta, "Moment exponent (trajectory input)");
    fit->add_option("--t-min", fit_args.t_min, "Start of the fit window");

    auto* report = app.add_subcommand("report", "Verify manifests in --out-dir and write report.md");
    add_common(report, common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (help_config) {
        std::cout << pam::io::config_schema();
        return 0;
    }
    try {
        if (*validate) return cmd_validate(validate_model);
        if (*simulate) return cmd_simulate(common, simulate->count("--model") > 0, sim_args);
        if (*sweep) return cmd_sweep(common, sweep->count("--model") > 0, sweep_args);
        if (*kernel) return cmd_kernel(common, kernel_t, kernel_radius, kernel_q);
        if (*greens) return cmd_greens(common, greens_mc, greens_horizon);
        if (*odeclass) return cmd_odeclass(common, ode_args);
        if (*continuum) return cmd_continuum(common, cont_args);
        if (*fit) {
            if (fit_args.input.empty() && fit_args.trajectories.empty()) {
                std::cerr << "fit needs --input or --trajectories\n";
                return 2;
            }
            return cmd_fit(common, fit_args);
        }
        if (*report) return cmd_report(common);
        std::cout << app.help();
        return 0;
    } catch (const pam::Error& e) {
        std::cerr << e.what() << "\n";
        switch (e.kind()) {
        case pam::ErrorKind::Io:
        case pam::ErrorKind::Parse: return 2;
        default: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
