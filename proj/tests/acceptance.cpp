// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [--pamctl PATH] [--work DIR] [N ...]   (no N = all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pam/analysis.hpp"
#include "pam/continuum.hpp"
#include "pam/greens.hpp"
#include "pam/io.hpp"
#include "pam/kernel.hpp"
#include "pam/odeclass.hpp"
#include "pam/sde.hpp"
#include "pam/stats.hpp"

namespace fs = std::filesystem;
using namespace pam;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string g(double v, int prec = 6)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

const Model kSrw1{builtin_laplacian(1), Nonlinearity::linear(1.0)};

std::vector<double> final_mass(const std::vector<MassTrajectory>& trs)
{
    std::vector<double> m;
    for (const auto& t : trs) m.push_back(t.mass.back());
    return m;
}

std::string pamctl_path;
fs::path work_dir = fs::temp_directory_path() / "pam-acceptance";

//---------------------------------------------------------------------------//

Outcome mass_conservation()
{
    Outcome o{true, ""};
    for (int d = 1; d <= 3; ++d) {
        const auto tau = builtin_laplacian(d);
        SimParams p;
        p.lambda = 0.0;
        p.horizon = 10.0;
        p.dt = 0.01;
        // Twice the default radius keeps absorbed mass below 1e-12 in d = 1, 2.
        p.box = BoxPolicy::fixed(2 * default_box_radius(tau, p.horizon));
        const auto tr = simulate_path(p, {tau, Nonlinearity::linear(1.0)}, 0);
        double worst = 0.0;
        for (double m : tr.mass) worst = std::max(worst, std::abs(m - p.c0));
        const bool ok = worst <= 1e-10 && !tr.box_overflow;
        o.pass = o.pass && ok;
        o.detail += "d=" + std::to_string(d) + " max|m-c0|=" + g(worst, 3) + (tr.box_overflow ? " FLAG" : "") + "; ";
    }
    return o;
}

Outcome martingale_mean()
{
    SimParams p;
    p.lambda = 1.0;
    p.dt = 1e-3;
    p.horizon = 5.0;
    p.replicas = 2000;
    p.seed = 20260101;
    const auto m = final_mass(simulate_campaign(p, kSrw1, 1));
    const double mean = stats::mean(m), se = stats::standard_error(m);
    return {std::abs(mean - 1.0) <= 4.0 * se,
            "E[m_T]=" + g(mean) + " SE=" + g(se, 3) + " |z|=" + g(std::abs(mean - 1.0) / se, 3)};
}

Outcome second_moment_oracle()
{
    SimParams p;
    p.lambda = 1.0;
    p.dt = 1e-3;
    p.horizon = 2.0;
    p.replicas = 2000;
    p.seed = 20260102;
    const auto m = final_mass(simulate_campaign(p, kSrw1, 1));
    std::vector<double> sq;
    for (double v : m) sq.push_back(v * v);
    const double est = stats::mean(sq), se = stats::standard_error(sq);
    const double oracle = pam_second_moment_oracle(kSrw1.tau, 1.0, 1.0, 20, 2.0, 1e-4);
    const double gap = std::abs(est - oracle) / oracle;
    return {std::abs(est - oracle) <= 3.0 * se && gap <= 0.05,
            "E[m_T^2]=" + g(est) + " SE=" + g(se, 3) + " oracle=" + g(oracle, 10) + " rel gap=" + g(gap, 3)};
}

Outcome decay_law_d1()
{
    SimParams p;
    p.lambda = 2.0;
    p.horizon = 200.0;
    p.dt = 0.01;
    p.replicas = 2000;
    p.seed = 20260104;
    p.scheme = Scheme::MultiplicativeSplit;
    p.box = BoxPolicy::growth();
    p.samples_per_decade = 30;
    const auto trs = simulate_campaign(p, kSrw1, 1);
    const double eta = 0.5;
    const auto fit = fit_decay_replicas(trs, eta, DecayLaw::CubeRoot, 1.0, 0.95);
    const bool fit_ok = fit.v > 0.0 && fit.ci_excludes_zero();

    // C f in the class with delta = d = 1, C = (2 (2 c0 d)^eta)^{-1}; gamma from
    // the fitted Gaussian tail constant c times eta, alpha maximal.
    const double scale = 1.0 / (2.0 * std::pow(2.0 * p.c0 * 1.0, eta));
    const auto f = moment_function(trs, eta, scale);
    const auto tail = check_hoeffding_bound(kSrw1.tau, 1.0, {1, 2, 4, 8, 16, 32, 64});
    const double gamma = tail.fitted_c * eta;
    const auto cls = fit_class_parameters(f, 1.0, 1.0, 2.0, {gamma});
    const auto mem = check_membership(f, cls.params);
    const bool mem_ok = cls.feasible && mem.pass;
    return {fit_ok && mem_ok, "v=" + g(fit.v, 4) + " CI=[" + g(fit.ci.lo, 4) + "," + g(fit.ci.hi, 4) +
                                  "] membership " + (mem_ok ? "pass" : "FAIL") + " alpha=" + g(cls.params.alpha, 4) +
                                  " gamma=" + g(gamma, 4) + " worst margin=" + g(mem.worst_margin, 3) +
                                  " failures=" + std::to_string(mem.failures)};
}

Outcome phase_structure_d3()
{
    const Model m{builtin_laplacian(3), Nonlinearity::linear(1.0)};
    SimParams p;
    p.horizon = 50.0;
    p.dt = 0.25;
    p.replicas = 1000;
    p.seed = 20260105;
    p.scheme = Scheme::MultiplicativeSplit;
    p.box = BoxPolicy::growth();
    p.extinction_mass = 1e-6 * p.c0;
    p.samples_per_decade = 5;
    const auto s = survival_sweep(m, p, {0.5, 1.0, 2.0, 4.0, 8.0}, 0.25 * p.c0, 1);
    const auto surv = survival_monotonicity_test(s);
    const auto lap = laplace_monotonicity_test(s);
    const bool ok = surv.pass && lap.pass && s.survival.front() >= 0.5 && s.survival.back() <= 0.05;
    std::string d = "survival=";
    for (double v : s.survival) d += g(v, 3) + " ";
    d += "laplace=";
    for (double v : s.laplace) d += g(v, 4) + " ";
    d += "lambda_c~" + g(s.lambda_c, 3);
    d += surv.pass ? " surv-monotone" : " surv-NOT-monotone";
    d += lap.pass ? " laplace-monotone" : " laplace-NOT-monotone";
    return {ok, d};
}

Outcome subcritical_constants()
{
    GreensOptions o;
    o.mc_replicas = 100000;
    const auto r = upsilon_zero(builtin_laplacian(3), o);
    const double watson_half = 0.758193029575989;
    const bool quad_ok = std::abs(r.upsilon_zero - watson_half) <= 1e-3;
    const bool mc_ok = std::abs(r.mc_estimate - r.upsilon_zero) <= 0.01 * r.upsilon_zero;
    const double lb = lambda_lower_bound(1.0, r.upsilon_zero);
    const bool lb_ok = std::abs(lb - 1.148) < 5e-4;
    // Worked substitutions: lambda = 0.3, Lip = 1, Upsilon = 1, c0 = 1 gives eps = 0.09.
    const double m2 = second_moment_bound(0.3, 1.0, 1.0, 1.0);
    const double pz = paley_zygmund_floor(1.0, 2.3956);
    const bool m2_ok = std::abs(m2 - 2.0 * 1.09 / 0.91) <= 1e-12 && std::abs(m2 - 2.3956) < 5e-5 &&
                       std::abs(pz - 1.0 / (4.0 * 2.3956)) <= 1e-15 && std::abs(pz - 0.10435) < 1e-5 &&
                       paley_zygmund_floor(1.0, 1.0) == 0.25;
    return {quad_ok && mc_ok && lb_ok && m2_ok,
            "Upsilon(0)=" + g(r.upsilon_zero, 12) + " MC=" + g(r.mc_estimate, 5) + "+-" + g(r.mc_se, 2) +
                " lambda_lb=" + g(lb, 6) + " bounds " + (m2_ok ? "exact" : "MISMATCH")};
}

Outcome tail_bound()
{
    const auto h = check_hoeffding_bound(builtin_laplacian(1), 1.0, {1, 2, 4, 8, 16, 32, 64});
    return {h.fitted_c > 0.0 && h.violations.empty(),
            "fitted c=" + g(h.fitted_c, 6) + " points=" + std::to_string(h.points_checked) +
                " violations=" + std::to_string(h.violations.size())};
}

Outcome ode_class()
{
    bool ok = true;
    std::string d;
    const auto grid = log_spaced(1.0, 1e3, 40);
    for (double delta : {0.0, 0.5, 1.0, 1.5}) {
        const double nu = predicted_exponent(delta).nu;
        const double theta = 1.5 * std::pow(1.0 / nu, 1.0 / (1.0 + 0.5 * delta));
        const auto f = sample_function([&](double t) { return std::exp(-theta * std::pow(t, nu)); }, grid);
        const bool m = check_membership(f, {1.0, delta, 1.0, 1.0, 2.0}).pass;
        const auto c = verify_decay_conclusion(f, delta);
        ok = ok && m && c.pass;
        d += "delta=" + g(delta) + (m && c.pass ? " ok; " : " FAIL; ");
    }
    const auto f2 = sample_function([](double t) { return std::exp(-2.0 * std::sqrt(std::log(t))); },
                                    log_spaced(2.0, 1e3, 40));
    const bool m2 = check_membership(f2, {1.0, 2.0, 1.0, 1.0, 2.0}).pass && verify_decay_conclusion(f2, 2.0).pass;
    d += std::string("sqrt-log ") + (m2 ? "ok; " : "FAIL; ");
    const auto zero = sample_function([](double) { return 0.0; }, log_spaced(1.0, 1e3, 10));
    const auto two = sample_function([](double) { return 2.0; }, log_spaced(1.0, 1e3, 10));
    const bool z = check_membership(zero, {1.0, 1.0, 1.0, 1.0, 2.0}).pass;
    const bool t = !check_membership(two, {1.0, 1.0, 1.0, 1.0, 2.0}).pass;
    d += std::string("f=0 ") + (z ? "passes" : "FAILS") + "; f=2 " + (t ? "fails" : "PASSES");
    return {ok && m2 && z && t, d};
}

Outcome lower_bound()
{
    SimParams p;
    p.lambda = 1.0;
    p.horizon = 20.0;
    p.dt = 1e-2;
    p.replicas = 10000;
    p.seed = 20260109;
    p.samples_per_decade = 10;
    const auto trs = simulate_campaign(p, kSrw1, 1);
    const auto rep = lower_bound_check(trs, 1.0, 1.0, 2.0, 1.0);
    const auto& row = rep.at(20.0);
    const bool ok = row.t == 20.0 && row.empirical >= rep.asymptotic_bound - 3.0 * row.se && row.pass;
    return {ok, "P{m_T >= e^{-cT}}=" + g(row.empirical, 5) + " SE=" + g(row.se, 2) + " at t=" + g(row.t) +
                    " floor=" + g(rep.asymptotic_bound, 6) + " finite-t bound=" + g(row.bound, 6)};
}

Outcome continuum_decay()
{
    ContinuumParams p;
    p.horizon = 50.0;
    p.dx = 0.1;
    p.half_width = 50.0;
    p.replicas = 500;
    p.seed = 20260110;
    const auto trs = mass_paths(simulate_continuum(p, Nonlinearity::linear(1.0), gaussian_bump, 1));
    const auto m = final_mass(trs);
    const double m0 = trs.front().mass.front();
    const double mean = stats::mean(m), se = stats::standard_error(m);
    const bool mart = std::abs(mean - m0) <= 4.0 * se;
    const auto fit = fit_decay_replicas(trs, 0.5, DecayLaw::CubeRoot, 1.0, 0.95);
    const bool decay = fit.v > 0.0 && fit.ci_excludes_zero();
    std::size_t flagged = 0;
    for (const auto& t : trs) flagged += t.box_overflow ? 1 : 0;
    return {mart && decay, "E[M_T]=" + g(mean, 5) + " SE=" + g(se, 3) + " M_0=" + g(m0, 6) + " slope=" + g(-fit.v, 4) +
                               " CI=[" + g(-fit.ci.hi, 4) + "," + g(-fit.ci.lo, 4) + "] boundary flags=" +
                               std::to_string(flagged)};
}

/// Runs pamctl with the given arguments and returns all non-manifest output
/// files keyed by name.
std::map<std::string, std::string> run_cli(const std::string& args, const fs::path& dir)
{
    fs::remove_all(dir);
    const std::string cmd = "\"" + pamctl_path + "\" " + args + " --out-dir \"" + dir.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    require(rc == 0, ErrorKind::Io, "command failed: " + cmd);
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("manifest", 0) == 0) continue;
        out[name] = io::read_file(e.path());
    }
    return out;
}

Outcome determinism()
{
    if (pamctl_path.empty()) return {false, "pamctl path not given (--pamctl)"};
    const fs::path cfg = work_dir / "determinism.toml";
    io::write_file(cfg, "[model]\nname = srw2\n\n[simulate]\nlambda = 1.5\ndt = 0.01\nT = 3\nreplicas = 24\nseed = 99\n"
                        "\n[continuum]\nlambda = 1.0\ndx = 0.2\nT = 2\nreplicas = 16\nseed = 5\n");
    const std::vector<std::string> commands = {
        "simulate --config \"" + cfg.string() + "\"",
        "sweep --d 3 --lambdas 0.5:4:3 --T 3 --replicas 24 --seed 4",
        "continuum --config \"" + cfg.string() + "\"",
        "greens --model srw3 --mc-replicas 4000 --mc-horizon 200 --seed 8",
        "kernel --model srw2 --t 2 --q 1",
    };
    std::size_t files = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::map<std::string, std::string> ref;
        for (unsigned threads : {1u, 4u, 8u}) {
            const auto got = run_cli(commands[c] + " --threads " + std::to_string(threads),
                                     work_dir / ("det" + std::to_string(c) + "_" + std::to_string(threads)));
            if (threads == 1) {
                ref = got;
                files += got.size();
                continue;
            }
            if (got != ref) return {false, "outputs differ for '" + commands[c] + "' at " + std::to_string(threads) + " threads"};
        }
        // Rerun at one thread to check run-to-run identity as well.
        if (run_cli(commands[c] + " --threads 1", work_dir / ("det" + std::to_string(c) + "_again")) != ref)
            return {false, "rerun differs for '" + commands[c] + "'"};
    }
    return {true, std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                      " output files byte-identical across threads 1/4/8 and reruns"};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"mass conservation at lambda=0 (d=1,2,3)", mass_conservation},
        {"martingale mean, d=1", martingale_mean},
        {"second moment vs two-point oracle, d=1", second_moment_oracle},
        {"d=1 decay law and ODE-class membership", decay_law_d1},
        {"d=3 phase structure", phase_structure_d3},
        {"subcritical constants, d=3", subcritical_constants},
        {"Gaussian tail bound, d=1", tail_bound},
        {"ODE-class planted functions", ode_class},
        {"survival lower bound, d=1", lower_bound},
        {"continuum mass decay", continuum_decay},
        {"determinism across thread counts", determinism},
    };
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--pamctl" && i + 1 < argc) {
            pamctl_path = argv[++i];
        } else if (a == "--work" && i + 1 < argc) {
            work_dir = argv[++i];
        } else {
            const auto n = static_cast<std::size_t>(std::stoul(a));
            if (n < 1 || n > criteria.size()) {
                std::cerr << "no criterion " << a << "\n";
                return 2;
            }
            selected.push_back(n);
        }
    }
    if (selected.empty())
        for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

    bool all = true;
    for (std::size_t n : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[n - 1].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2zu: %s  %s (%.1fs): %s\n", n, o.pass ? "PASS" : "FAIL", criteria[n - 1].first.c_str(),
                    secs, o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
