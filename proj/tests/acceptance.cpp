// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-epichaos-cli> <configs-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "epichaos/calibrate.hpp"
#include "epichaos/cases.hpp"
#include "oracles.hpp"

using namespace epichaos;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

int run(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0.0 && seconds > limit_seconds) {
        out.pass = false;
        out.detail += "; runtime limit " + num(limit_seconds) + " s exceeded";
    }
    std::cout << (out.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << out.detail << " ("
              << num(seconds, 3) << " s)" << std::endl;
    return out.pass ? 0 : 1;
}

// Moments of N(0, 1): zero for odd k, (k - 1)!! for even k.
double normal_moment(int k) {
    if (k % 2) return 0.0;
    double m = 1.0;
    for (int j = k - 1; j > 1; j -= 2) m *= j;
    return m;
}

Outcome quadrature_exactness() {
    double worst_rel = 0.0, worst_abs = 0.0;
    for (std::size_t n = 1; n <= 20; ++n) {
        const auto rule = orthopoly::gauss_rule(orthopoly::FamilyKind::HermiteProbabilists, n);
        for (int k = 0; k <= static_cast<int>(2 * n - 1); ++k) {
            // Mirror-image nodes are summed as pairs so odd moments cancel.
            double s = 0.0;
            for (std::size_t i = 0; i < n / 2; ++i) {
                s += rule.weights[i] * std::pow(rule.nodes[i], k) +
                     rule.weights[n - 1 - i] * std::pow(rule.nodes[n - 1 - i], k);
            }
            if (n % 2) s += rule.weights[n / 2] * std::pow(rule.nodes[n / 2], k);
            const double exact = normal_moment(k);
            if (exact == 0.0) worst_abs = std::max(worst_abs, std::abs(s));
            else worst_rel = std::max(worst_rel, rel(s, exact));
        }
    }
    return {worst_rel <= 1e-9 && worst_abs <= 1e-9,
            "max relative error " + num(worst_rel) + ", max |odd moment| " + num(worst_abs)};
}

Outcome analytic_sobol() {
    const auto additive = cases::expand_standard_normal(2, 3, [](auto& x) { return 2.0 * x[0] + x[1]; });
    const auto product = cases::expand_standard_normal(2, 3, [](auto& x) { return x[0] * x[1]; });
    const auto a = sobol::sobol_indices(additive, 0);
    const auto p = sobol::sobol_indices(product, 0);
    const double err = std::max({std::abs(a[1] - 0.8), std::abs(a[2] - 0.2), std::abs(a[3]), std::abs(p[3] - 1.0),
                                 std::abs(p[1]), std::abs(p[2])});
    return {err <= 1e-10, "S1=" + num(a[1], 12) + " S2=" + num(a[2], 12) + " S12=" + num(a[3], 3) +
                              ", product S12=" + num(p[3], 12) + ", max error " + num(err)};
}

cases::Case1Result case1_at(unsigned order) {
    config::RunConfig cfg;
    cfg.case_name = "case1";
    cfg.case1.order = order;
    return cases::case1_analysis(cfg);
}

Outcome evaluation_count() {
    const auto lo = case1_at(3);
    const auto hi = case1_at(10);
    double worst = 0.0;
    for (std::size_t q = 0; q < 2; ++q) {
        worst = std::max({worst, rel(lo.mean[q], hi.mean[q]), rel(lo.variance[q], hi.variance[q])});
    }
    return {lo.solves == 27 && hi.solves == 1000 && worst <= 0.01,
            "solves " + std::to_string(lo.solves) + "/" + std::to_string(hi.solves) + ", t_peak mean " +
                num(lo.mean[0], 7) + " vs " + num(hi.mean[0], 7) + ", max relative difference " + num(worst)};
}

Outcome case1_ranking() {
    const auto r = case1_at(3);
    const auto& s = r.sobol[0];  // t_peak
    const auto r0 = sobol::first_order_and_total(s, 0);
    const auto inc = sobol::first_order_and_total(s, 1);
    const auto inf = sobol::first_order_and_total(s, 2);
    const bool pass = r0.first < std::max(inc.first, inf.first) && r0.total < std::max(inc.total, inf.total);
    return {pass, "t_peak first-order R0=" + num(r0.first) + " tau_inc=" + num(inc.first) +
                      " tau_inf=" + num(inf.first) + "; total R0=" + num(r0.total) +
                      " tau_inc=" + num(inc.total) + " tau_inf=" + num(inf.total)};
}

Outcome derived_constants() {
    epimodels::InfectivityProfile profile;
    profile.p = 0.1;
    profile.contribution = 0.8;
    double worst = std::abs(profile.multiplier() - 36.0);
    for (double s : {1.0, 0.602, 0.25}) {
        profile.s = s;
        worst = std::max(worst, std::abs(profile.unrestricted_mean() - 4.5 * s));
        worst = std::max(worst, std::abs(epimodels::effective_beta(profile, std::nullopt) - 4.5 * s));
    }
    // Spreadsheet-style: percentages multiplied cell by cell, scaled once at the end.
    const long double d[] = {10.9L, 11.9L, 13.3L, 11.7L, 13.6L, 13.6L, 11.7L, 8.9L, 4.4L};
    const long double h[] = {0.001L, 0.013L, 0.37L, 1.1L, 1.4L, 2.7L, 3.9L, 5.5L, 5.5L};
    const long double k[] = {5.0L, 5.0L, 5.0L, 5.0L, 6.3L, 12.2L, 27.4L, 43.2L, 70.9L};
    long double dh = 0.0L, dhk = 0.0L;
    for (int i = 0; i < 9; ++i) {
        dh += d[i] * h[i];
        dhk += d[i] * h[i] * k[i];
    }
    const double z1 = static_cast<double>(dh / 1.0e4L);
    const double z2 = static_cast<double>(dhk / dh / 100.0L);
    const auto p = epimodels::SuperspreaderParams::defaults();
    const double z_err = std::max(std::abs(p.z1 - z1), std::abs(p.z2 - z2));
    return {worst <= 1e-12 && z_err <= 1e-12,
            "A=" + num(profile.multiplier(), 17) + ", beta_bar/s error " + num(worst) + ", z1=" + num(p.z1, 10) +
                " z2=" + num(p.z2, 10) + " (difference " + num(z_err) + ")"};
}

template <class Simulate>
double observed_order(Simulate simulate, double h) {
    ode::IntegratorOptions opt;
    double diffs[2] = {0.0, 0.0};
    std::vector<double> prev;
    for (int level = 0; level < 3; ++level) {
        opt.fixed_step = h / std::pow(2.0, level);
        const auto traj = simulate(opt);
        const auto& last = traj.states.back();
        std::vector<double> y(last.begin(), last.end());
        if (!prev.empty()) {
            for (std::size_t i = 0; i < y.size(); ++i) diffs[level - 1] = std::max(diffs[level - 1], std::abs(y[i] - prev[i]));
        }
        prev = y;
    }
    return std::log2(diffs[0] / diffs[1]);
}

Outcome conservation_and_order() {
    using namespace epimodels;
    const auto seir = SeirParams::from_durations(1.4, 4.2, 3.3);
    const SeirState seir0 = {kDanishPopulation - 100.0, 0.0, 100.0, 0.0};
    const auto ss = SuperspreaderParams::defaults();
    double drift = 0.0;
    for (const auto& y : simulate_seir(seir, seir0, 200.0).states) {
        drift = std::max(drift, std::abs(y[0] + y[1] + y[2] + y[3] - seir.population));
    }
    for (const auto& y : simulate_superspreader(ss, 200.0).states) {
        double sum = 0.0;
        for (std::size_t i = kS; i <= kR; ++i) sum += y[i];
        drift = std::max(drift, std::abs(sum - ss.population));
    }
    const double p_seir = observed_order([&](auto opt) { return simulate_seir(seir, seir0, 200.0, opt); }, 1.0);
    const double p_ss = observed_order([&](auto opt) { return simulate_superspreader(ss, 200.0, opt); }, 1.0);
    return {drift <= 1e-6 * kDanishPopulation && std::min(p_seir, p_ss) >= 4.0,
            "max population drift " + num(drift) + " persons, observed order SEIR " + num(p_seir, 3) +
                ", superspreader " + num(p_ss, 3)};
}

Outcome calibration_recovery() {
    using namespace calibrate;
    const auto truth = epimodels::SuperspreaderParams::defaults();
    const double g = growth_rate(epimodels::simulate_superspreader(truth, truth.schedule.t1), truth.schedule.t1);
    const auto clean = synthesize_data(truth, 110, 0.0, 1);
    const auto one = fit_stage_one(truth, clean, StageOneWeights::for_data(clean, g));
    const auto two = fit_stage_two(truth, clean, one);
    const double es = rel(one.value("s"), 0.602), ei = rel(one.value("I0"), 473.572);
    const double e1 = rel(two.value("c1"), 0.130), e2 = rel(two.value("c2"), 0.187), e3 = rel(two.value("c3"), 0.188);
    const auto noisy = synthesize_data(truth, 110, 0.05, 7);
    const auto one_n = fit_stage_one(truth, noisy, StageOneWeights::for_data(noisy, g));
    const auto two_n = fit_stage_two(truth, noisy, one_n);
    const double n1 = rel(two_n.value("c1"), 0.130), n2 = rel(two_n.value("c2"), 0.187);
    const bool pass = es <= 0.01 && ei <= 0.01 && e1 <= 0.02 && e2 <= 0.02 && e3 <= 0.10 && n1 <= 0.10 && n2 <= 0.10;
    return {pass, "zero noise relative errors s " + num(es) + ", I0 " + num(ei) + ", c " + num(e1) + "/" + num(e2) +
                      "/" + num(e3) + "; 5% noise c1 " + num(n1) + ", c2 " + num(n2)};
}

Outcome case2_uq() {
    config::RunConfig cfg;
    cfg.uq.order = 5;
    const auto r = cases::case2_uq_analysis(cfg, cfg.model);
    double worst = 0.0;
    std::size_t degenerate = 0;
    for (const auto& series : r.sobol) {
        for (const auto& s : series) {
            if (s.degenerate) {
                ++degenerate;
                continue;
            }
            double sum = 0.0;
            for (unsigned m = 1; m < 8; ++m) sum += s[m];
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    // Sequence of first-order dominant parameters for H, consecutive repeats merged.
    std::vector<int> order;
    std::vector<std::size_t> switch_day;
    for (std::size_t d = 0; d < r.days; ++d) {
        const auto& s = r.sobol[0][d];
        if (s.degenerate) continue;
        const double v[] = {s[1], s[2], s[4]};
        const int top = static_cast<int>(std::max_element(v, v + 3) - v);
        if (order.empty() || order.back() != top) {
            order.push_back(top);
            switch_day.push_back(d);
        }
    }
    std::string seq;
    for (std::size_t i = 0; i < order.size(); ++i) {
        seq += (i ? " -> c" : "c") + std::to_string(order[i] + 1) + "@" + std::to_string(switch_day[i]);
    }
    const bool dominance = order == std::vector<int>{0, 1, 2} && switch_day[1] > cfg.model.schedule.t2 &&
                           switch_day[2] > cfg.model.schedule.t3;
    return {worst <= 1e-8 && dominance, std::to_string(r.grid.size()) + " solves, max |sum - 1| " + num(worst) +
                                             " over non-degenerate days (" + std::to_string(degenerate) +
                                             " degenerate), H dominance " + seq};
}

Outcome cross_oracle() {
    const auto exp = cases::expand_standard_normal(3, 20, cases::ishigami_normal);
    const auto s = sobol::sobol_indices(exp, 0);
    const auto mc = oracle::pick_freeze(cases::ishigami_normal, 3, 1'000'000, 20240601);
    double worst = 0.0;
    std::string detail;
    for (std::size_t d = 0; d < 3; ++d) {
        const double first = sobol::first_order_and_total(s, d).first;
        const double z = std::abs(first - mc.first[d]) / mc.first_se[d];
        worst = std::max(worst, z);
        detail += (d ? ", S" : "S") + std::to_string(d + 1) + " " + num(first) + " vs " + num(mc.first[d]) + " +- " +
                  num(mc.first_se[d], 2);
    }
    return {worst <= 3.0, detail + "; max deviation " + num(worst, 3) + " SE"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism(const std::string& cli, const std::string& configs) {
    const auto root = fs::temp_directory_path() / ("epichaos_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::string> commands = {
        "quad-check --out qc",
        "sobol-demo --out demo",
        "synth --config " + configs + "/case2.cfg --out data",
        "case1 --config " + configs + "/case1.cfg --out case1",
        "case2 fit --config " + configs + "/case2_synthetic.cfg --data data/synthetic_admissions.csv --out fit",
        "case2 uq --config " + configs + "/case2.cfg --fit fit/case2_fit.json --out uq",
    };
    // Run b single-threaded so scheduling differences would show up.
    for (const std::string run : {"a", "b"}) {
        fs::create_directories(root / run);
        for (const auto& c : commands) {
            const std::string env = run == "b" ? "EPICHAOS_THREADS=1 " : "";
            const std::string line = "cd '" + (root / run).string() + "' && " + env + "'" + cli + "' " + c + " > /dev/null";
            if (std::system(line.c_str()) != 0) return {false, "command failed: " + c};
        }
    }
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto other = root / "b" / fs::relative(entry.path(), root / "a");
        ++files;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) differing.push_back(entry.path().filename());
    }
    fs::remove_all(root);
    std::string detail = std::to_string(commands.size()) + " subcommands, " + std::to_string(files) +
                         " files compared, " + std::to_string(differing.size()) + " differ";
    for (const auto& d : differing) detail += " " + d;
    return {differing.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <epichaos-cli> <configs-dir>\n";
        return 2;
    }
    const std::string cli = fs::absolute(argv[1]).string();
    const std::string configs = fs::absolute(argv[2]).string();
    int failures = 0;
    failures += run(1, "quadrature exactness", 1.0, quadrature_exactness);
    failures += run(2, "analytic Sobol reproduction", 0.0, analytic_sobol);
    failures += run(3, "evaluation-count reproduction", 30.0, evaluation_count);
    failures += run(4, "case 1 ranking of R0", 0.0, case1_ranking);
    failures += run(5, "superspreader derived constants", 0.0, derived_constants);
    failures += run(6, "conservation and integrator order", 10.0, conservation_and_order);
    failures += run(7, "calibration recovery", 120.0, calibration_recovery);
    failures += run(8, "case 2 UQ behavior", 60.0, case2_uq);
    failures += run(9, "cross-oracle Sobol check", 30.0, cross_oracle);
    failures += run(10, "determinism", 0.0, [&] { return determinism(cli, configs); });
    std::cout << (10 - failures) << "/10 criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
