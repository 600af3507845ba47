#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "epichaos/cases.hpp"
#include "epichaos/config.hpp"

using namespace epichaos;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(EPICHAOS_SOURCE_DIR) + "/configs/";

config::RunConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return config::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("epichaos_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Output, Fnv1aKnownVectors) {
    EXPECT_EQ(output::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(output::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(output::hex64(0xabcULL), "0000000000000abc");
}

TEST(Output, ShortestRoundTrip) {
    EXPECT_EQ(output::fmt(0.1), "0.1");
    EXPECT_EQ(output::fmt(473.572), "473.572");
    const double x = 1.0 / 3.0;
    EXPECT_EQ(std::stod(output::fmt(x)), x);
}

TEST(Config, ShippedCase1MatchesDefaults) {
    const auto cfg = config::load(kConfigs + "case1.cfg");
    EXPECT_EQ(cfg.case_name, "case1");
    EXPECT_EQ(cfg.case1.order, 3u);
    ASSERT_EQ(cfg.case1.priors.size(), 3u);
    EXPECT_EQ(cfg.case1.priors[1].name, "tau_inc");
    EXPECT_NEAR(cfg.case1.priors[1].spec.variance, 0.49, 1e-15);
    config::RunConfig defaults;
    defaults.case_name = "case1";
    defaults.output_dir = cfg.output_dir;
    EXPECT_EQ(cfg.hash(), defaults.hash());
}

TEST(Config, ShippedCase2MatchesDefaults) {
    const auto cfg = config::load(kConfigs + "case2.cfg");
    const auto d = epimodels::SuperspreaderParams::defaults();
    EXPECT_EQ(cfg.model.z1, d.z1);
    EXPECT_EQ(cfg.model.z2, d.z2);
    EXPECT_DOUBLE_EQ(cfg.model.gamma2, d.gamma2);
    EXPECT_EQ(cfg.model.schedule.c1, 0.130);
    EXPECT_EQ(cfg.uq.order, 5u);
    EXPECT_EQ(cfg.resolve(cfg.fit.data_file),
              (fs::path(kConfigs) / "../data/synthetic_admissions.csv").lexically_normal().string());
}

TEST(Config, SyntheticConfigReadsGrowthFromData) {
    const auto cfg = config::load(kConfigs + "case2_synthetic.cfg");
    EXPECT_TRUE(cfg.fit.target_growth_from_data);
}

TEST(Config, HashTracksContent) {
    const auto a = parse_text("case case2\nseed 1\n");
    const auto b = parse_text("case case2\nseed 2\n");
    const auto c = parse_text("; comment only\ncase case2\nseed 1\n");
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(a.hash(), c.hash());
}

TEST(Config, Errors) {
    const char* bad[] = {
        "case case3\n",
        "case case2\nmodel { populaton 5 }\n",
        "case case2\nmodel { profile { s abc } }\n",
        "case case1\npriors { R0 { mean 1.4\n variance 0.1 } }\n",
        "case case1\nquadrature { order 0 }\n",
        "case case1\nfit { alpha 1 }\n",
        "case case2\nmodel { restrictions { t1 50 } }\n",
        "case case2\nuq { coverage 1.5 }\n",
        "case case2\nmodel { durations { W -2 } }\n",
        "case case1\npriors { R0 { distribution gamma\n mean 1\n variance 1 }\n tau_inc { mean 1\n variance 1 }\n tau_inf { mean 1\n variance 1 } }\n",
        "case case2\nmodel {\n",
    };
    for (const char* text : bad) EXPECT_THROW(parse_text(text), ConfigError) << text;
    EXPECT_THROW(config::load("/nonexistent.cfg"), ConfigError);
}

TEST(Config, UncappedInitialPhase) {
    const auto cfg = parse_text("case case2\nmodel { restrictions { initial_level none } }\n");
    EXPECT_FALSE(cfg.model.schedule.initial_level.has_value());
}

TEST(QuadCheck, DefaultSweepPasses) {
    const auto r = cases::quad_check(64);
    EXPECT_TRUE(r.passed());
    EXPECT_LT(r.max_moment_error, 1e-9);
    EXPECT_LT(r.max_gram_error, 1e-9);
    EXPECT_TRUE(cases::quad_check(1).passed());
}

TEST(QuadCheck, PerturbedWeightsFail) { EXPECT_FALSE(cases::quad_check(4, 1e-6).passed()); }

TEST(Case1, LowOrderRun) {
    config::RunConfig cfg;
    cfg.case_name = "case1";
    const auto r = cases::case1_analysis(cfg);
    EXPECT_EQ(r.solves, 27u);
    EXPECT_GT(r.mean[0], 100.0);
    EXPECT_GT(r.variance[1], 0.0);
    EXPECT_NEAR(r.covariance[0][0], r.variance[0], 1e-9 * r.variance[0]);
}

TEST(Case1, FailingNodesAreReported) {
    config::RunConfig cfg;
    cfg.case_name = "case1";
    cfg.case1.horizon = 60.0;
    try {
        cases::case1_analysis(cfg);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("27 of 27"), std::string::npos);
        EXPECT_NE(msg.find("R0 = "), std::string::npos);
        EXPECT_NE(msg.find("horizon too short"), std::string::npos);
    }
}

TEST(Case2Uq, ZeroPriorVarianceCollapsesBands) {
    config::RunConfig cfg;
    cfg.uq.relative_std = 0.0;
    cfg.uq.order = 3;
    cfg.uq.horizon = 120.0;
    const auto base = cfg.model;
    const auto r = cases::case2_uq_analysis(cfg, base);
    const auto traj = epimodels::simulate_superspreader(base, 120.0);
    for (std::size_t d = 0; d < r.days; ++d) {
        const double h = traj.states[d][epimodels::kH];
        const auto& b = r.bands[0];
        EXPECT_NEAR(b.mean[d], h, 1e-6 * std::max(h, 1.0));
        EXPECT_NEAR(b.lower[d], h, 1e-6 * std::max(h, 1.0));
        EXPECT_NEAR(b.upper[d], h, 1e-6 * std::max(h, 1.0));
    }
}

TEST(Case2Uq, BandsContainMeanAndSobolSumsToOne) {
    config::RunConfig cfg;
    cfg.uq.order = 3;
    cfg.uq.horizon = 150.0;
    const auto r = cases::case2_uq_analysis(cfg, cfg.model);
    EXPECT_EQ(r.grid.size(), 27u);
    for (std::size_t q = 0; q < 3; ++q) {
        for (std::size_t d = 0; d < r.days; ++d) {
            EXPECT_LE(r.bands[q].lower[d], r.bands[q].mean[d] + 1e-9);
            EXPECT_GE(r.bands[q].upper[d], r.bands[q].mean[d] - 1e-9);
            EXPECT_GE(r.bands[q].lower[d], 0.0);
            const auto& s = r.sobol[q][d];
            if (s.degenerate) continue;
            double sum = 0.0;
            for (unsigned m = 1; m < 8; ++m) sum += s[m];
            EXPECT_NEAR(sum, 1.0, 1e-8);
        }
    }
}

TEST(ApplyFit, CopiesParameters) {
    auto p = epimodels::SuperspreaderParams::defaults();
    cases::apply_fit(nlohmann::json{{"parameters", {{"s", 0.5}, {"c2", 0.2}}}}, p);
    EXPECT_EQ(p.profile.s, 0.5);
    EXPECT_EQ(p.schedule.c2, 0.2);
    EXPECT_EQ(p.schedule.c1, 0.130);
    EXPECT_THROW(cases::apply_fit(nlohmann::json::object(), p), ConfigError);
}

TEST(Files, HeaderAndDeterminism) {
    config::RunConfig cfg;
    cfg.case_name = "case1";
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    {
        output::Writer w(a, {"case1", cfg.hash()});
        cases::run_case1(cfg, w);
    }
    setenv("EPICHAOS_THREADS", "1", 1);
    {
        output::Writer w(b, {"case1", cfg.hash()});
        cases::run_case1(cfg, w);
    }
    unsetenv("EPICHAOS_THREADS");
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto other = b / entry.path().filename();
        ASSERT_TRUE(fs::exists(other));
        EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
        ++compared;
    }
    EXPECT_EQ(compared, 5u);
    const auto csv = slurp(a / "case1_sobol.csv");
    EXPECT_EQ(csv.rfind("# epichaos ", 0), 0u);
    EXPECT_NE(csv.find("# config_hash fnv1a64:" + cfg.hash()), std::string::npos);
    const auto summary = nlohmann::json::parse(slurp(a / "case1_summary.json"));
    EXPECT_EQ(summary["header"]["config_hash"], "fnv1a64:" + cfg.hash());
    EXPECT_EQ(summary["solves"], 27);
}

TEST(Synth, DataCarriesGrowthRate) {
    config::RunConfig cfg;
    const auto dir = scratch("synth");
    output::Writer w(dir, {"synth", cfg.hash()});
    cases::run_synth(cfg, w);
    const auto data = calibrate::read_admissions_csv((dir / "synthetic_admissions.csv").string());
    EXPECT_EQ(data.size(), 110u);
    ASSERT_TRUE(data.metadata.count("growth_rate"));
    EXPECT_NEAR(std::stod(data.metadata.at("growth_rate")), 0.3319, 1e-4);
}
