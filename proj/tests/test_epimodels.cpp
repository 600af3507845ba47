#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "epichaos/epimodels.hpp"

using namespace epichaos;
using namespace epichaos::epimodels;

namespace {

SeirParams case1_params(double r0 = 1.4) { return SeirParams::from_durations(r0, 4.2, 3.3); }

SeirState case1_initial(double population = kDanishPopulation) { return {population - 100.0, 0.0, 100.0, 0.0}; }

ode::Trajectory sampled_bump(double center) {
    ode::Trajectory t;
    for (int i = 0; i <= 100; ++i) {
        const double x = i - center;
        t.times.push_back(i);
        t.states.push_back({std::exp(-x * x / 200.0)});
        t.derivatives.push_back({-x / 100.0 * std::exp(-x * x / 200.0)});
    }
    return t;
}

}  // namespace

TEST(Seir, RhsAtKnownState) {
    SeirParams p;
    p.beta = 0.5;
    p.sigma = 0.2;
    p.gamma = 0.2;
    p.population = 1000;
    const auto d = seir_rhs({990, 0, 10, 0}, 0.0, p);
    EXPECT_DOUBLE_EQ(d[0], -4.95);
    EXPECT_DOUBLE_EQ(d[1], 4.95);
    EXPECT_DOUBLE_EQ(d[2], -2.0);
    EXPECT_DOUBLE_EQ(d[3], 2.0);
}

TEST(Seir, DurationsToRates) {
    const auto p = SeirParams::from_durations(2.5, 5.0, 5.0);
    EXPECT_DOUBLE_EQ(p.sigma, 0.2);
    EXPECT_DOUBLE_EQ(p.gamma, 0.2);
    EXPECT_DOUBLE_EQ(p.beta, 0.5);
    EXPECT_DOUBLE_EQ(p.r0(), 2.5);
    EXPECT_THROW(SeirParams::from_durations(2.5, 0.0, 5.0), ConfigError);
}

TEST(Seir, ConservesPopulation) {
    const auto traj = simulate_seir(case1_params(), case1_initial(), 1000.0);
    for (const auto& s : traj.states) {
        EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0) / kDanishPopulation, 1.0, 1e-10);
        for (double v : s) EXPECT_GT(v, -1e-6 * kDanishPopulation);
    }
}

TEST(Seir, PeakScaleInvariantInPopulation) {
    const auto a = simulate_seir(case1_params(), case1_initial(), 1000.0);
    auto p = case1_params();
    p.population = 10 * kDanishPopulation;
    SeirState y0 = case1_initial();
    for (auto& v : y0) v *= 10.0;
    const auto b = simulate_seir(p, y0, 1000.0);
    const auto [ta, ia] = find_peak(a, 2);
    const auto [tb, ib] = find_peak(b, 2);
    EXPECT_NEAR(ta, tb, 1e-5);
    EXPECT_NEAR(ib / ia, 10.0, 1e-6);
}

TEST(Seir, PeakIncreasesWithR0) {
    double prev_height = 0.0, prev_time = INFINITY;
    for (double r0 : {1.3, 1.4, 1.6, 2.0}) {
        const auto [t, h] = find_peak(simulate_seir(case1_params(r0), case1_initial(), 1500.0), 2);
        EXPECT_GT(h, prev_height);
        EXPECT_LT(t, prev_time);
        prev_height = h;
        prev_time = t;
    }
}

TEST(Seir, PlausibleCaseOneScale) {
    const auto [t, h] = find_peak(simulate_seir(case1_params(), case1_initial(), 1500.0), 2);
    EXPECT_GT(t, 100.0);
    EXPECT_LT(t, 400.0);
    EXPECT_GT(h / kDanishPopulation, 0.005);
    EXPECT_LT(h / kDanishPopulation, 0.05);
}

TEST(Seir, IntegratorOrderOnModel) {
    auto p = case1_params();
    auto run = [&](std::optional<double> h) {
        auto opt = default_options(p.population);
        if (h) opt.fixed_step = *h;
        else {
            opt.rtol = 1e-13;
            opt.atol = 1e-6;
        }
        return simulate_seir(p, {p.population - 1e5, 0.0, 1e5, 0.0}, 40.0, opt).states.back()[2];
    };
    const double ref = run(std::nullopt);
    const double e1 = std::abs(run(2.0) - ref);
    const double e2 = std::abs(run(1.0) - ref);
    const double e3 = std::abs(run(0.5) - ref);
    EXPECT_GE(std::log2(e1 / e2), 4.0);
    EXPECT_GE(std::log2(e2 / e3), 4.0);
}

TEST(FindPeak, RefinesBetweenSamples) {
    const auto [t, v] = find_peak(sampled_bump(50.03), 0);
    EXPECT_NEAR(t, 50.03, 0.05);
    EXPECT_NEAR(v, 1.0, 1e-4);
    auto no_slopes = sampled_bump(49.71);
    no_slopes.derivatives.clear();
    EXPECT_NEAR(find_peak(no_slopes, 0).first, 49.71, 0.05);
}

TEST(FindPeak, NoTakeOff) {
    auto p = case1_params(0.8);
    try {
        find_peak(simulate_seir(p, case1_initial(), 200.0), 2);
        FAIL() << "expected NoPeakError";
    } catch (const NoPeakError& e) {
        EXPECT_EQ(e.reason(), NoPeakError::Reason::NeverTakesOff);
    }
}

TEST(FindPeak, HorizonTooShort) {
    try {
        find_peak(simulate_seir(case1_params(), case1_initial(), 30.0), 2);
        FAIL() << "expected NoPeakError";
    } catch (const NoPeakError& e) {
        EXPECT_EQ(e.reason(), NoPeakError::Reason::HorizonTooShort);
    }
}

TEST(AgeTable, HospitalizationSplit) {
    const auto split = hospitalization_split(default_age_table());
    EXPECT_NEAR(split.z1, 0.01924966, 1e-12);
    EXPECT_NEAR(split.z2, 0.2981040184605858, 1e-12);
}

TEST(AgeTable, RejectsBadShares) {
    auto table = default_age_table();
    table[0].share += 0.1;
    EXPECT_THROW(hospitalization_split(table), ConfigError);
}

TEST(Infectivity, Multiplier) {
    InfectivityProfile prof;
    EXPECT_NEAR(prof.multiplier(), 36.0, 1e-12);
    EXPECT_NEAR(prof.unrestricted_mean(), 4.5 * prof.s, 1e-12);
    EXPECT_NEAR(prof.unrestricted_mean(), 2.709, 1e-12);
}

TEST(Infectivity, CappedMean) {
    InfectivityProfile prof;
    prof.s = 0.602;
    EXPECT_NEAR(effective_beta(prof, 0.130), 0.130, 1e-15);
    EXPECT_NEAR(effective_beta(prof, 1.0), 0.1 * 1.0 + 0.9 * 0.602, 1e-15);
    EXPECT_NEAR(effective_beta(prof, std::nullopt), 2.709, 1e-12);
    prof.s = 0.1;
    EXPECT_NEAR(effective_beta(prof, 0.130), 0.1 * 0.130 + 0.9 * 0.1, 1e-15);
}

TEST(Restrictions, PiecewiseSchedule) {
    RestrictionSchedule sched;
    EXPECT_EQ(sched.cap(0.0), 1.0);
    EXPECT_EQ(sched.cap(16.0), 1.0);
    EXPECT_EQ(sched.cap(16.5), 0.130);
    EXPECT_EQ(sched.cap(50.0), 0.187);
    EXPECT_EQ(sched.cap(100.0), 0.188);
    sched.initial_level.reset();
    EXPECT_FALSE(sched.cap(3.0).has_value());
    EXPECT_EQ(sched.reported_level(3.0), 1.0);
}

TEST(Superspreader, AdmissionInflow) {
    const auto p = SuperspreaderParams::defaults();
    SuperspreaderState y{};
    y[kS] = p.population;
    y[kW] = 1.0 / (p.gamma3 * p.z1);
    const auto d = superspreader_rhs(y, 0.0, p);
    EXPECT_NEAR(d[kAdmitted], 1.0, 1e-12);
    EXPECT_NEAR(d[kH], 1.0, 1e-12);
}

TEST(Superspreader, RhsConservesLivePopulation) {
    const auto p = SuperspreaderParams::defaults();
    const SuperspreaderState y = {5e6, 1e4, 2e4, 3e4, 4e3, 500, 100, 7e5, 900};
    for (double t : {0.0, 20.0, 60.0, 120.0}) {
        const auto d = superspreader_rhs(y, t, p);
        double sum = 0.0;
        for (std::size_t i = kS; i <= kR; ++i) sum += d[i];
        EXPECT_NEAR(sum, 0.0, 1e-8);
    }
}

TEST(Superspreader, InitialState) {
    const auto p = SuperspreaderParams::defaults();
    const auto y = initial_state(p);
    EXPECT_NEAR(y[kE] + y[kI1] + y[kI2], p.initial_infected, 1e-12);
    EXPECT_NEAR(y[kS] + y[kE] + y[kI1] + y[kI2], p.population, 1e-6);
    EXPECT_EQ(y[kAdmitted], 0.0);
}

TEST(Superspreader, DefaultRunScale) {
    const auto traj = simulate_superspreader(SuperspreaderParams::defaults(), 150.0);
    ASSERT_EQ(traj.size(), 151u);
    const auto h = traj.component(kH);
    const double peak = *std::max_element(h.begin(), h.end());
    EXPECT_GT(peak, 100.0);
    EXPECT_LT(peak, 5000.0);
    const auto adm = daily_admissions(traj);
    ASSERT_EQ(adm.size(), 150u);
    for (double a : adm) EXPECT_GE(a, -1e-9);
    EXPECT_EQ(traj.observables.at("restriction")[100], 0.188);
    for (const auto& s : traj.states) {
        double sum = 0.0;
        for (std::size_t i = kS; i <= kR; ++i) sum += s[i];
        EXPECT_NEAR(sum / kDanishPopulation, 1.0, 1e-10);
    }
}

TEST(Superspreader, HospitalLoadIncreasesWithRestrictionLevel) {
    double prev = 0.0;
    for (double c1 : {0.10, 0.13, 0.16, 0.19}) {
        auto p = SuperspreaderParams::defaults();
        p.schedule.c1 = c1;
        const auto traj = simulate_superspreader(p, 60.0);
        const double h = traj.states.back()[kH];
        EXPECT_GT(h, prev);
        prev = h;
    }
}

TEST(Superspreader, RejectsInvalidParameters) {
    auto p = SuperspreaderParams::defaults();
    p.z1 = 1.5;
    EXPECT_THROW(simulate_superspreader(p, 10.0), ConfigError);
    p = SuperspreaderParams::defaults();
    p.schedule.t2 = 10.0;
    EXPECT_THROW(simulate_superspreader(p, 10.0), ConfigError);
}

TEST(DailyIncrements, FirstDifferences) {
    ode::Trajectory t;
    t.times = {0, 1, 2};
    t.states = {{0}, {3}, {7}};
    EXPECT_EQ(daily_increments(t, 0), (std::vector<double>{3, 4}));
}
