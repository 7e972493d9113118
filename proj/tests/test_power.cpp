#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "edgebin/power.hpp"
#include "edgebin/rng.hpp"
#include "test_support.hpp"

using namespace edgebin;

TEST_CASE("the 92.5 Wh pack at 3.97 W lasts 23.3 hours") {
    CHECK(battery_life_hours(92.5, 3.97) == doctest::Approx(23.30).epsilon(0.002));
    CHECK(battery_life_hours(10.0, 1.0) == 10.0);
    CHECK(battery_life_hours(48.0, 0.89) == doctest::Approx(53.93).epsilon(0.001));
}

TEST_CASE("zero or negative draw is rejected") {
    try {
        battery_life_hours(10.0, 0.0);
        FAIL("expected ZeroDraw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDraw);
    }
}

TEST_CASE("battery life strictly decreases in draw") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        double cap = rng.uniform(1.0, 200.0);
        double d1 = rng.uniform(0.1, 10.0);
        double d2 = d1 + rng.uniform(0.01, 5.0);
        CHECK(battery_life_hours(cap, d1) > battery_life_hours(cap, d2));
    }
}

TEST_CASE("daily energy is A*r*H") {
    SolarRig unit{1.0, 1.0, 0.0, 1.0};
    CHECK(daily_energy_wh(unit, 5.0) == 5.0);
    CHECK(daily_energy_wh(unit, 0.0) == 0.0);

    // the November reconstruction: 0.16 m^2 at 22% supplying 1.9 W needs
    // H = 1.9 * 24 / (0.16 * 0.22) = 1295.45 Wh/m^2/day
    SolarRig rig{0.16, 0.22, 48.0, 1.0};
    const double h_november = 1.9 * 24.0 / (0.16 * 0.22);
    CHECK(h_november == doctest::Approx(1295.4545).epsilon(1e-6));
    CHECK(daily_energy_wh(rig, h_november) == doctest::Approx(45.6).epsilon(1e-9));
    CHECK(daily_energy_wh(rig, h_november) / 24.0 == doctest::Approx(1.9).epsilon(1e-9));
}

TEST_CASE("linearity of the energy equation over 1000 random draws") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double a = rng.uniform(0.01, 2.0);
        double r = rng.uniform(0.01, 1.0);
        double h = rng.uniform(0.0, 8000.0);
        double k = rng.uniform(0.1, 10.0);
        SolarRig rig{a, r, 0.0, 1.0};
        SolarRig scaled_area{a * k, r, 0.0, 1.0};
        CHECK(daily_energy_wh(scaled_area, h) ==
              doctest::Approx(k * daily_energy_wh(rig, h)).epsilon(1e-12));
        CHECK(daily_energy_wh(rig, k * h) ==
              doctest::Approx(k * daily_energy_wh(rig, h)).epsilon(1e-12));
    }
}

namespace {

IrradiationSeries synthetic_year(double november_h) {
    IrradiationSeries s;
    const char* names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                           "jul", "aug", "sep", "oct", "nov", "dec"};
    const double base[] = {1800, 2400, 3400, 4600, 5400, 5800,
                           5600, 5000, 4000, 2800, 0,    1500};
    for (int i = 0; i < 12; ++i)
        s.months.push_back({names[i], i == 10 ? november_h : base[i]});
    return s;
}

}  // namespace

TEST_CASE("feasibility: worst month drives the verdict; 1.9 W covers the 0.89 W load") {
    SolarRig rig{0.16, 0.22, 48.0, 1.0};
    PowerProfile k210{"k210", 0.89, 0.0};
    IrradiationSeries series = synthetic_year(1295.4545454545);

    FeasibilityReport report = feasibility(rig, series, k210);
    CHECK(report.worst_month_index == 10);  // november
    CHECK(report.months[10].sustainable_w == doctest::Approx(1.9).epsilon(1e-6));
    CHECK(report.feasible);

    // a hungrier load tips the same series to infeasible
    PowerProfile jetson{"jetson", 4.698, 3.97};
    CHECK(!feasibility(rig, series, jetson).feasible);
}

TEST_CASE("boundary: sustainable exactly equal to the load is feasible") {
    SolarRig rig{1.0, 1.0, 0.0, 1.0};
    PowerProfile load{"dev", 1.0, 0.0};
    IrradiationSeries flat;
    for (int i = 0; i < 12; ++i) flat.months.push_back({"m" + std::to_string(i), 24.0});
    FeasibilityReport r = feasibility(rig, flat, load);
    CHECK(r.months[0].sustainable_w == 1.0);
    CHECK(r.feasible);
}

TEST_CASE("scaling the series scales energy but keeps the worst month") {
    SolarRig rig{0.2, 0.2, 0.0, 1.0};
    PowerProfile load{"dev", 0.5, 0.0};
    IrradiationSeries series = synthetic_year(900.0);
    FeasibilityReport base = feasibility(rig, series, load);

    IrradiationSeries scaled = series;
    for (auto& m : scaled.months) m.irradiation *= 3.0;
    FeasibilityReport r3 = feasibility(rig, scaled, load);
    CHECK(r3.worst_month_index == base.worst_month_index);
    for (size_t i = 0; i < 12; ++i)
        CHECK(r3.months[i].e_day_wh == doctest::Approx(3.0 * base.months[i].e_day_wh));
}

TEST_CASE("verdict is invariant under month reordering") {
    SolarRig rig{0.16, 0.22, 48.0, 1.0};
    PowerProfile load{"k210", 0.89, 0.0};
    IrradiationSeries series = synthetic_year(1295.0);
    IrradiationSeries shuffled;
    for (int i = 11; i >= 0; --i) shuffled.months.push_back(series.months[static_cast<size_t>(i)]);
    CHECK(feasibility(rig, series, load).feasible ==
          feasibility(rig, shuffled, load).feasible);
}

TEST_CASE("empty series is rejected") {
    try {
        feasibility(SolarRig{1, 1, 0, 1}, IrradiationSeries{}, PowerProfile{"x", 1, 0});
        FAIL("expected EmptySeries");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptySeries);
    }
}

TEST_CASE("energy curve emits one row per month and recomputes exactly") {
    SolarRig rig{0.16, 0.22, 48.0, 1.0};
    IrradiationSeries series = synthetic_year(1295.0);
    std::string csv = emit_energy_curve(rig, series);

    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "month,e_day_wh");
    int rows = 0;
    while (std::getline(is, line)) {
        auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        double value = std::stod(line.substr(comma + 1));
        CHECK(std::fabs(value -
                        daily_energy_wh(rig, series.months[static_cast<size_t>(rows)].irradiation)) <=
              1e-9);
        rows++;
    }
    CHECK(rows == 12);

    // constant series gives a constant curve
    IrradiationSeries flat;
    for (int i = 0; i < 12; ++i) flat.months.push_back({"m" + std::to_string(i), 1000.0});
    std::string flat_csv = emit_energy_curve(rig, flat);
    std::istringstream fs(flat_csv);
    std::getline(fs, line);
    std::string first;
    while (std::getline(fs, line)) {
        std::string v = line.substr(line.find(',') + 1);
        if (first.empty())
            first = v;
        else
            CHECK(v == first);
    }
}

TEST_CASE("irradiation csv reader skips comments and headers") {
    auto dir = testsupport::scratch_dir("power_csv");
    {
        std::ofstream f(dir / "irr.csv");
        f << "# synthetic data\n";
        f << "month,irradiation_wh_per_m2_day\n";
        f << "jan,1800\nfeb,2400\n";
    }
    IrradiationSeries s = read_irradiation_csv(dir / "irr.csv");
    REQUIRE(s.months.size() == 2);
    CHECK(s.months[0].month == "jan");
    CHECK(s.months[1].irradiation == 2400.0);
}

TEST_CASE("round-trip efficiency scales the budget") {
    SolarRig ideal{0.16, 0.22, 48.0, 1.0};
    SolarRig lossy = ideal;
    lossy.roundtrip_efficiency = 0.8;
    CHECK(daily_energy_wh(lossy, 1000.0) ==
          doctest::Approx(0.8 * daily_energy_wh(ideal, 1000.0)));
}
