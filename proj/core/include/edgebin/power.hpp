#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edgebin/errors.hpp"

namespace edgebin {

struct PowerProfile {
    std::string device;
    double active_w = 0.0;   // >= standby_w >= 0
    double standby_w = 0.0;
};

struct MonthSample {
    std::string month;  // "jan".."dec" or any label
    double irradiation;  // H, Wh/m^2/day on the plane normal to the sun rays
};

struct IrradiationSeries {
    std::vector<MonthSample> months;
};

struct SolarRig {
    double area_m2 = 0.0;          // > 0
    double efficiency = 0.0;       // r in [0, 1]
    double battery_wh = 0.0;
    double roundtrip_efficiency = 1.0;  // battery charge/discharge, ideal by default
};

// capacity / draw. ZeroDraw when the load is not positive.
double battery_life_hours(double capacity_wh, double draw_w);

// E = A * r * H (Wh/day), times the battery round-trip factor.
double daily_energy_wh(const SolarRig& rig, double irradiation);

struct MonthReport {
    std::string month;
    double e_day_wh = 0.0;
    double sustainable_w = 0.0;  // e_day / 24
    bool feasible = false;       // sustainable_w >= active_w (inclusive)
};

struct FeasibilityReport {
    std::vector<MonthReport> months;
    int worst_month_index = -1;  // argmin e_day
    bool feasible = false;       // worst month feasible
};

FeasibilityReport feasibility(const SolarRig& rig, const IrradiationSeries& series,
                              const PowerProfile& profile);

// CSV `month,e_day_wh`, one row per month.
std::string emit_energy_curve(const SolarRig& rig, const IrradiationSeries& series);

// CSV `month,irradiation_wh_per_m2_day`; '#' lines are comments.
IrradiationSeries read_irradiation_csv(const std::filesystem::path& csv);

}  // namespace edgebin
