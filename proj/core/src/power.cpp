#include "edgebin/power.hpp"

#include <fstream>
#include <sstream>

namespace edgebin {

double battery_life_hours(double capacity_wh, double draw_w) {
    if (draw_w <= 0.0)
        throw Error(ErrorCode::ZeroDraw, "battery life is undefined for non-positive draw");
    if (capacity_wh < 0.0)
        throw Error(ErrorCode::InvalidArgument, "battery capacity must be non-negative");
    return capacity_wh / draw_w;
}

double daily_energy_wh(const SolarRig& rig, double irradiation) {
    if (rig.area_m2 <= 0.0) throw Error(ErrorCode::InvalidArgument, "panel area must be positive");
    if (rig.efficiency < 0.0 || rig.efficiency > 1.0)
        throw Error(ErrorCode::InvalidArgument, "efficiency must be in [0,1]");
    if (irradiation < 0.0)
        throw Error(ErrorCode::InvalidArgument, "irradiation must be non-negative");
    return rig.area_m2 * rig.efficiency * irradiation * rig.roundtrip_efficiency;
}

FeasibilityReport feasibility(const SolarRig& rig, const IrradiationSeries& series,
                              const PowerProfile& profile) {
    if (series.months.empty())
        throw Error(ErrorCode::EmptySeries, "irradiation series has no months");

    FeasibilityReport report;
    for (const MonthSample& m : series.months) {
        MonthReport r;
        r.month = m.month;
        r.e_day_wh = daily_energy_wh(rig, m.irradiation);
        r.sustainable_w = r.e_day_wh / 24.0;
        r.feasible = r.sustainable_w >= profile.active_w;
        report.months.push_back(r);
    }
    report.worst_month_index = 0;
    for (size_t i = 1; i < report.months.size(); ++i)
        if (report.months[i].e_day_wh < report.months[static_cast<size_t>(report.worst_month_index)].e_day_wh)
            report.worst_month_index = static_cast<int>(i);
    report.feasible = report.months[static_cast<size_t>(report.worst_month_index)].feasible;
    return report;
}

std::string emit_energy_curve(const SolarRig& rig, const IrradiationSeries& series) {
    std::ostringstream os;
    os << "month,e_day_wh\n";
    os.precision(12);
    for (const MonthSample& m : series.months)
        os << m.month << "," << daily_energy_wh(rig, m.irradiation) << "\n";
    return os.str();
}

IrradiationSeries read_irradiation_csv(const std::filesystem::path& csv) {
    std::ifstream f(csv);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + csv.string());
    IrradiationSeries series;
    std::string line;
    bool maybe_header = true;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string month, value;
        std::getline(ls, month, ',');
        std::getline(ls, value, ',');
        if (maybe_header) {
            maybe_header = false;
            try {
                std::stod(value);
            } catch (...) {
                continue;  // header row
            }
        }
        try {
            series.months.push_back({month, std::stod(value)});
        } catch (...) {
            throw Error(ErrorCode::InvalidArgument,
                        "bad irradiation value '" + value + "' for month '" + month + "'");
        }
    }
    return series;
}

}  // namespace edgebin
