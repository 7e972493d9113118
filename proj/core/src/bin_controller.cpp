#include "edgebin/bin_controller.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "edgebin/graph.hpp"

namespace edgebin {

std::string state_name(const BinState& s) {
    if (std::holds_alternative<Idle>(s)) return "idle";
    if (std::holds_alternative<HandHold>(s)) return "hand_hold";
    if (const auto* o = std::get_if<Observing>(&s))
        return "observing(" + o->label + "," + std::to_string(o->streak) + ")";
    const auto& sort = std::get<Sorting>(s);
    return "sorting(" + sort.container + ")";
}

std::string action_name(const BinAction& a) {
    if (const auto* d = std::get_if<OpenDoor>(&a)) return "open_door:" + d->container;
    return "alarm";
}

namespace {

bool valid_label(const std::string& label) {
    const auto& all = bin_class_labels();
    return std::find(all.begin(), all.end(), label) != all.end();
}

StepResult classify_step(const BinState& state, const Classified& ev,
                         const ControllerConfig& cfg) {
    StepResult r{state, {}, std::nullopt};
    if (!valid_label(ev.label)) {
        r.error = "InvalidTransition: unknown label '" + ev.label + "'";
        return r;
    }
    if (ev.confidence < 0.0 || ev.confidence > 1.0) {
        r.error = "InvalidTransition: confidence outside [0,1]";
        return r;
    }

    // while sorting, the camera view is the moving item; classifications are ignored
    if (std::holds_alternative<Sorting>(state)) return r;

    // hand overrides confidence: always hold, never act
    if (ev.label == "hand") {
        r.state = HandHold{};
        return r;
    }
    if (ev.confidence < cfg.confidence_threshold) {
        r.state = Idle{};
        return r;
    }
    if (ev.label == "empty") {
        r.state = Idle{};
        return r;
    }

    // confident recycling classification: extend or restart the streak
    int streak = 1;
    if (const auto* obs = std::get_if<Observing>(&state))
        if (obs->label == ev.label) streak = obs->streak + 1;

    if (streak >= cfg.stability_window) {
        r.state = Sorting{ev.label, 0};
        r.actions.push_back(OpenDoor{ev.label});
    } else {
        r.state = Observing{ev.label, streak};
    }
    return r;
}

}  // namespace

StepResult step(const BinState& state, const BinEvent& event, const ControllerConfig& cfg) {
    if (cfg.stability_window < 1)
        throw Error(ErrorCode::InvalidArgument, "stability window must be >= 1");
    if (cfg.sort_timeout < 1)
        throw Error(ErrorCode::InvalidArgument, "sort timeout must be >= 1");
    if (cfg.confidence_threshold < 0.0 || cfg.confidence_threshold > 1.0)
        throw Error(ErrorCode::InvalidArgument, "confidence threshold must be in [0,1]");

    if (const auto* ev = std::get_if<Classified>(&event)) return classify_step(state, *ev, cfg);

    StepResult r{state, {}, std::nullopt};
    if (std::holds_alternative<SortComplete>(event)) {
        if (std::holds_alternative<Sorting>(state)) {
            r.state = Idle{};
        } else {
            r.error = "InvalidTransition: SortComplete while " + state_name(state);
        }
        return r;
    }
    if (std::holds_alternative<Timeout>(event)) {
        if (std::holds_alternative<Sorting>(state)) {
            r.actions.push_back(Alarm{});
            r.state = Idle{};
        } else {
            r.error = "InvalidTransition: Timeout while " + state_name(state);
        }
        return r;
    }
    // Tick: only the sorting state keeps time
    if (const auto* sorting = std::get_if<Sorting>(&state)) {
        Sorting next = *sorting;
        next.ticks_waited++;
        if (next.ticks_waited >= cfg.sort_timeout) {
            r.actions.push_back(Alarm{});
            r.state = Idle{};
        } else {
            r.state = next;
        }
    }
    return r;
}

ScenarioResult run_scenario(const std::vector<BinEvent>& script, const ControllerConfig& cfg) {
    ScenarioResult result;
    result.final_state = Idle{};
    for (size_t i = 0; i < script.size(); ++i) {
        StepResult r = step(result.final_state, script[i], cfg);
        result.final_state = r.state;
        for (const BinAction& a : r.actions) result.log.push_back({i, a, std::nullopt});
        if (r.error) result.log.push_back({i, std::nullopt, r.error});
    }
    return result;
}

std::vector<BinEvent> read_event_trace(const std::filesystem::path& csv) {
    std::ifstream f(csv);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + csv.string());
    std::vector<BinEvent> events;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind, label, conf;
        std::getline(ls, kind, ',');
        std::getline(ls, label, ',');
        std::getline(ls, conf, ',');
        if (first && kind == "event") {  // header
            first = false;
            continue;
        }
        first = false;
        if (kind == "classified") {
            double c = 1.0;
            if (!conf.empty()) c = std::stod(conf);
            events.push_back(Classified{label, c});
        } else if (kind == "sort_complete") {
            events.push_back(SortComplete{});
        } else if (kind == "timeout") {
            events.push_back(Timeout{});
        } else if (kind == "tick") {
            events.push_back(Tick{});
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown event kind '" + kind + "'");
        }
    }
    return events;
}

void write_action_log(const ScenarioResult& result, std::ostream& out) {
    out << "event_index,entry,detail\n";
    for (const auto& e : result.log) {
        if (e.action) {
            if (const auto* d = std::get_if<OpenDoor>(&*e.action))
                out << e.event_index << ",open_door," << d->container << "\n";
            else
                out << e.event_index << ",alarm,\n";
        } else if (e.error) {
            out << e.event_index << ",error," << *e.error << "\n";
        }
    }
    out << "final_state," << state_name(result.final_state) << ",\n";
}

}  // namespace edgebin
