#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edgebin/errors.hpp"

namespace edgebin {

// ---- events ----

struct Classified {
    std::string label;  // one of the seven bin classes
    double confidence;  // [0, 1]
    bool operator==(const Classified&) const = default;
};
struct SortComplete {
    bool operator==(const SortComplete&) const = default;
};
struct Timeout {
    bool operator==(const Timeout&) const = default;
};
struct Tick {
    bool operator==(const Tick&) const = default;
};

using BinEvent = std::variant<Classified, SortComplete, Timeout, Tick>;

// ---- states ----

struct Idle {
    bool operator==(const Idle&) const = default;
};
struct Observing {
    std::string label;  // candidate recycling class
    int streak;         // [1, N]
    bool operator==(const Observing&) const = default;
};
struct HandHold {
    bool operator==(const HandHold&) const = default;
};
struct Sorting {
    std::string container;  // never hand/empty
    int ticks_waited = 0;
    bool operator==(const Sorting&) const = default;
};

using BinState = std::variant<Idle, Observing, HandHold, Sorting>;

std::string state_name(const BinState& s);

// ---- actions ----

struct OpenDoor {
    std::string container;
    bool operator==(const OpenDoor&) const = default;
};
struct Alarm {
    bool operator==(const Alarm&) const = default;
};
using BinAction = std::variant<OpenDoor, Alarm>;

std::string action_name(const BinAction& a);

struct ControllerConfig {
    int stability_window = 3;        // N >= 1 consecutive confident frames
    double confidence_threshold = 0.6;  // tau
    int sort_timeout = 50;           // ticks before a stuck sort alarms
};

struct StepResult {
    BinState state;
    std::vector<BinAction> actions;
    std::optional<std::string> error;  // InvalidTransition report, state unchanged
};

// Pure transition function. Hand classifications (any confidence) from any
// non-sorting state hold the bin; doors only open after `stability_window`
// consecutive confident classifications of the same recycling class.
StepResult step(const BinState& state, const BinEvent& event, const ControllerConfig& config);

struct ScenarioLogEntry {
    size_t event_index;
    std::optional<BinAction> action;
    std::optional<std::string> error;
};

struct ScenarioResult {
    std::vector<ScenarioLogEntry> log;
    BinState final_state;
};

ScenarioResult run_scenario(const std::vector<BinEvent>& script, const ControllerConfig& config);

// CSV rows `event,label,confidence` with event in
// {classified, sort_complete, timeout, tick}.
std::vector<BinEvent> read_event_trace(const std::filesystem::path& csv);
void write_action_log(const ScenarioResult& result, std::ostream& out);

}  // namespace edgebin
