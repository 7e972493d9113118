// edgebin: build, optimize, quantize, run, benchmark and evaluate the
// bin-classifier models, simulate the bin controller and plan power budgets.
//
// Exit codes: 0 success, 1 domain error (diagnostic on stderr), 2 usage.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edgebin/bench.hpp"
#include "edgebin/bin_controller.hpp"
#include "edgebin/datapipe.hpp"
#include "edgebin/evalkit.hpp"
#include "edgebin/executor.hpp"
#include "edgebin/passes.hpp"
#include "edgebin/power.hpp"
#include "edgebin/quantize.hpp"
#include "edgebin/rng.hpp"
#include "edgebin/serialize.hpp"
#include "edgebin/shape_infer.hpp"
#include "edgebin/validate.hpp"
#include "edgebin/zoo.hpp"

using namespace edgebin;
using nlohmann::json;

namespace {

uint64_t default_seed() {
    if (const char* env = std::getenv("EDGEBIN_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
        }
    }
    return 0;
}

std::pair<int, int> parse_res(const std::string& s) {
    auto x = s.find('x');
    if (x == std::string::npos)
        throw CLI::ValidationError("resolution must look like 224x224 (WxH)");
    try {
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (...) {
        throw CLI::ValidationError("resolution must look like 224x224 (WxH)");
    }
}

Tensor load_input_tensor(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".ppm") return load_image(path);
    return load_tensor(path);
}

json pass_report_json(const PassReport& r) {
    return json{{"pass", r.pass},
                {"nodes_removed", r.nodes_removed},
                {"nodes_added", r.nodes_added},
                {"nodes_fused", r.nodes_fused},
                {"diagnostics", r.diagnostics}};
}

json deployability_json(const DeployabilityReport& r, const TargetProfile& profile) {
    json violations = json::array();
    for (const auto& v : r.violations)
        violations.push_back(json{{"kind", v.kind}, {"detail", v.detail}, {"node", v.node_id}});
    return json{{"target", profile.name},
                {"fits", r.fits},
                {"weight_bytes", r.weight_bytes},
                {"violations", violations}};
}

json bench_report_json(const BenchReport& r) {
    return json{{"model", r.model_id},
                {"path", r.path},
                {"input_shape", r.input_shape},
                {"iterations", r.iterations},
                {"warmup", r.warmup},
                {"latency_mean_s", r.mean_s},
                {"latency_p50_s", r.p50_s},
                {"latency_p95_s", r.p95_s},
                {"ips", r.ips},
                {"weight_bytes", r.weight_bytes},
                {"peak_activation_bytes", r.peak_activation_bytes}};
}

// ---- subcommand payloads ----

struct BuildArgs {
    std::string family = "mobilenet_v1";
    double alpha = 1.0;
    std::string res = "224x224";
    std::string resize_front;
    int classes = 7;
    uint64_t seed = default_seed();
    std::string out;
};

int cmd_build(const BuildArgs& a) {
    ModelSpec spec;
    spec.family = model_family_from_name(a.family);
    spec.alpha = a.alpha;
    spec.input_resolution = parse_res(a.res);
    spec.num_classes = a.classes;
    if (!a.resize_front.empty()) spec.resize_front = parse_res(a.resize_front);

    Graph g = infer_shapes(build(spec, a.seed));
    save(g, a.out);

    json out{{"family", a.family},
             {"alpha", a.alpha},
             {"classes", a.classes},
             {"seed", a.seed},
             {"params", param_count(g)},
             {"estimated_f32_bytes", estimate_file_size(g, DType::F32)},
             {"nodes", g.nodes.size()},
             {"out", a.out}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct OptimizeArgs {
    std::string model;
    std::string out;
    std::string target = "generic";
    std::string passes = "fold,fuse,replace";
};

int cmd_optimize(const OptimizeArgs& a) {
    Graph g = load(a.model);
    TargetProfile profile = profile_by_name(a.target);

    std::vector<std::string> pass_list;
    std::string token;
    std::istringstream ps(a.passes);
    while (std::getline(ps, token, ','))
        if (!token.empty()) pass_list.push_back(token);

    auto [optimized, reports] = run_pipeline(g, profile, pass_list);
    if (!a.out.empty()) save(optimized, a.out);

    json jreports = json::array();
    for (const auto& r : reports) jreports.push_back(pass_report_json(r));
    json out{{"target", profile.name},
             {"passes", jreports},
             {"deployability", deployability_json(check_target(optimized, profile), profile)},
             {"nodes_before", g.nodes.size()},
             {"nodes_after", optimized.nodes.size()}};
    if (!a.out.empty()) out["out"] = a.out;
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct QuantizeArgs {
    std::string model;
    std::string out;
    std::string scheme = "i8";
    std::string calib_dir;
    std::string check_target;
    uint64_t seed = default_seed();
    int synth_calib = 0;
};

int cmd_quantize(const QuantizeArgs& a) {
    Graph g = load(a.model);
    QuantScheme scheme = quant_scheme_from_name(a.scheme);

    QuantizeResult result;
    size_t calib_count = 0;
    if (scheme == QuantScheme::F16) {
        result = quantize(g, scheme);
    } else {
        std::vector<Tensor> dataset;
        if (!a.calib_dir.empty()) {
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(a.calib_dir)) {
                auto ext = entry.path().extension();
                if (ext == ".tensor" || ext == ".ppm") files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) dataset.push_back(load_input_tensor(f.string()));
        }
        if (dataset.empty()) {
            // seeded synthetic calibration inputs as a fallback
            auto shape = attr_ints(g.node(g.inputs[0]), "shape");
            std::vector<int> s(shape.begin(), shape.end());
            int count = a.synth_calib > 0 ? a.synth_calib : 2;
            for (int i = 0; i < count; ++i) {
                Rng rng(derive_seed(a.seed, static_cast<uint64_t>(i)));
                Tensor t = Tensor::f32(s);
                for (int64_t j = 0; j < t.elem_count(); ++j)
                    t.f32_data()[j] = rng.uniform_f(0.0f, 1.0f);
                dataset.push_back(std::move(t));
            }
        }
        calib_count = dataset.size();
        CalibrationStats stats = calibrate(g, dataset);
        result = quantize(g, stats, scheme);
    }
    save(result.graph, a.out);

    json out{{"scheme", a.scheme},
             {"calibration_inputs", calib_count},
             {"weight_bytes_before", g.total_weight_bytes()},
             {"weight_bytes_after", result.graph.total_weight_bytes()},
             {"diagnostics", result.diagnostics},
             {"out", a.out}};
    if (!a.check_target.empty()) {
        TargetProfile profile = profile_by_name(a.check_target);
        out["deployability"] = deployability_json(check_target(result.graph, profile), profile);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct RunArgs {
    std::string model;
    std::string input;
    std::string path = "opt";
    int topk = 3;
    int threads = 1;
    bool pretty = false;
};

int cmd_run(const RunArgs& a) {
    Graph g = load(a.model);
    Tensor input = load_input_tensor(a.input);

    // images are resized to the graph input when needed
    auto want = attr_ints(g.node(g.inputs[0]), "shape");
    if (input.rank() == 3 && want.size() == 3 &&
        (input.dim(0) != want[0] || input.dim(1) != want[1]))
        input = resize_bilinear(input, static_cast<int>(want[1]), static_cast<int>(want[0]));

    Tensor probs = run(g, input, exec_path_from_name(a.path), a.threads);
    auto top = top_k(probs, g.metadata.class_labels, a.topk);

    if (a.pretty) {
        for (const auto& t : top)
            std::cout << t.label << "  " << t.probability * 100.0 << "%\n";
    } else {
        json jtop = json::array();
        for (const auto& t : top)
            jtop.push_back(
                json{{"index", t.index}, {"label", t.label}, {"probability", t.probability}});
        std::cout << json{{"top_k", jtop}, {"path", a.path}}.dump(2) << "\n";
    }
    return 0;
}

struct BenchArgs {
    std::string model;
    std::string input;
    std::string path = "opt";
    int iters = 100;
    int warmup = 10;
    int threads = 1;
    uint64_t seed = default_seed();
    bool pretty = false;
};

int cmd_bench(const BenchArgs& a) {
    Graph g = load(a.model);
    Tensor input;
    if (!a.input.empty()) {
        input = load_input_tensor(a.input);
    } else {
        auto shape = attr_ints(g.node(g.inputs[0]), "shape");
        std::vector<int> s(shape.begin(), shape.end());
        Rng rng(a.seed);
        input = Tensor::f32(s);
        for (int64_t j = 0; j < input.elem_count(); ++j)
            input.f32_data()[j] = rng.uniform_f(0.0f, 1.0f);
    }

    BenchReport r = measure(g, input, exec_path_from_name(a.path), a.iters, a.warmup, a.threads);
    if (a.pretty) {
        std::cout << "model:   " << r.model_id << " (" << r.path << ")\n"
                  << "mean:    " << r.mean_s * 1000.0 << " ms\n"
                  << "p50/p95: " << r.p50_s * 1000.0 << " / " << r.p95_s * 1000.0 << " ms\n"
                  << "ips:     " << r.ips << "\n"
                  << "weights: " << r.weight_bytes << " B\n"
                  << "peak:    " << r.peak_activation_bytes << " B\n";
    } else {
        std::cout << bench_report_json(r).dump(2) << "\n";
    }
    return 0;
}

struct MetricsArgs {
    std::string preds;
    bool pretty = false;
};

int cmd_metrics(const MetricsArgs& a) {
    std::ifstream f(a.preds);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + a.preds);
    std::vector<std::string> truths, preds;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string t, p;
        std::getline(ls, t, ',');
        std::getline(ls, p, ',');
        if (first && t == "truth") {
            first = false;
            continue;
        }
        first = false;
        truths.push_back(t);
        preds.push_back(p);
    }

    // label set: canonical bin labels if everything fits, else the sorted union
    std::set<std::string> distinct(truths.begin(), truths.end());
    distinct.insert(preds.begin(), preds.end());
    std::vector<std::string> labels;
    const auto& canon = bin_class_labels();
    bool canonical = true;
    for (const auto& l : distinct)
        canonical &= std::find(canon.begin(), canon.end(), l) != canon.end();
    if (canonical)
        labels = canon;
    else
        labels.assign(distinct.begin(), distinct.end());

    ConfusionMatrix cm = confusion(truths, preds, labels);
    Metrics m = metrics(cm);

    if (a.pretty) {
        std::cout << format_metrics_table(cm, m);
        return 0;
    }
    json jprec = json::array(), jrec = json::array();
    for (int i = 0; i < cm.size(); ++i) {
        jprec.push_back(m.per_class_precision[static_cast<size_t>(i)]
                            ? json(*m.per_class_precision[static_cast<size_t>(i)])
                            : json(nullptr));
        jrec.push_back(m.per_class_recall[static_cast<size_t>(i)]
                           ? json(*m.per_class_recall[static_cast<size_t>(i)])
                           : json(nullptr));
    }
    json out{{"labels", cm.labels},
             {"total", cm.total()},
             {"top1_accuracy", m.top1_accuracy},
             {"per_class_precision", jprec},
             {"per_class_recall", jrec},
             {"macro_precision", m.macro_precision},
             {"macro_excludes_undefined", m.macro_excludes_undefined},
             {"confusion", cm.counts}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct SplitArgs {
    std::string manifest;
    std::string ratios = "0.7,0.15,0.15";
    uint64_t seed = default_seed();
    std::string out_prefix = "split";
};

int cmd_split(const SplitArgs& a) {
    DatasetManifest m = read_manifest(a.manifest);
    SplitRatios ratios;
    std::istringstream rs(a.ratios);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(rs, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 3) throw Error(ErrorCode::BadRatios, "need train,val,test ratios");
    ratios = {vals[0], vals[1], vals[2]};

    SplitResult r = split(m, ratios, a.seed);
    write_manifest(r.train, a.out_prefix + "_train.csv");
    write_manifest(r.val, a.out_prefix + "_val.csv");
    write_manifest(r.test, a.out_prefix + "_test.csv");

    json out{{"seed", a.seed},
             {"total", m.entries.size()},
             {"train", r.train.entries.size()},
             {"val", r.val.entries.size()},
             {"test", r.test.entries.size()},
             {"out_prefix", a.out_prefix}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

struct SimulateArgs {
    std::string script;
    std::string config;
    bool live = false;
    std::string model;
    std::string images;
    int stability_window = -1;
    double confidence_threshold = -1.0;
    int sort_timeout = -1;
};

int cmd_simulate(const SimulateArgs& a) {
    ControllerConfig cfg;
    if (!a.config.empty()) {
        std::ifstream f(a.config);
        if (!f) throw Error(ErrorCode::Io, "cannot open " + a.config);
        json j = json::parse(f, nullptr, true, true);
        cfg.stability_window = j.value("stability_window", cfg.stability_window);
        cfg.confidence_threshold = j.value("confidence_threshold", cfg.confidence_threshold);
        cfg.sort_timeout = j.value("sort_timeout", cfg.sort_timeout);
    }
    if (a.stability_window > 0) cfg.stability_window = a.stability_window;
    if (a.confidence_threshold >= 0.0) cfg.confidence_threshold = a.confidence_threshold;
    if (a.sort_timeout > 0) cfg.sort_timeout = a.sort_timeout;

    std::vector<BinEvent> events;
    if (a.live) {
        if (a.model.empty() || a.images.empty())
            throw Error(ErrorCode::InvalidArgument, "--live needs --model and --images");
        Graph g = load(a.model);
        auto want = attr_ints(g.node(g.inputs[0]), "shape");
        ExecutionPlan p = plan(g, ExecPath::Optimized);
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(a.images))
            if (entry.path().extension() == ".ppm") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            Tensor img = load_image(file);
            if (img.dim(0) != want[0] || img.dim(1) != want[1])
                img = resize_bilinear(img, static_cast<int>(want[1]),
                                      static_cast<int>(want[0]));
            Tensor probs = run_plan(g, p, img);
            auto top = top_k(probs, g.metadata.class_labels, 1);
            events.push_back(Classified{top[0].label, top[0].probability});
        }
    } else {
        if (a.script.empty())
            throw Error(ErrorCode::InvalidArgument, "need --script (or --live)");
        events = read_event_trace(a.script);
    }

    ScenarioResult result = run_scenario(events, cfg);
    write_action_log(result, std::cout);
    return 0;
}

struct PowerArgs {
    double area_cm2 = 1600.0;
    double efficiency = 0.22;
    double battery_wh = 48.0;
    double load_w = 0.89;
    double standby_w = 0.0;
    double roundtrip = 1.0;
    std::string irradiation;
    std::string curve_out;
};

int cmd_power(const PowerArgs& a) {
    SolarRig rig{a.area_cm2 / 10000.0, a.efficiency, a.battery_wh, a.roundtrip};
    PowerProfile profile{"device", a.load_w, a.standby_w};
    IrradiationSeries series = read_irradiation_csv(a.irradiation);

    FeasibilityReport report = feasibility(rig, series, profile);
    if (!a.curve_out.empty()) {
        std::ofstream f(a.curve_out, std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot open " + a.curve_out + " for writing");
        f << emit_energy_curve(rig, series);
    }

    json months = json::array();
    for (const auto& m : report.months)
        months.push_back(json{{"month", m.month},
                              {"e_day_wh", m.e_day_wh},
                              {"sustainable_w", m.sustainable_w},
                              {"feasible", m.feasible}});
    json out{{"area_m2", rig.area_m2},
             {"efficiency", rig.efficiency},
             {"battery_wh", rig.battery_wh},
             {"load_w", profile.active_w},
             {"battery_life_h", battery_life_hours(a.battery_wh, a.load_w)},
             {"months", months},
             {"worst_month", report.months[static_cast<size_t>(report.worst_month_index)].month},
             {"feasible", report.feasible}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"edge-inference toolchain for the solar smart recycling bin"};
    app.require_subcommand(1);

    BuildArgs build_args;
    auto* cb = app.add_subcommand("build-model", "build a seeded classifier graph");
    cb->add_option("--family", build_args.family, "mobilenet_v1|mobilenet_v3_large|mobilenet_v3_small");
    cb->add_option("--alpha", build_args.alpha, "width multiplier");
    cb->add_option("--res", build_args.res, "input resolution WxH");
    cb->add_option("--resize-front", build_args.resize_front, "optional front resize target WxH");
    cb->add_option("--classes", build_args.classes, "number of classes");
    cb->add_option("--seed", build_args.seed, "weight seed");
    cb->add_option("--out", build_args.out, "output model path")->required();

    OptimizeArgs opt_args;
    auto* co = app.add_subcommand("optimize", "run the graph-rewrite pipeline");
    co->add_option("--model", opt_args.model, "input model")->required();
    co->add_option("--out", opt_args.out, "optimized model path");
    co->add_option("--target", opt_args.target, "k210|generic");
    co->add_option("--passes", opt_args.passes, "comma list of fold,fuse,replace");

    QuantizeArgs q_args;
    auto* cq = app.add_subcommand("quantize", "post-training quantization");
    cq->add_option("--model", q_args.model, "input model")->required();
    cq->add_option("--out", q_args.out, "quantized model path")->required();
    cq->add_option("--scheme", q_args.scheme, "f16|i8");
    cq->add_option("--calib", q_args.calib_dir, "directory of .tensor/.ppm calibration inputs");
    cq->add_option("--synth-calib", q_args.synth_calib,
                   "number of seeded synthetic calibration inputs when no --calib");
    cq->add_option("--check-target", q_args.check_target, "report deployability for a profile");
    cq->add_option("--seed", q_args.seed, "seed for synthetic calibration");

    RunArgs run_args;
    auto* cr = app.add_subcommand("run", "classify one input");
    cr->add_option("--model", run_args.model)->required();
    cr->add_option("--input", run_args.input, "image (.ppm) or tensor (.tensor)")->required();
    cr->add_option("--path", run_args.path, "ref|opt");
    cr->add_option("--topk", run_args.topk);
    cr->add_option("--threads", run_args.threads);
    cr->add_flag("--pretty", run_args.pretty);

    BenchArgs bench_args;
    auto* cbe = app.add_subcommand("bench", "latency/throughput measurement");
    cbe->add_option("--model", bench_args.model)->required();
    cbe->add_option("--input", bench_args.input, "optional fixed input");
    cbe->add_option("--path", bench_args.path, "ref|opt");
    cbe->add_option("--iters", bench_args.iters);
    cbe->add_option("--warmup", bench_args.warmup);
    cbe->add_option("--threads", bench_args.threads, "intra-op threads (optimized path)");
    cbe->add_option("--seed", bench_args.seed, "seed for the random input");
    cbe->add_flag("--pretty", bench_args.pretty);

    MetricsArgs metrics_args;
    auto* cm = app.add_subcommand("metrics", "confusion matrix metrics from a truth,pred CSV");
    cm->add_option("--preds", metrics_args.preds, "CSV of truth,pred rows")->required();
    cm->add_flag("--pretty", metrics_args.pretty);

    SplitArgs split_args;
    auto* cs = app.add_subcommand("split-dataset", "stratified train/val/test split");
    cs->add_option("--manifest", split_args.manifest, "CSV path,label,source")->required();
    cs->add_option("--ratios", split_args.ratios, "train,val,test");
    cs->add_option("--seed", split_args.seed);
    cs->add_option("--out-prefix", split_args.out_prefix);

    SimulateArgs sim_args;
    auto* csb = app.add_subcommand("simulate-bin", "drive the bin state machine");
    csb->add_option("--script", sim_args.script, "event trace CSV");
    csb->add_option("--config", sim_args.config, "controller config JSON");
    csb->add_flag("--live", sim_args.live, "classify --images with --model instead of a script");
    csb->add_option("--model", sim_args.model);
    csb->add_option("--images", sim_args.images, "directory of .ppm frames");
    csb->add_option("--stability-window", sim_args.stability_window);
    csb->add_option("--confidence-threshold", sim_args.confidence_threshold);
    csb->add_option("--sort-timeout", sim_args.sort_timeout);

    PowerArgs power_args;
    auto* cp = app.add_subcommand("power-budget", "battery life and solar feasibility");
    cp->add_option("--area-cm2", power_args.area_cm2, "panel area in cm^2");
    cp->add_option("--efficiency", power_args.efficiency, "panel conversion efficiency");
    cp->add_option("--battery-wh", power_args.battery_wh);
    cp->add_option("--load-w", power_args.load_w, "active device draw in watts");
    cp->add_option("--standby-w", power_args.standby_w);
    cp->add_option("--roundtrip", power_args.roundtrip, "battery round-trip efficiency");
    cp->add_option("--irradiation", power_args.irradiation, "CSV month,H")->required();
    cp->add_option("--curve-out", power_args.curve_out, "write the energy curve CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // CLI11 exits 0 for --help; anything else is a usage error
        return code == 0 ? 0 : 2;
    }

    try {
        if (cb->parsed()) return cmd_build(build_args);
        if (co->parsed()) return cmd_optimize(opt_args);
        if (cq->parsed()) return cmd_quantize(q_args);
        if (cr->parsed()) return cmd_run(run_args);
        if (cbe->parsed()) return cmd_bench(bench_args);
        if (cm->parsed()) return cmd_metrics(metrics_args);
        if (cs->parsed()) return cmd_split(split_args);
        if (csb->parsed()) return cmd_simulate(sim_args);
        if (cp->parsed()) return cmd_power(power_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
