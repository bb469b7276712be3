/*
 * Copyright 2026 The soap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "soap/orchestrator.hpp"

#include <algorithm>
#include <future>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "soap/adb.hpp"
#include "soap/errors.hpp"
#include "soap/simulator.hpp"
#include "soap/text.hpp"

namespace soap::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::done: return "done";
        case Termination::bound_exhausted: return "bound_exhausted";
        case Termination::device_error: return "device_error";
        case Termination::llm_error: return "llm_error";
    }
    return "llm_error";
}

std::optional<Termination> parse_termination(std::string_view s) {
    for (auto t : {Termination::done, Termination::bound_exhausted, Termination::device_error, Termination::llm_error}) {
        if (s == to_string(t)) return t;
    }
    return std::nullopt;
}

namespace {

constexpr const char* kNormalizedTime = "1970-01-01T00:00:00Z";

std::string timestamp(bool normalized) {
    if (normalized) return kNormalizedTime;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void prepare_run_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
    for (const char* stale : {"screenshots", "findings", "transcript.jsonl", "report.json"}) fs::remove_all(dir / stale);
    fs::create_directories(dir / "screenshots");
    fs::create_directories(dir / "findings");
}

struct Shot {
    device::GuiStatus status;
    std::string raw_path;
    std::optional<device::GuiStatus> labeled;
    std::string labeled_path;
    int number = 0;
};

bool player_fault(const std::exception& e) {
    return dynamic_cast<const SchemaViolation*>(&e) || dynamic_cast<const InvalidInstruction*>(&e) ||
           dynamic_cast<const LabelOutOfRange*>(&e) || dynamic_cast<const NoGridContext*>(&e);
}

ordered_json execution_json(const Execution& e) {
    ordered_json j;
    j["index"] = e.index;
    j["next_step"] = e.next_step;
    j["sub_step"] = e.sub_step;
    j["instruction"] = e.instruction;
    j["commands"] = e.commands;
    j["before"] = e.before;
    j["labeled"] = e.labeled;
    j["after"] = e.after;
    j["oracle_ids"] = e.oracle_ids;
    j["findings"] = e.findings;
    return j;
}

}  // namespace

// Reports

std::string render_finding(const agents::BugFinding& f) {
    auto list = [](const std::vector<std::string>& items, bool numbered) {
        if (items.empty()) return std::string("_none_\n");
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            out += numbered ? fmt::format("{}. {}\n", i + 1, items[i]) : "- " + items[i] + "\n";
        }
        return out;
    };
    std::string md = "# " + f.summary + "\n\n";
    md += "## Summary\n\n" + f.summary + "\n\n";
    md += "## Steps to Reproduce\n\n" + list(f.s2rs, true) + "\n";
    md += "## Expected Behavior\n\n" + list(f.ebs, false) + "\n";
    md += "## Observed Behavior\n\n" + list(f.obs, false) + "\n";
    md += "## Violated Oracles\n\n";
    if (f.violated_oracles.empty()) md += "_none_\n";
    for (const auto& o : f.violated_oracles) md += fmt::format("- [{}] {}\n", agents::to_string(o.origin), o.text);
    md += "\n## Evidence\n\n";
    auto link = [](const std::string& p) { return p.empty() ? std::string("_missing_") : "../" + p; };
    md += "Before: ![before](" + link(f.evidence_before) + ")\n\n";
    md += "After: ![after](" + link(f.evidence_after) + ")\n";
    return md;
}

std::string emit_report(const agents::BugFinding& finding, const fs::path& run_dir, int number) {
    auto rel = fmt::format("findings/{:03}.md", number);
    fs::create_directories(run_dir / "findings");
    write_file(run_dir / rel, render_finding(finding));
    return rel;
}

ordered_json report_json(const RunConfig& config, const RunResources& resources, const RunReport& report,
                         const std::string& started_at, const std::string& finished_at) {
    ordered_json j;
    j["format"] = "soap-run";
    j["version"] = 1;
    j["test"] = {{"id", config.test.id}, {"app", config.test.app}, {"source", config.test.source},
                 {"steps", config.test.steps}};
    ordered_json cfg;
    cfg["skg"] = config.skg_path.string();
    cfg["device"] = config.device_backend;
    cfg["ablation"] = config.ablation.name();
    cfg["no_step_knowledge"] = config.ablation.no_step_knowledge;
    cfg["no_oracle_knowledge"] = config.ablation.no_oracle_knowledge;
    cfg["bounds"] = {{"max_substeps_per_step", config.bounds.max_substeps_per_step},
                     {"max_total_instructions", config.bounds.max_total_instructions},
                     {"settle_ms", config.bounds.settle.count()}};
    cfg["retrieval"] = {{"planner_k", resources.retrieval.planner_k},
                        {"detector_k", resources.retrieval.detector_k},
                        {"oracle_cap", resources.retrieval.oracle_cap},
                        {"rerank", resources.retrieval.rerank},
                        {"mode", retrieval::to_string(resources.retrieval.mode)}};
    cfg["cell_size"] = resources.cell_size;
    cfg["dialogue_window"] = resources.dialogue_window ? ordered_json(*resources.dialogue_window) : ordered_json();
    cfg["normalize_timestamps"] = config.normalize_timestamps;
    j["config"] = cfg;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["result"] = {{"completed", report.completed},
                   {"termination", to_string(report.termination)},
                   {"error", report.error},
                   {"executed_steps", report.executed_steps},
                   {"executed_instructions", report.executed_instructions},
                   {"detector_invocations", report.detector_invocations},
                   {"player_failures", report.player_failures}};
    j["plans"] = ordered_json::array();
    for (const auto& p : report.plans) j["plans"].push_back({{"next_step", p.next_step}, {"sub_steps", p.sub_steps}});
    j["executions"] = ordered_json::array();
    for (const auto& e : report.executions) j["executions"].push_back(execution_json(e));
    j["findings"] = ordered_json::array();
    for (std::size_t i = 0; i < report.findings.size(); ++i) {
        auto f = agents::to_json(report.findings[i]);
        f["file"] = report.finding_files[i];
        j["findings"].push_back(std::move(f));
    }
    return j;
}

// The loop

RunReport run_test(const RunConfig& config, RunResources& res) {
    if (config.bounds.max_substeps_per_step <= 0 || config.bounds.max_total_instructions <= 0) {
        throw Error("run bounds must be positive");
    }
    if (!res.llm || !res.device) throw Error("run needs an llm backend and a device");
    if (config.test.steps.empty()) throw Error("test '" + config.test.id + "' has no steps");
    const fs::path& dir = config.run_dir;
    prepare_run_dir(dir);
    const auto started_at = timestamp(config.normalize_timestamps);

    RunReport report;
    auto finish = [&]() -> RunReport {
        report.completed = report.termination == Termination::done;
        auto j = report_json(config, res, report, started_at, timestamp(config.normalize_timestamps));
        write_file(dir / "report.json", j.dump(2) + "\n");
        return report;
    };
    auto stop = [&](Termination t, const std::string& why) {
        report.termination = t;
        report.error = why;
        if (t != Termination::done) spdlog::warn("run {} stopped ({}): {}", config.test.id, to_string(t), why);
    };

    auto sink = std::make_shared<llm::FileTranscriptSink>(dir / "transcript.jsonl");
    llm::AgentOptions options{res.dialogue_window, sink};
    agents::Knowledge knowledge{res.knowledge, res.embedder, res.retrieval};
    const auto& app = config.test.app;

    std::optional<llm::AgentHandle> planner, player, detector, reranker;
    try {
        using llm::Role;
        planner.emplace(llm::create_agent(Role::planner, agents::system_prompt(res.prompts, Role::planner, app), res.llm, options));
        player.emplace(llm::create_agent(Role::player, agents::system_prompt(res.prompts, Role::player, app), res.llm, options));
        detector.emplace(
            llm::create_agent(Role::detector, agents::system_prompt(res.prompts, Role::detector, app), res.llm, options));
        if (res.retrieval.rerank) {
            reranker.emplace(llm::create_agent(Role::retriever, agents::system_prompt(res.prompts, Role::retriever, app),
                                               res.llm, options));
        }
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        stop(Termination::llm_error, e.what());
        return finish();
    }

    int shots = 0;
    auto take_shot = [&]() {
        Shot s;
        s.status = res.device->capture();
        s.number = ++shots;
        s.raw_path = fmt::format("screenshots/{:03}_raw.png", s.number);
        write_file(dir / s.raw_path, s.status.png);
        return s;
    };

    Shot current;
    try {
        current = take_shot();
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        stop(Termination::device_error, std::string("capture: ") + e.what());
        return finish();
    }

    std::set<std::string> planned;
    std::map<std::string, int> attempts_per_step;
    std::vector<std::string> history;
    agents::FindingDeduplicator dedup;

    for (bool running = true; running;) {
        agents::Plan plan;
        try {
            plan = agents::plan_next(*planner, config.test, current.status, knowledge, config.ablation, planned);
        } catch (const IoError&) {
            throw;
        } catch (const std::exception& e) {
            stop(Termination::llm_error, std::string("planner: ") + e.what());
            break;
        }
        report.plans.push_back(plan);
        if (plan.done()) {
            stop(Termination::done, "");
            break;
        }
        planned.insert(plan.next_step);
        int& attempts = attempts_per_step[agents::normalize_summary(plan.next_step)];

        bool replan = false;
        for (std::size_t i = 0; i < plan.sub_steps.size() && running && !replan; ++i) {
            const auto& sub_step = plan.sub_steps[i];
            if (report.executed_instructions + report.player_failures >= config.bounds.max_total_instructions) {
                stop(Termination::bound_exhausted,
                     fmt::format("reached {} instructions", config.bounds.max_total_instructions));
                running = false;
                break;
            }
            if (attempts >= config.bounds.max_substeps_per_step) {
                stop(Termination::bound_exhausted,
                     fmt::format("step '{}' reached {} sub-steps", plan.next_step, config.bounds.max_substeps_per_step));
                running = false;
                break;
            }

            try {
                if (!current.labeled) {
                    current.labeled = device::label_grid(current.status, res.cell_size);
                    current.labeled_path = fmt::format("screenshots/{:03}_labeled.png", current.number);
                    write_file(dir / current.labeled_path, current.labeled->grid->labeled_png);
                }
            } catch (const IoError&) {
                throw;
            } catch (const std::exception& e) {
                stop(Termination::device_error, std::string("labeling: ") + e.what());
                running = false;
                break;
            }

            device::UiInstruction instruction;
            device::ExecutionOutcome outcome;
            try {
                instruction = agents::translate(*player, plan, i, *current.labeled);
                outcome = device::execute(*res.device, instruction, &*current.labeled);
            } catch (const IoError&) {
                throw;
            } catch (const std::exception& e) {
                if (player_fault(e)) {
                    spdlog::warn("sub-step '{}' could not be executed, re-planning: {}", sub_step, e.what());
                    ++report.player_failures;
                    ++attempts;
                    replan = true;
                    break;
                }
                bool llm_side = dynamic_cast<const BackendError*>(&e) || dynamic_cast<const TranscriptExhausted*>(&e) ||
                                dynamic_cast<const TranscriptMismatch*>(&e);
                stop(llm_side ? Termination::llm_error : Termination::device_error,
                     std::string(llm_side ? "player: " : "execute: ") + e.what());
                running = false;
                break;
            }
            ++attempts;

            Execution ex;
            ex.index = report.executed_instructions + 1;
            ex.next_step = plan.next_step;
            ex.sub_step = sub_step;
            ex.instruction = device::describe(instruction);
            ex.commands = outcome.commands;
            ex.before = current.raw_path;
            ex.labeled = current.labeled_path;

            if (config.bounds.settle.count() > 0) std::this_thread::sleep_for(config.bounds.settle);

            Shot after;
            try {
                after = take_shot();
            } catch (const IoError&) {
                throw;
            } catch (const std::exception& e) {
                report.executions.push_back(ex);
                stop(Termination::device_error, std::string("capture: ") + e.what());
                running = false;
                break;
            }
            ex.after = after.raw_path;

            auto oracles =
                agents::retrieve_oracles(instruction, sub_step, knowledge, config.ablation, reranker ? &*reranker : nullptr);
            for (const auto& o : oracles) ex.oracle_ids.push_back(o.id);
            history.push_back(sub_step);

            std::vector<agents::BugFinding> found;
            try {
                found = agents::detect(*detector, instruction, current.status, after.status, sub_step, oracles, history);
            } catch (const IoError&) {
                throw;
            } catch (const std::exception& e) {
                report.executions.push_back(ex);
                stop(Termination::llm_error, std::string("detector: ") + e.what());
                running = false;
                break;
            }
            ++report.detector_invocations;
            ++report.executed_instructions;

            for (auto& f : found) {
                if (!dedup.admit(f)) continue;
                f.evidence_before = current.raw_path;
                f.evidence_after = after.raw_path;
                auto file = emit_report(f, dir, static_cast<int>(report.findings.size()) + 1);
                ex.findings.push_back(file);
                report.findings.push_back(std::move(f));
                report.finding_files.push_back(file);
            }
            report.executions.push_back(std::move(ex));
            current = std::move(after);
            if (i + 1 == plan.sub_steps.size()) ++report.executed_steps;
        }
    }
    return finish();
}

// Backends

std::shared_ptr<llm::ChatBackend> make_chat_backend(const std::string& id, const Settings& settings) {
    if (id == "http") {
        if (settings.llm.base_url.empty()) throw Error("the http backend needs llm.base_url (or SOAP_LLM_BASE_URL)");
        if (settings.llm_model.empty()) throw Error("the http backend needs llm.model (or SOAP_LLM_MODEL)");
        return std::make_shared<llm::HttpChatBackend>(settings.llm, settings.llm_model);
    }
    if (id.starts_with("replay:")) return llm::PlaybackBackend::from_file(id.substr(7));
    throw Error("unknown llm backend '" + id + "' (expected http or replay:<transcript>)");
}

std::unique_ptr<device::DeviceBackend> make_device(const std::string& id, const Settings& settings) {
    if (id == "adb") return std::make_unique<device::AdbDevice>(settings.adb);
    if (id.starts_with("sim:")) return std::make_unique<device::SimulatorDevice>(device::load_sim_scenario(id.substr(4)));
    throw Error("unknown device backend '" + id + "' (expected adb or sim:<scenario>)");
}

std::shared_ptr<llm::ChatBackend> make_run_backend(const RunConfig& config, const Settings& settings) {
    auto main = make_chat_backend(config.llm_backend, settings);
    if (config.detector_llm.empty()) return main;
    auto det = make_chat_backend(config.detector_llm, settings);
    auto routed = std::make_shared<llm::RoutingBackend>(main);
    routed->route(llm::Role::detector, det).route(llm::Role::retriever, det);
    return routed;
}

RunReport run_test(const RunConfig& config, const Settings& settings) {
    std::optional<KnowledgeBase> kb;
    std::unique_ptr<Embedder> embedder;
    if (!config.skg_path.empty()) {
        kb = load_knowledge(config.skg_path);
        if (!kb->index.empty()) embedder = make_embedder(kb->index.embedder_id(), settings);
    }
    auto device = make_device(config.device_backend, settings);
    RunResources res;
    res.knowledge = kb ? &*kb : nullptr;
    res.embedder = embedder.get();
    res.llm = make_run_backend(config, settings);
    res.device = device.get();
    res.prompts = settings.prompts_dir.empty() ? agents::PromptSet::builtin() : agents::PromptSet::load(settings.prompts_dir);
    res.retrieval = settings.retrieval;
    res.cell_size = settings.cell_size;
    res.dialogue_window = settings.dialogue_window;
    return run_test(config, res);
}

// Replay

namespace {

json load_report(const fs::path& run_dir) {
    auto path = run_dir / "report.json";
    try {
        auto j = json::parse(read_file(path));
        if (j.value("format", "") != "soap-run") throw FormatError(path.string(), 1, "not a run report");
        if (j.value("version", 0) != 1) throw FormatError(path.string(), 1, "unsupported run report version");
        return j;
    } catch (const json::exception& e) {
        throw FormatError(path.string(), 1, e.what());
    }
}

/// Settings a run recorded about itself, applied over `base`.
Settings recorded_settings(const json& report, Settings base) {
    const auto& cfg = report.at("config");
    const auto& r = cfg.at("retrieval");
    base.retrieval.planner_k = r.at("planner_k").get<std::size_t>();
    base.retrieval.detector_k = r.at("detector_k").get<std::size_t>();
    base.retrieval.oracle_cap = r.at("oracle_cap").get<std::size_t>();
    base.retrieval.rerank = r.at("rerank").get<bool>();
    base.retrieval.mode = retrieval::parse_search_mode(r.at("mode").get<std::string>()).value();
    base.cell_size = cfg.at("cell_size").get<int>();
    if (cfg.at("dialogue_window").is_null()) base.dialogue_window.reset();
    else base.dialogue_window = cfg.at("dialogue_window").get<std::size_t>();
    return base;
}

std::vector<std::string> artifact_files(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

RunConfig config_from_run(const fs::path& run_dir) {
    auto j = load_report(run_dir);
    try {
        RunConfig c;
        const auto& t = j.at("test");
        c.test.id = t.at("id").get<std::string>();
        c.test.app = t.at("app").get<std::string>();
        c.test.source = t.at("source").get<std::string>();
        c.test.steps = t.at("steps").get<std::vector<std::string>>();
        const auto& cfg = j.at("config");
        c.skg_path = cfg.at("skg").get<std::string>();
        c.device_backend = cfg.at("device").get<std::string>();
        c.ablation.no_step_knowledge = cfg.at("no_step_knowledge").get<bool>();
        c.ablation.no_oracle_knowledge = cfg.at("no_oracle_knowledge").get<bool>();
        const auto& b = cfg.at("bounds");
        c.bounds.max_substeps_per_step = b.at("max_substeps_per_step").get<int>();
        c.bounds.max_total_instructions = b.at("max_total_instructions").get<int>();
        c.bounds.settle = std::chrono::milliseconds(b.at("settle_ms").get<long long>());
        c.normalize_timestamps = cfg.at("normalize_timestamps").get<bool>();
        c.llm_backend = "replay:" + (run_dir / "transcript.jsonl").string();
        c.run_dir = run_dir;
        return c;
    } catch (const json::exception& e) {
        throw FormatError((run_dir / "report.json").string(), 1, e.what());
    }
}

ReplayCheck replay_run(const fs::path& run_dir, const fs::path& out_dir, const Settings& settings) {
    if (fs::exists(out_dir) && fs::equivalent(out_dir, run_dir)) throw Error("replay output must differ from the run");
    auto config = config_from_run(run_dir);
    config.run_dir = out_dir;
    ReplayCheck check;
    check.report = run_test(config, recorded_settings(load_report(run_dir), settings));

    auto a = artifact_files(run_dir);
    auto b = artifact_files(out_dir);
    std::set<std::string> all(a.begin(), a.end());
    all.insert(b.begin(), b.end());
    for (const auto& f : all) {
        bool in_a = std::binary_search(a.begin(), a.end(), f);
        bool in_b = std::binary_search(b.begin(), b.end(), f);
        if (!in_a || !in_b) {
            check.differences.push_back(f + (in_a ? ": missing from the replay" : ": only in the replay"));
            continue;
        }
        auto x = read_file(run_dir / f);
        auto y = read_file(out_dir / f);
        if (f == "report.json") {
            auto jx = json::parse(x);
            auto jy = json::parse(y);
            for (auto* jj : {&jx, &jy}) {
                jj->erase("started_at");
                jj->erase("finished_at");
            }
            if (jx != jy) check.differences.push_back(f + ": contents differ");
        } else if (x != y) {
            check.differences.push_back(f + ": contents differ");
        }
    }
    return check;
}

// Metrics

Metrics compute_metrics(int tp, int fp) {
    if (tp < 0 || fp < 0) throw Error("finding counts must be non-negative");
    Metrics m{tp, fp, std::nullopt};
    if (tp + fp > 0) m.accuracy = static_cast<double>(tp) / static_cast<double>(tp + fp);
    return m;
}

Metrics compute_metrics(const std::vector<LabeledFinding>& labeled) {
    int tp = 0;
    int fp = 0;
    for (const auto& l : labeled) (l.verdict == Verdict::tp ? tp : fp)++;
    return compute_metrics(tp, fp);
}

std::string format_accuracy(const std::optional<double>& accuracy) {
    return accuracy ? fmt::format("{:.3f}", *accuracy) : std::string("-");
}

Labels parse_labels(const json& j, const std::string& file_name) {
    if (!j.is_object()) throw FormatError(file_name, 1, "labels must be a JSON object");
    Labels labels;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw FormatError(file_name, 1, "label '" + key + "' must be \"TP\" or \"FP\"");
        auto v = text::to_lower(value.get<std::string>());
        if (v == "tp") labels[key] = Verdict::tp;
        else if (v == "fp") labels[key] = Verdict::fp;
        else throw FormatError(file_name, 1, "label '" + key + "' must be \"TP\" or \"FP\"");
    }
    return labels;
}

Labels load_labels(const fs::path& path) {
    try {
        return parse_labels(json::parse(read_file(path)), path.string());
    } catch (const json::parse_error& e) {
        throw FormatError(path.string(), 1, e.what());
    }
}

namespace {

int ablation_rank(const std::string& name) {
    static const std::vector<std::string> order{"full", "no-step-knowledge", "no-oracle-knowledge",
                                                "no-step-and-oracle-knowledge"};
    auto it = std::find(order.begin(), order.end(), name);
    return static_cast<int>(it - order.begin());
}

}  // namespace

EvalTable evaluate_runs(const std::vector<fs::path>& run_dirs, const Labels& labels) {
    struct Acc {
        int runs = 0, completed = 0;
        std::vector<LabeledFinding> findings;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const auto& dir : run_dirs) {
        auto j = load_report(dir);
        auto run_id = dir.filename().string();
        if (run_id.empty()) run_id = dir.parent_path().filename().string();
        try {
            auto& a = acc[{j.at("test").at("app").get<std::string>(), j.at("config").at("ablation").get<std::string>()}];
            ++a.runs;
            if (j.at("result").at("completed").get<bool>()) ++a.completed;
            for (const auto& f : j.at("findings")) {
                auto key = run_id + "/" + fs::path(f.at("file").get<std::string>()).stem().string();
                auto it = labels.find(key);
                if (it == labels.end()) throw MissingLabel("no verdict for finding " + key);
                a.findings.push_back({key, it->second});
            }
        } catch (const json::exception& e) {
            throw FormatError((dir / "report.json").string(), 1, e.what());
        }
    }
    EvalTable table;
    for (const auto& [key, a] : acc) table.rows.push_back({key.first, key.second, a.runs, a.completed, compute_metrics(a.findings)});
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const EvalRow& x, const EvalRow& y) {
        if (x.app != y.app) return x.app < y.app;
        return ablation_rank(x.ablation) < ablation_rank(y.ablation);
    });
    return table;
}

ordered_json to_json(const EvalTable& table) {
    ordered_json rows = ordered_json::array();
    for (const auto& r : table.rows) {
        ordered_json row;
        row["app"] = r.app;
        row["ablation"] = r.ablation;
        row["runs"] = r.runs;
        row["completed"] = r.completed;
        row["tp"] = r.metrics.tp;
        row["fp"] = r.metrics.fp;
        row["accuracy"] = r.metrics.accuracy ? ordered_json(format_accuracy(r.metrics.accuracy)) : ordered_json();
        rows.push_back(std::move(row));
    }
    return {{"rows", rows}};
}

std::string format_table(const EvalTable& table) {
    std::size_t app_w = 3;
    std::size_t abl_w = 8;
    for (const auto& r : table.rows) {
        app_w = std::max(app_w, r.app.size());
        abl_w = std::max(abl_w, r.ablation.size());
    }
    std::string out = fmt::format("{:<{}}  {:<{}}  {:>4}  {:>9}  {:>4}  {:>4}  {:>8}\n", "app", app_w, "ablation", abl_w,
                                  "runs", "completed", "TP", "FP", "accuracy");
    for (const auto& r : table.rows) {
        out += fmt::format("{:<{}}  {:<{}}  {:>4}  {:>9}  {:>4}  {:>4}  {:>8}\n", r.app, app_w, r.ablation, abl_w, r.runs,
                           r.completed, r.metrics.tp, r.metrics.fp, format_accuracy(r.metrics.accuracy));
    }
    return out;
}

EvalTable eval_suite(const std::vector<SuiteCase>& cases, const Settings& settings, const Labels& labels) {
    std::vector<std::future<std::vector<fs::path>>> pending;
    for (const auto& c : cases) {
        pending.push_back(std::async(std::launch::async, [&c, &settings] {
            std::vector<fs::path> dirs;
            run_test(c.baseline, settings);
            dirs.push_back(c.baseline.run_dir);
            if (c.oracle_ablation_detector_llm) {
                RunConfig rerun = c.baseline;
                rerun.ablation.no_oracle_knowledge = true;
                rerun.llm_backend = "replay:" + (c.baseline.run_dir / "transcript.jsonl").string();
                rerun.detector_llm = *c.oracle_ablation_detector_llm;
                auto base = c.baseline.run_dir.filename().empty() ? c.baseline.run_dir.parent_path() : c.baseline.run_dir;
                rerun.run_dir = base.parent_path() / (base.filename().string() + "-no-oracle-knowledge");
                run_test(rerun, settings);
                dirs.push_back(rerun.run_dir);
            }
            return dirs;
        }));
    }
    std::vector<fs::path> dirs;
    for (auto& f : pending) {
        auto d = f.get();
        dirs.insert(dirs.end(), d.begin(), d.end());
    }
    return evaluate_runs(dirs, labels);
}

}  // namespace soap::orchestrator
