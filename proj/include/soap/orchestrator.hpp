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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "soap/agents.hpp"
#include "soap/config.hpp"
#include "soap/device.hpp"
#include "soap/knowledge.hpp"
#include "soap/llm.hpp"

namespace soap::orchestrator {

enum class Termination { done, bound_exhausted, device_error, llm_error };

std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view s);

struct RunConfig {
    agents::ScenarioTest test;
    std::filesystem::path skg_path;      // empty: run without knowledge
    std::string llm_backend = "http";    // "http" or "replay:<transcript>"
    std::string detector_llm;            // optional backend for detector turns only
    std::string device_backend = "adb";  // "adb" or "sim:<scenario>"
    agents::Ablation ablation;
    RunBounds bounds;
    std::filesystem::path run_dir;
    bool normalize_timestamps = false;
};

/// One executed (or attempted) UI instruction.
struct Execution {
    int index = 0;  // 1-based
    std::string next_step;
    std::string sub_step;
    std::string instruction;  // describe() form
    std::vector<std::string> commands;
    std::string before;   // screenshot paths relative to the run directory
    std::string labeled;
    std::string after;
    std::vector<int> oracle_ids;
    std::vector<std::string> findings;  // finding files
};

struct RunReport {
    bool completed = false;
    int executed_steps = 0;
    int executed_instructions = 0;
    int detector_invocations = 0;
    int player_failures = 0;
    std::vector<agents::BugFinding> findings;
    std::vector<std::string> finding_files;  // parallel to findings
    std::vector<agents::Plan> plans;
    std::vector<Execution> executions;
    Termination termination = Termination::llm_error;
    std::string error;  // empty unless an error ended the run
};

/// Everything a run talks to, already constructed.
struct RunResources {
    const KnowledgeBase* knowledge = nullptr;
    const Embedder* embedder = nullptr;
    std::shared_ptr<llm::ChatBackend> llm;
    device::DeviceBackend* device = nullptr;
    agents::PromptSet prompts = agents::PromptSet::builtin();
    agents::RetrievalSettings retrieval;
    int cell_size = 100;
    std::optional<std::size_t> dialogue_window;
};

/// capture, then plan; per sub-step label, translate, execute, settle,
/// capture, retrieve oracles and detect; until DONE, a bound or an error.
/// Writes transcript.jsonl, screenshots/, findings/ and report.json under
/// `config.run_dir`. Errors end up in the report's termination.
RunReport run_test(const RunConfig& config, RunResources& resources);

/// Resolves the knowledge base and the backends named in `config`.
RunReport run_test(const RunConfig& config, const Settings& settings);

std::shared_ptr<llm::ChatBackend> make_chat_backend(const std::string& id, const Settings& settings);
std::unique_ptr<device::DeviceBackend> make_device(const std::string& id, const Settings& settings);

/// Chat backend for a run: `llm_backend`, with detector (and reranker)
/// turns routed to `detector_llm` when that is set.
std::shared_ptr<llm::ChatBackend> make_run_backend(const RunConfig& config, const Settings& settings);

/// Markdown bug report for one finding.
std::string render_finding(const agents::BugFinding& finding);
/// Writes findings/NNN.md and returns its path relative to `run_dir`.
std::string emit_report(const agents::BugFinding& finding, const std::filesystem::path& run_dir, int number);

nlohmann::ordered_json report_json(const RunConfig& config, const RunResources& resources, const RunReport& report,
                                   const std::string& started_at, const std::string& finished_at);

/// Rebuilds the configuration recorded in `run_dir`/report.json, with the
/// LLM replaying the run's own transcript.
RunConfig config_from_run(const std::filesystem::path& run_dir);

struct ReplayCheck {
    RunReport report;
    std::vector<std::string> differences;  // empty: artifacts identical
};

/// Re-runs a recorded run from its transcript into `out_dir` and compares
/// every artifact; timestamps are ignored.
ReplayCheck replay_run(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir,
                       const Settings& settings);

// Evaluation

struct Metrics {
    int tp = 0;
    int fp = 0;
    std::optional<double> accuracy;  // tp / (tp + fp); absent when both are 0
};

Metrics compute_metrics(int tp, int fp);

enum class Verdict { tp, fp };

struct LabeledFinding {
    std::string key;
    Verdict verdict = Verdict::fp;
};

Metrics compute_metrics(const std::vector<LabeledFinding>& labeled);

/// "0.516", or "-" when absent.
std::string format_accuracy(const std::optional<double>& accuracy);

/// Finding verdicts keyed by "<run directory name>/<finding number>".
using Labels = std::map<std::string, Verdict>;

Labels parse_labels(const nlohmann::json& j, const std::string& file_name = "<memory>");
Labels load_labels(const std::filesystem::path& path);

struct EvalRow {
    std::string app;
    std::string ablation;
    int runs = 0;
    int completed = 0;
    Metrics metrics;
};

struct EvalTable {
    std::vector<EvalRow> rows;  // by app, then ablation (full first)
};

/// One row per (app, ablation) over the runs' report.json files. Throws
/// MissingLabel for a finding without a verdict.
EvalTable evaluate_runs(const std::vector<std::filesystem::path>& run_dirs, const Labels& labels);

nlohmann::ordered_json to_json(const EvalTable& table);
std::string format_table(const EvalTable& table);

struct SuiteCase {
    RunConfig baseline;
    /// When set, the case is rerun with no_oracle_knowledge: planner and
    /// player turns replay the baseline transcript and only detector turns
    /// go to this backend. The rerun lands next to the baseline run
    /// directory with a "-no-oracle-knowledge" suffix.
    std::optional<std::string> oracle_ablation_detector_llm;
};

/// Runs the cases (in parallel across cases) and evaluates every run.
EvalTable eval_suite(const std::vector<SuiteCase>& cases, const Settings& settings, const Labels& labels);

}  // namespace soap::orchestrator
