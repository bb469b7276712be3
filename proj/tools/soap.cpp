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

// soap: build scenario knowledge, run scenario tests on a device, replay
// and evaluate runs.

#include <filesystem>
#include <iostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "soap/corpus.hpp"
#include "soap/errors.hpp"
#include "soap/knowledge.hpp"
#include "soap/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace soap;

namespace {

constexpr int kExitIncomplete = 3;

std::optional<fs::path> config_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

int build_kg(const std::string& corpus_path, const std::string& out, const std::string& config, double threshold,
             bool attach_all) {
    auto settings = load_settings(config_path(config));
    auto loaded = corpus::load_corpus(corpus_path);
    auto embedder = make_embedder(settings);
    skg::BuildOptions opts;
    opts.similarity_threshold = threshold;
    opts.attach_all_steps = attach_all;
    auto kb = build_knowledge(loaded.scenarios, *embedder, opts);
    save_knowledge(out, kb);
    fmt::print("{} scenarios ({} reports skipped), {} steps, {} oracles, {} chunks -> {}\n", loaded.scenarios.size(),
               loaded.skipped.size(), kb.graph.steps.size(), kb.graph.oracles.size(), kb.index.chunks().size(), out);
    return 0;
}

void print_report(const orchestrator::RunReport& r, const fs::path& dir) {
    fmt::print("termination: {}\n", orchestrator::to_string(r.termination));
    if (!r.error.empty()) fmt::print("error: {}\n", r.error);
    fmt::print("steps: {}  instructions: {}  findings: {}\n", r.executed_steps, r.executed_instructions,
               r.findings.size());
    for (std::size_t i = 0; i < r.findings.size(); ++i) {
        fmt::print("  {}  {}\n", (dir / r.finding_files[i]).string(), r.findings[i].summary);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario-based exploratory GUI testing with LLM agents"};
    app.require_subcommand(1);
    std::string config;
    bool verbose = false;
    app.add_option("--config", config, "Settings file (JSON)")->check(CLI::ExistingFile);
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    auto* kg = app.add_subcommand("build-kg", "Build the scenario knowledge file from a bug-report corpus");
    std::string corpus_path, kg_out;
    double threshold = 0.85;
    bool attach_all = false;
    kg->add_option("--corpus", corpus_path, "Report directory or .jsonl export")->required()->check(CLI::ExistingPath);
    kg->add_option("--out", kg_out, "Output knowledge file")->required();
    kg->add_option("--threshold", threshold, "Cosine threshold for merging steps")->check(CLI::Range(0.0, 1.0));
    kg->add_flag("--attach-all-steps", attach_all, "Attach oracles to every step of their scenario");

    auto* run = app.add_subcommand("run", "Run one scenario test");
    std::string test_file, skg_file, device = "adb", llm = "http", detector_llm, run_dir;
    bool normalize = false, no_step = false, no_oracle = false;
    std::optional<int> settle_ms, max_instructions, max_substeps;
    run->add_option("--test", test_file, "Test file")->required()->check(CLI::ExistingFile);
    run->add_option("--skg", skg_file, "Knowledge file from build-kg")->check(CLI::ExistingFile);
    run->add_option("--device", device, "adb or sim:<scenario>");
    run->add_option("--llm", llm, "http or replay:<transcript>");
    run->add_option("--detector-llm", detector_llm, "Separate backend for detector turns");
    run->add_option("--run-dir", run_dir, "Output directory (default run/<test id>)");
    run->add_flag("--normalize-timestamps", normalize, "Write fixed timestamps for reproducible artifacts");
    run->add_flag("--no-step-knowledge", no_step, "Do not retrieve step knowledge for the planner");
    run->add_flag("--no-oracle-knowledge", no_oracle, "Do not retrieve oracles for the detector");
    run->add_option("--settle-ms", settle_ms, "Delay after each instruction")->check(CLI::NonNegativeNumber);
    run->add_option("--max-instructions", max_instructions, "Instruction bound")->check(CLI::PositiveNumber);
    run->add_option("--max-substeps", max_substeps, "Sub-step bound per test step")->check(CLI::PositiveNumber);

    auto* ev = app.add_subcommand("eval", "Tabulate TP/FP and completion over recorded runs");
    std::vector<std::string> runs;
    std::string labels_file;
    bool as_json = false;
    ev->add_option("--runs", runs, "Run directories, or directories holding run directories")
        ->required()
        ->check(CLI::ExistingDirectory);
    ev->add_option("--labels", labels_file, "Finding verdicts (JSON)")->required()->check(CLI::ExistingFile);
    ev->add_flag("--json", as_json, "Print the table as JSON");

    auto* rp = app.add_subcommand("replay", "Re-run a recorded run from its transcript and compare artifacts");
    std::string replay_dir, replay_out;
    rp->add_option("--run", replay_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    rp->add_option("--out", replay_out, "Where to write the replay (default <run>.replay)");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*kg) return build_kg(corpus_path, kg_out, config, threshold, attach_all);

        if (*run) {
            auto settings = load_settings(config_path(config));
            orchestrator::RunConfig cfg;
            cfg.test = agents::load_test(test_file);
            cfg.skg_path = skg_file;
            cfg.device_backend = device;
            cfg.llm_backend = llm;
            cfg.detector_llm = detector_llm;
            cfg.ablation = {no_step, no_oracle};
            cfg.bounds = settings.bounds;
            if (settle_ms) cfg.bounds.settle = std::chrono::milliseconds(*settle_ms);
            if (max_instructions) cfg.bounds.max_total_instructions = *max_instructions;
            if (max_substeps) cfg.bounds.max_substeps_per_step = *max_substeps;
            cfg.run_dir = run_dir.empty() ? fs::path("run") / cfg.test.id : fs::path(run_dir);
            cfg.normalize_timestamps = normalize;
            auto report = orchestrator::run_test(cfg, settings);
            print_report(report, cfg.run_dir);
            return report.completed ? 0 : kExitIncomplete;
        }

        if (*ev) {
            std::vector<fs::path> dirs;
            for (const auto& r : runs) {
                if (fs::exists(fs::path(r) / "report.json")) {
                    dirs.emplace_back(r);
                    continue;
                }
                std::vector<fs::path> found;
                for (const auto& e : fs::directory_iterator(r)) {
                    if (e.is_directory() && fs::exists(e.path() / "report.json")) found.push_back(e.path());
                }
                std::sort(found.begin(), found.end());
                dirs.insert(dirs.end(), found.begin(), found.end());
            }
            auto table = orchestrator::evaluate_runs(dirs, orchestrator::load_labels(labels_file));
            if (as_json) fmt::print("{}\n", orchestrator::to_json(table).dump(2));
            else fmt::print("{}", orchestrator::format_table(table));
            return 0;
        }

        if (*rp) {
            auto settings = load_settings(config_path(config));
            fs::path src = fs::path(replay_dir).lexically_normal();
            if (src.filename().empty()) src = src.parent_path();
            fs::path out = replay_out.empty() ? fs::path(src.string() + ".replay") : fs::path(replay_out);
            auto check = orchestrator::replay_run(src, out, settings);
            print_report(check.report, out);
            if (check.differences.empty()) {
                fmt::print("replay identical to {}\n", src.string());
                return 0;
            }
            for (const auto& d : check.differences) fmt::print("differs: {}\n", d);
            return 1;
        }
    } catch (const Error& e) {
        std::cerr << "soap: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
