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

#include <cmath>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "json.hpp"
#include "soap/errors.hpp"
#include "soap/orchestrator.hpp"
#include "soap/simulator.hpp"
#include "testing.hpp"

namespace {

using namespace soap;
using namespace soap::orchestrator;
namespace fs = std::filesystem;
namespace st = soap::testing;
using llm::Role;
using nlohmann::json;

const std::string kThumbnails = "Tab thumbnails not displaying content previews correctly";

json report_of(const fs::path& dir) { return json::parse(st::read_file(dir / "report.json")); }

TEST(Run, TabsFindsTheThumbnailBug) {
    auto dir = st::fresh_dir("tabs-run");
    auto report = run_test(st::tabs_config(dir), Settings{});
    EXPECT_TRUE(report.completed) << report.error;
    EXPECT_EQ(report.termination, Termination::done);
    ASSERT_EQ(report.findings.size(), 1u);
    EXPECT_EQ(report.findings[0].summary, kThumbnails);
    EXPECT_EQ(report.findings[0].violated_oracles.at(0).origin, agents::OracleOrigin::retrieved);
    EXPECT_EQ(report.executed_instructions, 4);
    EXPECT_EQ(report.detector_invocations, 4);
    EXPECT_EQ(report.executed_steps, 3);
    EXPECT_EQ(st::entries_for(dir / "transcript.jsonl", Role::detector).size(), 4u);
    EXPECT_EQ(report.findings[0].evidence_after, "screenshots/002_raw.png");
    EXPECT_TRUE(fs::exists(dir / "findings/001.md"));
    EXPECT_TRUE(fs::exists(dir / "screenshots/005_raw.png"));
    EXPECT_TRUE(fs::exists(dir / "screenshots/004_labeled.png"));
    EXPECT_FALSE(fs::exists(dir / "screenshots/005_labeled.png"));
    EXPECT_EQ(report.executions.at(0).commands.at(0), "sim tap 32 : home -> tabs_tray");

    auto j = report_of(dir);
    EXPECT_EQ(j["result"]["termination"], "done");
    EXPECT_EQ(j["started_at"], "1970-01-01T00:00:00Z");
    EXPECT_EQ(j["findings"][0]["file"], "findings/001.md");
}

TEST(Run, TabsArtifactsAreReproducible) {
    auto a = st::fresh_dir("tabs-a");
    auto b = st::fresh_dir("tabs-b");
    run_test(st::tabs_config(a), Settings{});
    run_test(st::tabs_config(b), Settings{});
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a).string());
    }
    EXPECT_GE(files.size(), 12u);
    for (const auto& f : files) EXPECT_EQ(st::read_file(a / f), st::read_file(b / f)) << f;

    auto check = replay_run(a, st::fresh_dir("tabs-replay"), Settings{});
    EXPECT_TRUE(check.differences.empty()) << check.differences.front();
    EXPECT_TRUE(check.report.completed);
}

TEST(Run, NoOracleKnowledgeLeavesOraclesEmpty) {
    auto base = st::fresh_dir("tabs-base");
    run_test(st::tabs_config(base), Settings{});
    auto cfg = st::tabs_config(st::fresh_dir("tabs-no-oracle"));
    cfg.ablation.no_oracle_knowledge = true;
    cfg.llm_backend = "replay:" + (base / "transcript.jsonl").string();
    cfg.detector_llm = "replay:" + (st::fixtures_dir() / "transcripts/tabs_no_oracle_detector.jsonl").string();
    auto report = run_test(cfg, Settings{});
    EXPECT_TRUE(report.completed) << report.error;
    EXPECT_EQ(report.findings.size(), 2u);
    auto detector = st::entries_for(cfg.run_dir / "transcript.jsonl", Role::detector);
    ASSERT_EQ(detector.size(), 4u);
    for (const auto& e : detector) {
        auto text = st::query_text(e);
        EXPECT_TRUE(agents::matches_template(Role::detector, text));
        EXPECT_TRUE(agents::section_body(text, agents::kOraclesHeader).empty());
    }
    // planner and player turns were replayed with their recorded fingerprints
    for (Role r : {Role::planner, Role::player}) {
        auto was = st::entries_for(base / "transcript.jsonl", r);
        auto now = st::entries_for(cfg.run_dir / "transcript.jsonl", r);
        ASSERT_EQ(was.size(), now.size());
        for (std::size_t i = 0; i < was.size(); ++i) EXPECT_EQ(was[i].query_fingerprint, now[i].query_fingerprint);
    }
}

TEST(Run, NoStepKnowledgeKeepsPlannerQueriesClean) {
    auto cfg = st::tabs_config(st::fresh_dir("tabs-no-step"));
    cfg.ablation.no_step_knowledge = true;
    auto report = run_test(cfg, Settings{});
    EXPECT_TRUE(report.completed) << report.error;
    const auto& kb = st::knowledge_for("corpus");
    auto planner = st::entries_for(cfg.run_dir / "transcript.jsonl", Role::planner);
    ASSERT_EQ(planner.size(), 4u);
    for (const auto& e : planner) {
        auto text = st::query_text(e);
        EXPECT_TRUE(agents::section_body(text, agents::kStepKnowledgeHeader).empty());
        EXPECT_EQ(text.find("[step:"), std::string::npos);
        for (const auto& [id, o] : kb.graph.oracles) EXPECT_EQ(text.find(o.text), std::string::npos) << o.text;
    }
}

class FaultyCapture final : public device::DeviceBackend {
public:
    FaultyCapture(device::SimulatorDevice inner, int fail_at) : inner_(std::move(inner)), fail_at_(fail_at) {}
    std::string id() const override { return "faulty"; }
    device::GuiStatus capture() override {
        if (++captures_ == fail_at_) throw CaptureTimeout("screencap timed out");
        return inner_.capture();
    }
    device::ExecutionOutcome perform(const device::UiInstruction& in, std::optional<device::Point> p) override {
        return inner_.perform(in, p);
    }

private:
    device::SimulatorDevice inner_;
    int fail_at_;
    int captures_ = 0;
};

RunResources tabs_resources(const std::shared_ptr<llm::ChatBackend>& llm, device::DeviceBackend& dev) {
    static HashEmbedder embedder;
    RunResources r;
    r.knowledge = &st::knowledge_for("corpus");
    r.embedder = &embedder;
    r.llm = llm;
    r.device = &dev;
    return r;
}

TEST(Run, CaptureFailureStopsWithoutDetecting) {
    auto fx = st::fixtures_dir();
    FaultyCapture dev(device::SimulatorDevice::from_file(fx / "sim/tabs/tabs.sim"), 4);
    auto res = tabs_resources(llm::PlaybackBackend::from_file(fx / "transcripts/tabs.jsonl"), dev);
    auto report = run_test(st::tabs_config(st::fresh_dir("tabs-faulty")), res);
    EXPECT_FALSE(report.completed);
    EXPECT_EQ(report.termination, Termination::device_error);
    EXPECT_NE(report.error.find("screencap timed out"), std::string::npos);
    EXPECT_EQ(report.detector_invocations, 2);
    EXPECT_EQ(report.executed_instructions, 2);
    ASSERT_EQ(report.executions.size(), 3u);
    EXPECT_TRUE(report.executions[2].after.empty());
    EXPECT_EQ(report.findings.size(), 1u);

    FaultyCapture dead(device::SimulatorDevice::from_file(fx / "sim/tabs/tabs.sim"), 1);
    auto res2 = tabs_resources(llm::PlaybackBackend::from_file(fx / "transcripts/tabs.jsonl"), dead);
    auto r2 = run_test(st::tabs_config(st::fresh_dir("tabs-dead")), res2);
    EXPECT_EQ(r2.termination, Termination::device_error);
    EXPECT_TRUE(r2.plans.empty());
}

RunConfig never_done_config(const fs::path& dir, int turns) {
    auto sim = st::write_tiny_sim(dir / "sim");
    auto transcript = dir / "never_done.jsonl";
    std::string lines;
    for (const auto& e : st::never_done_transcript(turns)) lines += llm::serialize_entry(e) + "\n";
    st::write_file(transcript, lines);
    RunConfig c;
    c.test = {"never", "tiny", "manual", {"Keep browsing", "Never finish"}};
    c.device_backend = "sim:" + sim.string();
    c.llm_backend = "replay:" + transcript.string();
    c.bounds.settle = std::chrono::milliseconds(0);
    c.bounds.max_total_instructions = 7;
    c.bounds.max_substeps_per_step = 1000;
    c.run_dir = dir / "run";
    c.normalize_timestamps = true;
    return c;
}

TEST(Run, BoundStopsANeverEndingRun) {
    auto dir = st::fresh_dir("never-done");
    auto cfg = never_done_config(dir, 20);
    auto report = run_test(cfg, Settings{});
    EXPECT_EQ(report.termination, Termination::bound_exhausted);
    EXPECT_FALSE(report.completed);
    EXPECT_EQ(report.executed_instructions, 7);
    EXPECT_EQ(report.detector_invocations, 7);
    EXPECT_EQ(st::entries_for(cfg.run_dir / "transcript.jsonl", Role::player).size(), 7u);

    cfg.bounds.max_substeps_per_step = 3;
    cfg.run_dir = dir / "per-step";
    auto per_step = run_test(cfg, Settings{});
    EXPECT_EQ(per_step.termination, Termination::bound_exhausted);
    EXPECT_EQ(per_step.executed_instructions, 3);
    EXPECT_NE(per_step.error.find("sub-steps"), std::string::npos);
}

TEST(Run, ExhaustedTranscriptIsAnLlmError) {
    auto cfg = never_done_config(st::fresh_dir("short-transcript"), 2);
    auto report = run_test(cfg, Settings{});
    EXPECT_EQ(report.termination, Termination::llm_error);
    EXPECT_EQ(report.executed_instructions, 2);
}

TEST(Run, RejectsBadConfiguration) {
    auto cfg = st::tabs_config(st::fresh_dir("bad"));
    cfg.bounds.max_total_instructions = 0;
    EXPECT_THROW(run_test(cfg, Settings{}), Error);
    cfg = st::tabs_config(st::fresh_dir("bad"));
    cfg.llm_backend = "carrier-pigeon";
    EXPECT_THROW(run_test(cfg, Settings{}), Error);
    cfg.llm_backend = "http";
    EXPECT_THROW(run_test(cfg, Settings{}), Error);
    cfg = st::tabs_config(st::fresh_dir("bad"));
    cfg.device_backend = "toaster";
    EXPECT_THROW(run_test(cfg, Settings{}), Error);
}

TEST(Findings, RenderedAsMarkdown) {
    agents::BugFinding f{"Blank", {"Open", "Tap"}, {}, {"grey"}, {{"Should show", agents::OracleOrigin::retrieved}},
                         "screenshots/001_raw.png", ""};
    auto md = render_finding(f);
    EXPECT_TRUE(md.starts_with("# Blank\n"));
    EXPECT_NE(md.find("1. Open\n2. Tap\n"), std::string::npos);
    EXPECT_NE(md.find("## Expected Behavior\n\n_none_"), std::string::npos);
    EXPECT_NE(md.find("- [retrieved] Should show"), std::string::npos);
    EXPECT_NE(md.find("![before](../screenshots/001_raw.png)"), std::string::npos);
    EXPECT_NE(md.find("![after](_missing_)"), std::string::npos);
}

TEST(Metrics, AccuracyArithmetic) {
    struct Case {
        int tp, fp;
        const char* expected;
    };
    for (auto c : std::vector<Case>{{32, 30, "0.516"}, {21, 11, "0.656"}, {15, 11, "0.577"}, {8, 29, "0.216"},
                                    {8, 11, "0.421"},  {9, 19, "0.321"},  {10, 23, "0.303"}, {7, 35, "0.167"},
                                    {13, 26, "0.333"}}) {
        auto m = compute_metrics(c.tp, c.fp);
        EXPECT_EQ(format_accuracy(m.accuracy), c.expected) << c.tp << "/" << c.fp;
        EXPECT_DOUBLE_EQ(*m.accuracy, double(c.tp) / (c.tp + c.fp));
    }
    EXPECT_FALSE(compute_metrics(0, 0).accuracy);
    EXPECT_EQ(format_accuracy(std::nullopt), "-");
    EXPECT_EQ(format_accuracy(compute_metrics(1, 0).accuracy), "1.000");
    EXPECT_THROW(compute_metrics(-1, 2), Error);
    auto m = compute_metrics(std::vector<LabeledFinding>{{"a", Verdict::tp}, {"b", Verdict::fp}, {"c", Verdict::fp}});
    EXPECT_EQ(m.tp, 1);
    EXPECT_EQ(m.fp, 2);
}

TEST(Labels, ParseAndValidate) {
    auto l = parse_labels(json{{"r/001", "TP"}, {"r/002", "fp"}});
    EXPECT_EQ(l.at("r/001"), Verdict::tp);
    EXPECT_EQ(l.at("r/002"), Verdict::fp);
    EXPECT_THROW(parse_labels(json::array()), FormatError);
    EXPECT_THROW(parse_labels(json{{"r/001", "maybe"}}), FormatError);
    EXPECT_THROW(parse_labels(json{{"r/001", 1}}), FormatError);
    EXPECT_EQ(load_labels(st::fixtures_dir() / "suite_labels.json").size(), 6u);
}

TEST(Eval, SuiteTabulatesEveryRun) {
    auto root = st::fresh_dir("suite");
    auto fx = st::fixtures_dir();
    SuiteCase firefox{st::tabs_config(root / "firefox"),
                      "replay:" + (fx / "transcripts/tabs_no_oracle_detector.jsonl").string()};
    SuiteCase podcast{st::podcast_config(root / "podcast"),
                      "replay:" + (fx / "transcripts/podcast_no_oracle_detector.jsonl").string()};
    auto labels = load_labels(fx / "suite_labels.json");
    auto table = eval_suite({firefox, podcast}, Settings{}, labels);
    ASSERT_EQ(table.rows.size(), 4u);
    auto row = [&](std::size_t i) {
        const auto& r = table.rows[i];
        return fmt::format("{} {} {}/{} {}:{} {}", r.app, r.ablation, r.completed, r.runs, r.metrics.tp, r.metrics.fp,
                           format_accuracy(r.metrics.accuracy));
    };
    EXPECT_EQ(row(0), "firefox full 1/1 1:0 1.000");
    EXPECT_EQ(row(1), "firefox no-oracle-knowledge 1/1 1:1 0.500");
    EXPECT_EQ(row(2), "podcast full 1/1 1:1 0.500");
    EXPECT_EQ(row(3), "podcast no-oracle-knowledge 1/1 0:1 0.000");
    auto text = format_table(table);
    EXPECT_NE(text.find("accuracy"), std::string::npos);
    EXPECT_EQ(to_json(table)["rows"].size(), 4u);

    Labels missing = labels;
    missing.erase("podcast/002");
    EXPECT_THROW(evaluate_runs({root / "podcast"}, missing), MissingLabel);
}

TEST(Settings, ParsedFromJsonAndEnvironment) {
    auto s = parse_settings(json::parse(R"({"llm": {"base_url": "http://x/v1", "model": "m", "timeout_s": 2.5},
        "bounds": {"max_total_instructions": 9, "settle_ms": 0}, "retrieval": {"mode": "keyword", "oracle_cap": 4},
        "grid": {"cell_size": 50}, "dialogue_window": 6})"));
    EXPECT_EQ(s.llm.base_url, "http://x/v1");
    EXPECT_EQ(s.llm_model, "m");
    EXPECT_EQ(s.llm.timeout, std::chrono::milliseconds(2500));
    EXPECT_EQ(s.bounds.max_total_instructions, 9);
    EXPECT_EQ(s.bounds.settle.count(), 0);
    EXPECT_EQ(s.retrieval.mode, retrieval::SearchMode::keyword);
    EXPECT_EQ(s.retrieval.oracle_cap, 4u);
    EXPECT_EQ(s.cell_size, 50);
    EXPECT_EQ(s.dialogue_window, 6u);
    EXPECT_THROW(parse_settings(json{{"colour", 1}}), FormatError);
    EXPECT_THROW(parse_settings(json{{"bounds", {{"max_total_instructions", 0}}}}), FormatError);
    EXPECT_THROW(parse_settings(json{{"grid", {{"cell_size", 5}}}}), FormatError);
    EXPECT_THROW(parse_settings(json{{"retrieval", {{"mode", "psychic"}}}}), FormatError);
    EXPECT_THROW(parse_settings(json{{"embedding", {{"kind", "magic"}}}}), FormatError);

    auto dir = st::fresh_dir("settings");
    st::write_file(dir / "soap.json", R"({"llm": {"model": "file-model"}, "prompts_dir": "prompts"})");
    auto env = [](const std::string& k) -> std::optional<std::string> {
        if (k == "SOAP_LLM_MODEL") return "env-model";
        if (k == "SOAP_LLM_BASE_URL") return "http://env/v1";
        return std::nullopt;
    };
    auto loaded = load_settings(dir / "soap.json", env);
    EXPECT_EQ(loaded.llm_model, "env-model");
    EXPECT_EQ(loaded.llm.base_url, "http://env/v1");
    EXPECT_EQ(loaded.prompts_dir, dir / "prompts");
    EXPECT_THROW(load_settings(dir / "absent.json", env), IoError);
    st::write_file(dir / "broken.json", "{");
    EXPECT_THROW(load_settings(dir / "broken.json", env), FormatError);
    EXPECT_EQ(make_embedder("hash-bow-64", Settings{})->dimension(), 64u);
    EXPECT_THROW(make_embedder("word2vec", Settings{}), Error);
}

}  // namespace
