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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "soap/device.hpp"
#include "soap/knowledge.hpp"
#include "soap/llm.hpp"

namespace soap::agents {

/// A natural-language scenario test: an app and an ordered list of steps.
struct ScenarioTest {
    std::string id;
    std::string app;
    std::string source;
    std::vector<std::string> steps;

    bool operator==(const ScenarioTest&) const = default;
};

/// Front matter (`id`, `app`, `source`), a `---` line, then one step per
/// line. Blank lines and `#` comments in the step list are skipped.
ScenarioTest parse_test(std::string_view contents, const std::string& file_name = "<memory>");
ScenarioTest load_test(const std::filesystem::path& path);
std::string serialize_test(const ScenarioTest& test);

inline constexpr std::string_view kDone = "DONE";

struct Plan {
    std::string next_step;
    std::vector<std::string> sub_steps;

    bool done() const noexcept { return next_step == kDone; }
    bool operator==(const Plan&) const = default;
};

enum class OracleOrigin { retrieved, generated };
std::string_view to_string(OracleOrigin o);

struct ViolatedOracle {
    std::string text;
    OracleOrigin origin = OracleOrigin::generated;
    bool operator==(const ViolatedOracle&) const = default;
};

struct BugFinding {
    std::string summary;
    std::vector<std::string> s2rs;
    std::vector<std::string> ebs;
    std::vector<std::string> obs;
    std::vector<ViolatedOracle> violated_oracles;
    std::string evidence_before;  // paths relative to the run directory
    std::string evidence_after;

    bool operator==(const BugFinding&) const = default;
};

nlohmann::ordered_json to_json(const BugFinding& f);

struct Ablation {
    bool no_step_knowledge = false;
    bool no_oracle_knowledge = false;

    /// "full", "no-step-knowledge", "no-oracle-knowledge" or
    /// "no-step-and-oracle-knowledge".
    std::string name() const;
    bool operator==(const Ablation&) const = default;
};

struct RetrievalSettings {
    std::size_t planner_k = 5;
    std::size_t detector_k = 10;
    std::size_t oracle_cap = 30;
    bool rerank = false;
    retrieval::SearchMode mode = retrieval::SearchMode::hybrid;
};

/// What the agents retrieve from. `kb` may be null (no knowledge loaded).
struct Knowledge {
    const KnowledgeBase* kb = nullptr;
    const Embedder* embedder = nullptr;
    RetrievalSettings settings;
};

// Prompts

struct PromptSet {
    std::string planner;
    std::string player;
    std::string detector;
    std::string oracle_retrieval;

    /// The prompts compiled into the binary.
    static PromptSet builtin();
    /// Builtin prompts, with any of planner.txt, player.txt, detector.txt,
    /// oracle_retrieval.txt found in `dir` taking precedence.
    static PromptSet load(const std::filesystem::path& dir);
};

/// Replaces each `{{name}}` with its value. Throws PromptValidationError
/// for a placeholder without a value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Renders and validates the system prompt for `role`.
std::string system_prompt(const PromptSet& prompts, llm::Role role, const std::string& app);

// Query section headers, in template order.
inline constexpr std::string_view kStepsHeader = "Steps:";
inline constexpr std::string_view kGuiStatusHeader = "GUI Status:";
inline constexpr std::string_view kStepKnowledgeHeader = "Step Knowledge:";
inline constexpr std::string_view kPlanHeader = "Plan:";
inline constexpr std::string_view kInstructionHeader = "UI Instruction:";
inline constexpr std::string_view kOraclesHeader = "Retrieved Oracles:";
inline constexpr std::string_view kCandidateStepsHeader = "Candidate Steps:";

/// Section headers each role's query carries at line starts.
std::vector<std::string_view> query_sections(llm::Role role);

/// True when every header of `role` starts exactly one line of `query_text`,
/// in order.
bool matches_template(llm::Role role, std::string_view query_text);

/// Text between `header` and the next section header (or the end), trimmed.
std::string section_body(std::string_view query_text, std::string_view header);

// Planner

/// Test steps not yet named as a plan's NEXT STEP (compared case- and
/// whitespace-insensitively), in test order.
std::vector<std::string> pending_steps(const ScenarioTest& test, const std::set<std::string>& planned);

/// Step documents retrieved for the pending steps, best first.
std::vector<retrieval::Document> retrieve_steps(const std::vector<std::string>& pending, const Knowledge& knowledge);

llm::MessageParts planner_query(const ScenarioTest& test, const device::GuiStatus& gui,
                                const std::vector<retrieval::Document>& step_knowledge);

Plan plan_next(llm::AgentHandle& planner, const ScenarioTest& test, const device::GuiStatus& gui,
               const Knowledge& knowledge, const Ablation& ablation, const std::set<std::string>& planned = {});

// Player

llm::MessageParts player_query(const Plan& plan, std::size_t sub_step, const device::GuiStatus& labeled);

/// `labeled` must carry a grid. Positions past the grid's last label are
/// rejected as invalid so the model gets a retry.
device::UiInstruction translate(llm::AgentHandle& player, const Plan& plan, std::size_t sub_step,
                                const device::GuiStatus& labeled);

// Detector

/// Oracles for the sub-step an instruction executed. Never throws:
/// retrieval failures are logged and yield no oracles. `reranker` is used
/// only when reranking is enabled.
std::vector<skg::Oracle> retrieve_oracles(const device::UiInstruction& instruction, const std::string& sub_step,
                                          const Knowledge& knowledge, const Ablation& ablation,
                                          llm::AgentHandle* reranker = nullptr);

llm::MessageParts oracle_retrieval_query(const device::UiInstruction& instruction, const std::string& sub_step,
                                         const std::vector<retrieval::Document>& candidates);

llm::MessageParts detector_query(const device::UiInstruction& instruction, const std::string& sub_step,
                                 const device::GuiStatus& before, const device::GuiStatus& after,
                                 const std::vector<skg::Oracle>& oracles);

/// Findings reported by the detector. A "retrieved" origin whose text is
/// not among `oracles` becomes "generated"; empty S2Rs default to
/// `executed_sub_steps`.
std::vector<BugFinding> detect(llm::AgentHandle& detector, const device::UiInstruction& instruction,
                               const device::GuiStatus& before, const device::GuiStatus& after,
                               const std::string& sub_step, const std::vector<skg::Oracle>& oracles,
                               const std::vector<std::string>& executed_sub_steps = {});

/// Drops findings whose normalized summary was seen before in the run.
class FindingDeduplicator {
public:
    /// True the first time a summary is offered.
    bool admit(const BugFinding& finding);

private:
    std::set<std::string> seen_;
};

std::string normalize_summary(std::string_view summary);

}  // namespace soap::agents
