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

#include "soap/agents.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "prompt_assets.hpp"
#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap::agents {

namespace fs = std::filesystem;
using nlohmann::json;

// Test files

ScenarioTest parse_test(std::string_view contents, const std::string& file_name) {
    ScenarioTest test;
    auto lines = text::split_lines(contents);
    std::size_t i = 0;
    bool closed = false;
    std::set<std::string> seen;
    for (; i < lines.size(); ++i) {
        auto line = text::trim(lines[i]);
        if (line == "---") {
            closed = true;
            ++i;
            break;
        }
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw FormatError(file_name, i + 1, "expected 'key: value'");
        auto key = std::string(text::trim(line.substr(0, colon)));
        auto value = std::string(text::trim(line.substr(colon + 1)));
        if (!seen.insert(key).second) throw FormatError(file_name, i + 1, "duplicate key '" + key + "'");
        if (key == "id") test.id = value;
        else if (key == "app") test.app = value;
        else if (key == "source") test.source = value;
        else throw FormatError(file_name, i + 1, "unknown key '" + key + "'");
    }
    if (!closed) throw FormatError(file_name, lines.size(), "front matter is not closed by '---'");
    if (test.id.empty()) throw FormatError(file_name, 1, "missing 'id'");
    if (test.app.empty()) throw FormatError(file_name, 1, "missing 'app'");
    for (; i < lines.size(); ++i) {
        auto line = text::normalize_whitespace(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        test.steps.push_back(line);
    }
    if (test.steps.empty()) throw FormatError(file_name, lines.size(), "test has no steps");
    return test;
}

ScenarioTest load_test(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open test file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_test(ss.str(), path.string());
}

std::string serialize_test(const ScenarioTest& test) {
    std::string out = "id: " + test.id + "\napp: " + test.app + "\n";
    if (!test.source.empty()) out += "source: " + test.source + "\n";
    out += "---\n";
    for (const auto& s : test.steps) out += s + "\n";
    return out;
}

// Findings

std::string_view to_string(OracleOrigin o) { return o == OracleOrigin::retrieved ? "retrieved" : "generated"; }

nlohmann::ordered_json to_json(const BugFinding& f) {
    nlohmann::ordered_json j;
    j["summary"] = f.summary;
    j["s2rs"] = f.s2rs;
    j["ebs"] = f.ebs;
    j["obs"] = f.obs;
    j["violated_oracles"] = nlohmann::ordered_json::array();
    for (const auto& o : f.violated_oracles) {
        j["violated_oracles"].push_back({{"text", o.text}, {"origin", to_string(o.origin)}});
    }
    j["evidence"] = {{"before", f.evidence_before}, {"after", f.evidence_after}};
    return j;
}

std::string Ablation::name() const {
    if (no_step_knowledge && no_oracle_knowledge) return "no-step-and-oracle-knowledge";
    if (no_step_knowledge) return "no-step-knowledge";
    if (no_oracle_knowledge) return "no-oracle-knowledge";
    return "full";
}

std::string normalize_summary(std::string_view summary) { return text::to_lower(text::normalize_whitespace(summary)); }

bool FindingDeduplicator::admit(const BugFinding& finding) { return seen_.insert(normalize_summary(finding.summary)).second; }

// Prompts

PromptSet PromptSet::builtin() {
    return {std::string(assets::planner), std::string(assets::player), std::string(assets::detector),
            std::string(assets::oracle_retrieval)};
}

PromptSet PromptSet::load(const fs::path& dir) {
    auto set = builtin();
    auto override_with = [&](const char* name, std::string& slot) {
        auto p = dir / name;
        if (!fs::exists(p)) return;
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot open prompt " + p.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        slot = ss.str();
    };
    override_with("planner.txt", set.planner);
    override_with("player.txt", set.player);
    override_with("detector.txt", set.detector);
    override_with("oracle_retrieval.txt", set.oracle_retrieval);
    return set;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        auto name = std::string(text::trim(tmpl.substr(open + 2, close - open - 2)));
        auto it = values.find(name);
        if (it == values.end()) throw PromptValidationError("prompt placeholder '{{" + name + "}}' has no value");
        out.append(tmpl.substr(pos, open - pos));
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

namespace {

std::string action_table() {
    return "- tap(position)\n"
           "- long_tap(position)\n"
           "- double_tap(position)\n"
           "- input(position, text)\n"
           "- scroll(direction: up | down | left | right)\n"
           "- home()\n"
           "- enter()\n"
           "- landscape()\n"
           "- portrait()";
}

}  // namespace

std::string system_prompt(const PromptSet& prompts, llm::Role role, const std::string& app) {
    const std::string* tmpl = nullptr;
    switch (role) {
        case llm::Role::planner: tmpl = &prompts.planner; break;
        case llm::Role::player: tmpl = &prompts.player; break;
        case llm::Role::detector: tmpl = &prompts.detector; break;
        case llm::Role::retriever: tmpl = &prompts.oracle_retrieval; break;
    }
    auto rendered = render(*tmpl, {{"app", app}, {"actions", action_table()}, {"done", std::string(kDone)}});
    llm::validate_prompt(rendered);
    return rendered;
}

// Query templates

std::vector<std::string_view> query_sections(llm::Role role) {
    switch (role) {
        case llm::Role::planner: return {kStepsHeader, kGuiStatusHeader, kStepKnowledgeHeader};
        case llm::Role::player: return {kPlanHeader, kGuiStatusHeader};
        case llm::Role::detector: return {kInstructionHeader, kGuiStatusHeader, kOraclesHeader};
        case llm::Role::retriever: return {kInstructionHeader, kCandidateStepsHeader};
    }
    return {};
}

namespace {

bool starts_with_header(std::string_view line, std::string_view header) { return line.starts_with(header); }

const std::vector<std::string_view>& all_headers() {
    static const std::vector<std::string_view> h{kStepsHeader,      kGuiStatusHeader, kStepKnowledgeHeader,
                                                 kPlanHeader,       kInstructionHeader, kOraclesHeader,
                                                 kCandidateStepsHeader};
    return h;
}

}  // namespace

bool matches_template(llm::Role role, std::string_view query_text) {
    auto headers = query_sections(role);
    std::vector<std::size_t> hits(headers.size(), 0);
    std::size_t next = 0;
    bool ordered = true;
    for (auto line : text::split_lines(query_text)) {
        for (std::size_t h = 0; h < headers.size(); ++h) {
            if (!starts_with_header(line, headers[h])) continue;
            ++hits[h];
            if (h != next) ordered = false;
            next = h + 1;
        }
    }
    return ordered && std::all_of(hits.begin(), hits.end(), [](std::size_t n) { return n == 1; });
}

std::string section_body(std::string_view query_text, std::string_view header) {
    auto lines = text::split_lines(query_text);
    std::string body;
    bool inside = false;
    for (auto line : lines) {
        bool is_header = std::any_of(all_headers().begin(), all_headers().end(),
                                     [&](std::string_view h) { return starts_with_header(line, h); });
        if (inside && is_header) break;
        if (inside) {
            body += std::string(line) + "\n";
        } else if (starts_with_header(line, header)) {
            inside = true;
            body += std::string(line.substr(header.size())) + "\n";
        }
    }
    return std::string(text::trim(body));
}

// Planner

std::vector<std::string> pending_steps(const ScenarioTest& test, const std::set<std::string>& planned) {
    std::set<std::string> norm;
    for (const auto& p : planned) norm.insert(normalize_summary(p));
    std::vector<std::string> out;
    for (const auto& s : test.steps) {
        if (!norm.contains(normalize_summary(s))) out.push_back(s);
    }
    return out;
}

namespace {

bool is_step_chunk(const retrieval::Chunk& c) { return c.document_id.starts_with("step:"); }

/// Best-scoring step documents for each query, merged by document id.
std::vector<retrieval::Document> search_step_documents(const std::vector<std::string>& queries, std::size_t k,
                                                       const Knowledge& knowledge) {
    if (!knowledge.kb || !knowledge.embedder || knowledge.kb->index.empty() || k == 0) return {};
    retrieval::SearchOptions opts;
    opts.mode = knowledge.settings.mode;
    opts.filter = is_step_chunk;
    struct Best {
        double score;
        int chunk_id;
        std::string text;
    };
    std::map<std::string, Best> best;
    for (const auto& q : queries) {
        std::vector<retrieval::Hit> hits;
        try {
            hits = knowledge.kb->index.search(q, k, *knowledge.embedder, opts);
        } catch (const EmbedderFailure&) {
            continue;
        }
        for (const auto& h : hits) {
            auto [it, fresh] = best.try_emplace(h.chunk->document_id, Best{h.score, h.chunk->id, h.chunk->text});
            if (!fresh && (h.score > it->second.score ||
                           (h.score == it->second.score && h.chunk->id < it->second.chunk_id))) {
                it->second = Best{h.score, h.chunk->id, h.chunk->text};
            }
        }
    }
    std::vector<std::pair<std::string, Best>> ranked(best.begin(), best.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        return a.second.chunk_id < b.second.chunk_id;
    });
    if (ranked.size() > k) ranked.resize(k);
    std::vector<retrieval::Document> out;
    for (auto& [id, b] : ranked) out.push_back({id, std::move(b.text)});
    return out;
}

llm::ImagePart image_of(const std::vector<std::uint8_t>& png, int w, int h) {
    llm::ImagePart img;
    img.bytes = png;
    img.width = w;
    img.height = h;
    return img;
}

}  // namespace

std::vector<retrieval::Document> retrieve_steps(const std::vector<std::string>& pending, const Knowledge& knowledge) {
    return search_step_documents(pending, knowledge.settings.planner_k, knowledge);
}

llm::MessageParts planner_query(const ScenarioTest& test, const device::GuiStatus& gui,
                                const std::vector<retrieval::Document>& step_knowledge) {
    std::string q = std::string(kStepsHeader) + "\n";
    for (std::size_t i = 0; i < test.steps.size(); ++i) q += fmt::format("{}. {}\n", i + 1, test.steps[i]);
    q += fmt::format("{} current screenshot attached ({}x{}).\n", kGuiStatusHeader, gui.width, gui.height);
    q += std::string(kStepKnowledgeHeader) + "\n";
    for (const auto& d : step_knowledge) q += "[" + d.id + "]\n" + d.text + "\n";
    llm::MessageParts parts;
    parts.text(std::move(q)).image(image_of(gui.png, gui.width, gui.height));
    return parts;
}

Plan plan_next(llm::AgentHandle& planner, const ScenarioTest& test, const device::GuiStatus& gui,
               const Knowledge& knowledge, const Ablation& ablation, const std::set<std::string>& planned) {
    if (planner.role() != llm::Role::planner) throw Error("plan_next needs a planner agent");
    std::vector<retrieval::Document> docs;
    if (!ablation.no_step_knowledge) docs = retrieve_steps(pending_steps(test, planned), knowledge);
    auto parts = planner_query(test, gui, docs);
    return llm::query_structured<Plan>(planner, parts, llm::Schema::plan, [](const json& j) {
        Plan p;
        p.next_step = text::normalize_whitespace(j["NEXT STEP"].get<std::string>());
        if (p.next_step.empty()) throw SchemaViolation({"NEXT STEP (expected nonempty string)"});
        if (p.done()) return p;
        for (const auto& s : j["SUB STEPS"]) {
            auto t = text::normalize_whitespace(s.get<std::string>());
            if (!t.empty()) p.sub_steps.push_back(std::move(t));
        }
        if (p.sub_steps.empty()) throw SchemaViolation({"SUB STEPS (expected at least one sub-step)"});
        return p;
    });
}

// Player

llm::MessageParts player_query(const Plan& plan, std::size_t sub_step, const device::GuiStatus& labeled) {
    if (!labeled.grid) throw NoGridContext();
    if (sub_step >= plan.sub_steps.size()) throw Error("sub-step index out of range");
    const auto& g = labeled.grid->grid;
    std::string q = std::string(kPlanHeader) + "\n";
    q += "NEXT STEP: " + plan.next_step + "\n";
    q += "SUB STEPS:\n";
    for (std::size_t i = 0; i < plan.sub_steps.size(); ++i) q += fmt::format("{}. {}\n", i + 1, plan.sub_steps[i]);
    q += fmt::format("Current sub-step: {}. {}\n", sub_step + 1, plan.sub_steps[sub_step]);
    q += fmt::format("{} labeled screenshot attached ({}x{}, {} columns x {} rows of {} px cells, labels 1-{}).\n",
                     kGuiStatusHeader, labeled.width, labeled.height, g.columns, g.rows, g.cell_size,
                     g.label_count());
    llm::MessageParts parts;
    parts.text(std::move(q)).image(image_of(labeled.grid->labeled_png, labeled.width, labeled.height));
    return parts;
}

device::UiInstruction translate(llm::AgentHandle& player, const Plan& plan, std::size_t sub_step,
                                const device::GuiStatus& labeled) {
    if (player.role() != llm::Role::player) throw Error("translate needs a player agent");
    if (plan.done()) throw Error("cannot translate a DONE plan");
    auto parts = player_query(plan, sub_step, labeled);
    const int max_label = labeled.grid->grid.label_count();
    return llm::query_structured<device::UiInstruction>(
        player, parts, llm::Schema::instruction, [max_label](const json& j) {
            auto in = device::instruction_from_json(j);
            if (in.position && *in.position > max_label) {
                throw InvalidInstruction(fmt::format("position {} is outside the grid (labels 1-{})", *in.position,
                                                     max_label));
            }
            return in;
        });
}

// Detector

llm::MessageParts oracle_retrieval_query(const device::UiInstruction& instruction, const std::string& sub_step,
                                         const std::vector<retrieval::Document>& candidates) {
    std::string q = fmt::format("{} {} (sub-step: {})\n", kInstructionHeader, device::describe(instruction), sub_step);
    q += std::string(kCandidateStepsHeader) + "\n";
    for (const auto& d : candidates) q += "[" + d.id + "]\n" + d.text + "\n";
    llm::MessageParts parts;
    parts.text(std::move(q));
    return parts;
}

std::vector<skg::Oracle> retrieve_oracles(const device::UiInstruction& instruction, const std::string& sub_step,
                                          const Knowledge& knowledge, const Ablation& ablation,
                                          llm::AgentHandle* reranker) {
    if (ablation.no_oracle_knowledge || !knowledge.kb) return {};
    try {
        auto candidates = search_step_documents({sub_step}, knowledge.settings.detector_k, knowledge);
        std::vector<skg::StepId> ids;
        for (const auto& d : candidates) {
            if (auto id = skg::step_id_of_document(d.id)) ids.push_back(*id);
        }
        if (knowledge.settings.rerank && reranker && !candidates.empty()) {
            auto parts = oracle_retrieval_query(instruction, sub_step, candidates);
            std::set<skg::StepId> offered(ids.begin(), ids.end());
            ids = llm::query_structured<std::vector<skg::StepId>>(
                *reranker, parts, llm::Schema::step_ids, [&offered](const json& j) {
                    std::vector<skg::StepId> picked;
                    for (const auto& v : j["step_ids"]) {
                        int id = v.get<int>();
                        if (!offered.contains(id)) {
                            throw SchemaViolation({fmt::format("step_ids ({} was not among the candidates)", id)});
                        }
                        if (std::find(picked.begin(), picked.end(), id) == picked.end()) picked.push_back(id);
                    }
                    return picked;
                });
        }
        auto oracles = skg::oracles_for_steps(knowledge.kb->graph, ids);
        if (oracles.size() > knowledge.settings.oracle_cap) oracles.resize(knowledge.settings.oracle_cap);
        return oracles;
    } catch (const Error& e) {
        spdlog::warn("oracle retrieval failed for sub-step '{}': {}", sub_step, e.what());
        return {};
    }
}

llm::MessageParts detector_query(const device::UiInstruction& instruction, const std::string& sub_step,
                                 const device::GuiStatus& before, const device::GuiStatus& after,
                                 const std::vector<skg::Oracle>& oracles) {
    std::string q = fmt::format("{} {} (sub-step: {})\n", kInstructionHeader, device::describe(instruction), sub_step);
    q += fmt::format("{} screenshots before ({}x{}) and after ({}x{}) the instruction attached, in that order.\n",
                     kGuiStatusHeader, before.width, before.height, after.width, after.height);
    q += std::string(kOraclesHeader) + "\n";
    for (const auto& o : oracles) q += fmt::format("- [O{}] {}\n", o.id, o.text);
    llm::MessageParts parts;
    parts.text(std::move(q))
        .image(image_of(before.png, before.width, before.height))
        .image(image_of(after.png, after.width, after.height));
    return parts;
}

std::vector<BugFinding> detect(llm::AgentHandle& detector, const device::UiInstruction& instruction,
                               const device::GuiStatus& before, const device::GuiStatus& after,
                               const std::string& sub_step, const std::vector<skg::Oracle>& oracles,
                               const std::vector<std::string>& executed_sub_steps) {
    if (detector.role() != llm::Role::detector) throw Error("detect needs a detector agent");
    auto parts = detector_query(instruction, sub_step, before, after, oracles);
    std::set<std::string> retrieved;
    for (const auto& o : oracles) retrieved.insert(normalize_summary(o.text));

    auto strings = [](const json& item, const char* key) {
        std::vector<std::string> out;
        if (auto it = item.find(key); it != item.end()) {
            for (const auto& s : *it) {
                auto t = text::normalize_whitespace(s.get<std::string>());
                if (!t.empty()) out.push_back(std::move(t));
            }
        }
        return out;
    };
    return llm::query_structured<std::vector<BugFinding>>(
        detector, parts, llm::Schema::findings, [&](const json& j) {
            std::vector<BugFinding> out;
            for (const auto& item : j["findings"]) {
                BugFinding f;
                f.summary = text::normalize_whitespace(item["summary"].get<std::string>());
                f.s2rs = strings(item, "s2rs");
                f.ebs = strings(item, "ebs");
                f.obs = strings(item, "obs");
                if (f.s2rs.empty()) f.s2rs = executed_sub_steps;
                if (auto v = item.find("violated_oracles"); v != item.end()) {
                    for (const auto& o : *v) {
                        ViolatedOracle vo;
                        vo.text = text::normalize_whitespace(o["text"].get<std::string>());
                        bool claims_retrieved = o.contains("origin") && text::to_lower(o["origin"].get<std::string>()) == "retrieved";
                        vo.origin = claims_retrieved && retrieved.contains(normalize_summary(vo.text))
                                        ? OracleOrigin::retrieved
                                        : OracleOrigin::generated;
                        f.violated_oracles.push_back(std::move(vo));
                    }
                }
                out.push_back(std::move(f));
            }
            return out;
        });
}

}  // namespace soap::agents
