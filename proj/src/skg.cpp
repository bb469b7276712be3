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

#include "soap/skg.hpp"

#include <algorithm>
#include <numeric>

#include "soap/errors.hpp"

namespace soap::skg {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

Normalization normalize_steps(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                              double threshold) {
    std::map<std::string, std::size_t> frequency;
    for (const auto& sc : scenarios) {
        for (const auto& s : sc.steps) ++frequency[s];
    }
    std::vector<std::string> texts;
    texts.reserve(frequency.size());
    for (const auto& [t, _] : frequency) texts.push_back(t);

    std::vector<Vector> vectors;
    vectors.reserve(texts.size());
    for (const auto& t : texts) vectors.push_back(embedder.embed(t));

    DisjointSets sets(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        for (std::size_t j = i + 1; j < texts.size(); ++j) {
            if (cosine(vectors[i], vectors[j]) >= threshold) sets.unite(i, j);
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < texts.size(); ++i) members[sets.find(i)].push_back(i);

    std::vector<NormalizedStep> clusters;
    for (const auto& [root, idx] : members) {
        NormalizedStep step;
        std::size_t best = idx.front();
        for (std::size_t i : idx) {
            step.alternatives.insert(texts[i]);
            // texts are sorted, so on equal frequency the earlier index wins
            if (frequency[texts[i]] > frequency[texts[best]]) best = i;
        }
        step.canonical = texts[best];
        clusters.push_back(std::move(step));
    }
    std::sort(clusters.begin(), clusters.end(), [](const NormalizedStep& a, const NormalizedStep& b) {
        if (a.canonical != b.canonical) return a.canonical < b.canonical;
        return a.alternatives < b.alternatives;
    });

    Normalization out;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        clusters[i].id = static_cast<StepId>(i + 1);
        for (const auto& alt : clusters[i].alternatives) out.step_of[alt] = clusters[i].id;
    }
    out.steps = std::move(clusters);
    return out;
}

Skg build_graph(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder, const BuildOptions& options) {
    std::vector<corpus::Scenario> sorted = scenarios;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    auto norm = normalize_steps(sorted, embedder, options.similarity_threshold);

    Skg g;
    g.embedder_id = embedder.id();
    g.options = options;
    for (auto& s : norm.steps) g.steps.emplace(s.id, std::move(s));

    OracleId next_oracle = 1;
    for (const auto& sc : sorted) {
        std::vector<StepId> seq;
        for (const auto& raw : sc.steps) seq.push_back(norm.step_of.at(raw));
        std::set<StepId> targets;
        if (!seq.empty()) {
            if (options.attach_all_steps) targets.insert(seq.begin(), seq.end());
            else targets.insert(seq.back());
        }
        for (const auto& text : sc.oracles) {
            Oracle o;
            o.id = next_oracle++;
            o.text = text;
            o.step_ids = targets;
            o.source_scenario = sc.id;
            for (StepId s : targets) g.steps.at(s).oracle_ids.insert(o.id);
            g.oracles.emplace(o.id, std::move(o));
        }
        g.scenario_steps.emplace(sc.id, std::move(seq));
        g.scenarios.emplace(sc.id, sc);
    }
    return g;
}

std::vector<retrieval::Document> to_structured_text(const Skg& skg) {
    std::vector<retrieval::Document> docs;
    for (const auto& [id, step] : skg.steps) {
        std::string t = "STEP " + std::to_string(id) + "\n";
        t += "canonical: " + step.canonical + "\n";
        for (const auto& alt : step.alternatives) t += "alternative: " + alt + "\n";
        for (OracleId oid : step.oracle_ids) t += "oracle: " + skg.oracles.at(oid).text + "\n";
        docs.push_back({"step:" + std::to_string(id), std::move(t)});
    }
    for (const auto& [id, sc] : skg.scenarios) {
        std::string t = "SCENARIO " + id + "\n";
        t += "summary: " + sc.summary + "\n";
        for (const auto& p : sc.preconditions) t += "precondition: " + p + "\n";
        for (const auto& [oid, o] : skg.oracles) {
            if (o.source_scenario == id && o.step_ids.empty()) t += "oracle: " + o.text + "\n";
        }
        docs.push_back({"scenario:" + id, std::move(t)});
    }
    return docs;
}

const NormalizedStep& lookup_step(const Skg& skg, StepId id) {
    auto it = skg.steps.find(id);
    if (it == skg.steps.end()) throw UnknownStepId(id);
    return it->second;
}

std::vector<Oracle> oracles_for_steps(const Skg& skg, const std::vector<StepId>& ids) {
    std::set<OracleId> union_ids;
    for (StepId id : ids) {
        const auto& step = lookup_step(skg, id);
        union_ids.insert(step.oracle_ids.begin(), step.oracle_ids.end());
    }
    std::vector<Oracle> out;
    out.reserve(union_ids.size());
    for (OracleId oid : union_ids) out.push_back(skg.oracles.at(oid));
    return out;
}

std::vector<std::string> check_invariants(const Skg& skg) {
    std::vector<std::string> problems;
    for (const auto& [id, s] : skg.steps) {
        if (s.id != id) problems.push_back("step key " + std::to_string(id) + " holds id " + std::to_string(s.id));
        if (s.alternatives.empty()) problems.push_back("step " + std::to_string(id) + " has no alternatives");
        if (!s.alternatives.contains(s.canonical)) {
            problems.push_back("step " + std::to_string(id) + " canonical is not an alternative");
        }
        for (OracleId o : s.oracle_ids) {
            auto it = skg.oracles.find(o);
            if (it == skg.oracles.end()) {
                problems.push_back("step " + std::to_string(id) + " lists missing oracle " + std::to_string(o));
            } else if (!it->second.step_ids.contains(id)) {
                problems.push_back("oracle " + std::to_string(o) + " does not link back to step " + std::to_string(id));
            }
        }
    }
    for (const auto& [id, o] : skg.oracles) {
        if (o.text.empty()) problems.push_back("oracle " + std::to_string(id) + " has empty text");
        for (StepId s : o.step_ids) {
            auto it = skg.steps.find(s);
            if (it == skg.steps.end()) {
                problems.push_back("oracle " + std::to_string(id) + " links missing step " + std::to_string(s));
            } else if (!it->second.oracle_ids.contains(id)) {
                problems.push_back("step " + std::to_string(s) + " does not link back to oracle " + std::to_string(id));
            }
        }
        if (!skg.scenarios.contains(o.source_scenario)) {
            problems.push_back("oracle " + std::to_string(id) + " cites unknown scenario " + o.source_scenario);
        }
    }
    return problems;
}

std::optional<StepId> step_id_of_document(const std::string& document_id) {
    if (!document_id.starts_with("step:")) return std::nullopt;
    try {
        std::size_t pos = 0;
        int id = std::stoi(document_id.substr(5), &pos);
        if (pos != document_id.size() - 5) return std::nullopt;
        return id;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

nlohmann::ordered_json to_json(const Skg& skg) {
    using oj = nlohmann::ordered_json;
    oj scenarios = oj::array();
    for (const auto& [id, sc] : skg.scenarios) {
        oj j;
        j["id"] = sc.id;
        j["summary"] = sc.summary;
        j["preconditions"] = sc.preconditions;
        j["steps"] = sc.steps;
        j["oracles"] = sc.oracles;
        j["step_ids"] = skg.scenario_steps.at(id);
        scenarios.push_back(std::move(j));
    }
    oj steps = oj::array();
    for (const auto& [id, s] : skg.steps) {
        oj j;
        j["id"] = s.id;
        j["canonical"] = s.canonical;
        j["alternatives"] = s.alternatives;
        j["oracle_ids"] = s.oracle_ids;
        steps.push_back(std::move(j));
    }
    oj oracles = oj::array();
    for (const auto& [id, o] : skg.oracles) {
        oj j;
        j["id"] = o.id;
        j["text"] = o.text;
        j["step_ids"] = o.step_ids;
        j["source_scenario"] = o.source_scenario;
        oracles.push_back(std::move(j));
    }
    oj out;
    out["embedder"] = skg.embedder_id;
    out["similarity_threshold"] = skg.options.similarity_threshold;
    out["attach_all_steps"] = skg.options.attach_all_steps;
    out["scenarios"] = std::move(scenarios);
    out["steps"] = std::move(steps);
    out["oracles"] = std::move(oracles);
    return out;
}

Skg skg_from_json(const nlohmann::json& j) {
    Skg g;
    g.embedder_id = j.at("embedder").get<std::string>();
    g.options.similarity_threshold = j.at("similarity_threshold").get<double>();
    g.options.attach_all_steps = j.at("attach_all_steps").get<bool>();
    for (const auto& js : j.at("scenarios")) {
        corpus::Scenario sc;
        sc.id = js.at("id").get<std::string>();
        sc.summary = js.at("summary").get<std::string>();
        sc.preconditions = js.at("preconditions").get<std::vector<std::string>>();
        sc.steps = js.at("steps").get<std::vector<std::string>>();
        sc.oracles = js.at("oracles").get<std::vector<std::string>>();
        g.scenario_steps.emplace(sc.id, js.at("step_ids").get<std::vector<StepId>>());
        g.scenarios.emplace(sc.id, std::move(sc));
    }
    for (const auto& js : j.at("steps")) {
        NormalizedStep s;
        s.id = js.at("id").get<StepId>();
        s.canonical = js.at("canonical").get<std::string>();
        s.alternatives = js.at("alternatives").get<std::set<std::string>>();
        s.oracle_ids = js.at("oracle_ids").get<std::set<OracleId>>();
        g.steps.emplace(s.id, std::move(s));
    }
    for (const auto& jo : j.at("oracles")) {
        Oracle o;
        o.id = jo.at("id").get<OracleId>();
        o.text = jo.at("text").get<std::string>();
        o.step_ids = jo.at("step_ids").get<std::set<StepId>>();
        o.source_scenario = jo.at("source_scenario").get<std::string>();
        g.oracles.emplace(o.id, std::move(o));
    }
    return g;
}

}  // namespace soap::skg
