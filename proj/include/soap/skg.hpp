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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "soap/corpus.hpp"
#include "soap/embedding.hpp"
#include "soap/retrieval.hpp"

namespace soap::skg {

using StepId = int;
using OracleId = int;

/// A cluster of step descriptions with the same meaning.
struct NormalizedStep {
    StepId id = 0;
    std::string canonical;               // member of `alternatives`
    std::set<std::string> alternatives;  // nonempty
    std::set<OracleId> oracle_ids;

    bool operator==(const NormalizedStep&) const = default;
};

struct Oracle {
    OracleId id = 0;
    std::string text;
    std::set<StepId> step_ids;
    std::string source_scenario;

    bool operator==(const Oracle&) const = default;
};

struct BuildOptions {
    double similarity_threshold = 0.85;  // cosine
    bool attach_all_steps = false;       // default: oracles attach to the final step

    bool operator==(const BuildOptions&) const = default;
};

struct Skg {
    std::map<StepId, NormalizedStep> steps;
    std::map<OracleId, Oracle> oracles;
    std::map<std::string, corpus::Scenario> scenarios;
    std::map<std::string, std::vector<StepId>> scenario_steps;  // normalized step sequence per scenario
    std::string embedder_id;
    BuildOptions options;

    bool operator==(const Skg&) const = default;
};

struct Normalization {
    std::vector<NormalizedStep> steps;        // ids 1..n in canonical order
    std::map<std::string, StepId> step_of;    // raw step text -> step id
};

/// Clusters raw step texts: connected components of the graph linking two
/// distinct texts whose embeddings have cosine >= threshold. Input order
/// does not matter. Canonical = most frequent text, lexicographically
/// smallest among ties.
Normalization normalize_steps(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                              double threshold);

Skg build_graph(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                const BuildOptions& options = {});

/// One document per step ("step:<id>") followed by one per scenario
/// ("scenario:<id>").
std::vector<retrieval::Document> to_structured_text(const Skg& skg);

const NormalizedStep& lookup_step(const Skg& skg, StepId id);

/// Deduplicated union of the oracles attached to `ids`, sorted by oracle id.
std::vector<Oracle> oracles_for_steps(const Skg& skg, const std::vector<StepId>& ids);

/// Returns a description of each broken invariant; empty when the graph is
/// consistent.
std::vector<std::string> check_invariants(const Skg& skg);

/// Parses the step id out of a "step:<id>" document id.
std::optional<StepId> step_id_of_document(const std::string& document_id);

nlohmann::ordered_json to_json(const Skg& skg);
Skg skg_from_json(const nlohmann::json& j);

}  // namespace soap::skg
