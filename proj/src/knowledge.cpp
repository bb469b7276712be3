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

#include "soap/knowledge.hpp"

#include <fstream>
#include <sstream>

#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap {

KnowledgeBase build_knowledge(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                              const skg::BuildOptions& options, const retrieval::ChunkParams& chunking) {
    KnowledgeBase kb;
    kb.graph = skg::build_graph(scenarios, embedder, options);
    kb.index = retrieval::VectorIndex::build(skg::to_structured_text(kb.graph), embedder, chunking);
    return kb;
}

std::string serialize_knowledge(const KnowledgeBase& kb) {
    nlohmann::ordered_json j;
    j["format"] = "soap-skg";
    j["version"] = kKnowledgeFormatVersion;
    j["graph"] = skg::to_json(kb.graph);
    j["index"] = kb.index.to_json();
    return j.dump() + "\n";
}

KnowledgeBase parse_knowledge(std::string_view contents, const std::string& file_name) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(contents);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(file_name, 1, std::string("not a knowledge file: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "soap-skg") {
        throw FormatError(file_name, 1, "missing 'soap-skg' format header");
    }
    if (j.value("version", 0) != kKnowledgeFormatVersion) {
        throw FormatError(file_name, 1, "unsupported knowledge file version " + j.value("version", nlohmann::json()).dump());
    }
    KnowledgeBase kb;
    try {
        kb.graph = skg::skg_from_json(j.at("graph"));
        kb.index = retrieval::VectorIndex::from_json(j.at("index"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(file_name, 1, std::string("bad knowledge file: ") + e.what());
    }
    if (auto problems = skg::check_invariants(kb.graph); !problems.empty()) {
        throw FormatError(file_name, 1, "inconsistent graph: " + problems.front());
    }
    return kb;
}

void save_knowledge(const std::filesystem::path& path, const KnowledgeBase& kb) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_knowledge(kb);
    if (!out) throw IoError("write failed for " + path.string());
}

KnowledgeBase load_knowledge(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_knowledge(ss.str(), path.string());
}

}  // namespace soap
