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
#include <vector>

#include "soap/corpus.hpp"
#include "soap/embedding.hpp"
#include "soap/retrieval.hpp"
#include "soap/skg.hpp"

namespace soap {

/// The scenario graph together with its vectorized structured text: what
/// the Planner and Detector retrieve from.
struct KnowledgeBase {
    skg::Skg graph;
    retrieval::VectorIndex index;
};

KnowledgeBase build_knowledge(const std::vector<corpus::Scenario>& scenarios, const Embedder& embedder,
                              const skg::BuildOptions& options = {}, const retrieval::ChunkParams& chunking = {});

inline constexpr int kKnowledgeFormatVersion = 1;

/// Single self-describing file: header fields "format" and "version", then
/// the graph tables and the index (docs/formats.md).
void save_knowledge(const std::filesystem::path& path, const KnowledgeBase& kb);
KnowledgeBase load_knowledge(const std::filesystem::path& path);

std::string serialize_knowledge(const KnowledgeBase& kb);
KnowledgeBase parse_knowledge(std::string_view contents, const std::string& file_name = "<memory>");

}  // namespace soap
