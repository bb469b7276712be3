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

// Shared helpers for the unit tests and the acceptance binary.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "soap/knowledge.hpp"
#include "soap/llm.hpp"
#include "soap/orchestrator.hpp"

namespace soap::testing {

namespace fs = std::filesystem;

fs::path fixtures_dir();

/// Empty scratch directory under the system temp dir, unique per process.
fs::path fresh_dir(std::string_view name);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view contents);

/// Knowledge built from a fixture corpus with the default hash embedder,
/// cached per process and saved once to a scratch file.
const KnowledgeBase& knowledge_for(std::string_view corpus);
fs::path knowledge_file_for(std::string_view corpus);

/// The browser scenario: simulator, recorded transcript, built knowledge,
/// no settle delay and normalized timestamps.
orchestrator::RunConfig tabs_config(const fs::path& run_dir);
orchestrator::RunConfig podcast_config(const fs::path& run_dir);

/// Two-screen 400x800 simulator with 100 px cells (32 labels).
fs::path write_tiny_sim(const fs::path& dir);

/// Planner never says DONE; every player turn taps label 5.
std::vector<llm::TranscriptEntry> never_done_transcript(int turns);

/// Text parts of an entry's audited query, concatenated.
std::string query_text(const llm::TranscriptEntry& entry);

/// Entries of one role in a run transcript, in file order.
std::vector<llm::TranscriptEntry> entries_for(const fs::path& transcript, llm::Role role);

}  // namespace soap::testing
