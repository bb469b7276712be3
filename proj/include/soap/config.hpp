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

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "soap/adb.hpp"
#include "soap/agents.hpp"
#include "soap/embedding.hpp"
#include "soap/http.hpp"

namespace soap {

struct RunBounds {
    int max_substeps_per_step = 10;
    int max_total_instructions = 50;
    std::chrono::milliseconds settle{2000};

    bool operator==(const RunBounds&) const = default;
};

struct EmbeddingSettings {
    std::string kind = "hash";  // "hash" or "remote"
    std::size_t dimension = 256;
    std::string model;  // remote only
};

/// Tool-wide settings; every key is optional (docs/formats.md).
struct Settings {
    http::Endpoint llm;  // base_url must be set before the http backend is used
    std::string llm_model;
    EmbeddingSettings embedding;
    device::AdbOptions adb;
    RunBounds bounds;
    agents::RetrievalSettings retrieval;
    int cell_size = 100;
    std::optional<std::size_t> dialogue_window;
    std::filesystem::path prompts_dir;  // empty: builtin prompts only
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Applies a JSON settings object onto `base`. Unknown keys are errors.
Settings parse_settings(const nlohmann::json& j, Settings base = {}, const std::string& file_name = "<memory>");

/// Defaults, then the file (when given), then SOAP_LLM_BASE_URL,
/// SOAP_LLM_API_KEY, SOAP_LLM_MODEL and ANDROID_SERIAL.
Settings load_settings(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

/// Embedder matching an index built by `embedder_id` ("hash-bow-<dim>" or
/// "remote:<model>:<dim>").
std::unique_ptr<Embedder> make_embedder(const std::string& embedder_id, const Settings& settings);
/// Embedder for building a new knowledge base from `settings`.
std::unique_ptr<Embedder> make_embedder(const Settings& settings);

}  // namespace soap
