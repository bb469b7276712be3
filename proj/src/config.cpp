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

#include "soap/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "soap/errors.hpp"

namespace soap {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
    return std::nullopt;
}

namespace {

class Reader {
public:
    Reader(const json& obj, std::string where, const std::string& file) : obj_(obj), where_(std::move(where)), file_(file) {
        if (!obj_.is_object()) fail(where_, "expected an object");
    }
    void finish() const {
        for (const auto& [k, v] : obj_.items()) {
            if (!used_.contains(k)) fail(where_ + k, "unknown key");
        }
    }

    const json* get(const std::string& key) {
        used_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (const auto* v = get(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception& e) {
                fail(where_ + key, e.what());
            }
        }
    }

    void read_positive(const std::string& key, int& out) {
        read(key, out);
        if (out <= 0) fail(where_ + key, "must be positive");
    }

    void read_positive(const std::string& key, std::size_t& out) {
        if (const auto* v = get(key)) {
            if (!v->is_number_integer() || v->get<long long>() <= 0) fail(where_ + key, "must be a positive integer");
            out = v->get<std::size_t>();
        }
    }

    template <typename Rep, typename Period>
    void read_duration(const std::string& key, std::chrono::duration<Rep, Period>& out, bool seconds) {
        if (const auto* v = get(key)) {
            if (!v->is_number() || v->get<double>() < 0) fail(where_ + key, "must be a non-negative number");
            double n = v->get<double>();
            out = std::chrono::duration_cast<std::chrono::duration<Rep, Period>>(
                std::chrono::duration<double, std::milli>(seconds ? n * 1000.0 : n));
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw FormatError(file_, 1, "settings key '" + key + "': " + why);
    }

private:
    const json& obj_;
    std::string where_;
    const std::string& file_;
    std::set<std::string> used_;
};

}  // namespace

Settings parse_settings(const json& j, Settings s, const std::string& file_name) {
    Reader root(j, "", file_name);
    if (const auto* llm = root.get("llm")) {
        Reader r(*llm, "llm.", file_name);
        r.read("base_url", s.llm.base_url);
        r.read("api_key", s.llm.api_key);
        r.read("model", s.llm_model);
        r.read_duration("timeout_s", s.llm.timeout, true);
        r.finish();
    }
    if (const auto* e = root.get("embedding")) {
        Reader r(*e, "embedding.", file_name);
        r.read("kind", s.embedding.kind);
        if (s.embedding.kind != "hash" && s.embedding.kind != "remote") r.fail("embedding.kind", "expected hash or remote");
        r.read_positive("dimension", s.embedding.dimension);
        r.read("model", s.embedding.model);
        r.finish();
    }
    if (const auto* a = root.get("adb")) {
        Reader r(*a, "adb.", file_name);
        r.read("path", s.adb.adb_path);
        r.read("serial", s.adb.serial);
        r.read_positive("long_tap_ms", s.adb.long_tap_ms);
        r.read("scroll_span", s.adb.scroll_span);
        if (s.adb.scroll_span <= 0 || s.adb.scroll_span > 1) r.fail("adb.scroll_span", "must be in (0, 1]");
        r.read_positive("swipe_ms", s.adb.swipe_ms);
        r.read_duration("command_timeout_s", s.adb.command_timeout, true);
        r.read_duration("capture_timeout_s", s.adb.capture_timeout, true);
        r.finish();
    }
    if (const auto* b = root.get("bounds")) {
        Reader r(*b, "bounds.", file_name);
        r.read_positive("max_substeps_per_step", s.bounds.max_substeps_per_step);
        r.read_positive("max_total_instructions", s.bounds.max_total_instructions);
        r.read_duration("settle_ms", s.bounds.settle, false);
        r.finish();
    }
    if (const auto* rt = root.get("retrieval")) {
        Reader r(*rt, "retrieval.", file_name);
        r.read_positive("planner_k", s.retrieval.planner_k);
        r.read_positive("detector_k", s.retrieval.detector_k);
        r.read_positive("oracle_cap", s.retrieval.oracle_cap);
        r.read("rerank", s.retrieval.rerank);
        std::string mode(retrieval::to_string(s.retrieval.mode));
        r.read("mode", mode);
        auto parsed = retrieval::parse_search_mode(mode);
        if (!parsed) r.fail("retrieval.mode", "expected semantic, keyword or hybrid");
        s.retrieval.mode = *parsed;
        r.finish();
    }
    if (const auto* g = root.get("grid")) {
        Reader r(*g, "grid.", file_name);
        r.read("cell_size", s.cell_size);
        if (s.cell_size < device::kMinCellSize) r.fail("grid.cell_size", "too small");
        r.finish();
    }
    if (const auto* w = root.get("dialogue_window")) {
        if (!w->is_number_integer() || w->get<long long>() <= 0) root.fail("dialogue_window", "must be a positive integer");
        s.dialogue_window = w->get<std::size_t>();
    }
    std::string prompts;
    root.read("prompts_dir", prompts);
    if (!prompts.empty()) s.prompts_dir = prompts;
    root.finish();
    return s;
}

Settings load_settings(const std::optional<fs::path>& file, const EnvLookup& env) {
    Settings s;
    if (file) {
        std::ifstream in(*file, std::ios::binary);
        if (!in) throw IoError("cannot open settings file " + file->string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw FormatError(file->string(), 1, e.what());
        }
        s = parse_settings(j, s, file->string());
        if (!s.prompts_dir.empty() && s.prompts_dir.is_relative()) s.prompts_dir = file->parent_path() / s.prompts_dir;
    }
    if (auto v = env("SOAP_LLM_BASE_URL")) s.llm.base_url = *v;
    if (auto v = env("SOAP_LLM_API_KEY")) s.llm.api_key = *v;
    if (auto v = env("SOAP_LLM_MODEL")) s.llm_model = *v;
    if (auto v = env("ANDROID_SERIAL")) s.adb.serial = *v;
    return s;
}

std::unique_ptr<Embedder> make_embedder(const std::string& id, const Settings& settings) {
    if (id.starts_with("hash-bow-")) {
        try {
            return std::make_unique<HashEmbedder>(std::stoul(id.substr(9)));
        } catch (const std::exception&) {
        }
    } else if (id.starts_with("remote:")) {
        auto last = id.rfind(':');
        if (last > 7) {
            try {
                return std::make_unique<RemoteEmbedder>(settings.llm, id.substr(7, last - 7),
                                                        std::stoul(id.substr(last + 1)));
            } catch (const std::exception&) {
            }
        }
    }
    throw Error("unsupported embedder id '" + id + "'");
}

std::unique_ptr<Embedder> make_embedder(const Settings& settings) {
    if (settings.embedding.kind == "remote") {
        if (settings.embedding.model.empty()) throw Error("embedding.model is required for remote embeddings");
        return std::make_unique<RemoteEmbedder>(settings.llm, settings.embedding.model, settings.embedding.dimension);
    }
    return std::make_unique<HashEmbedder>(settings.embedding.dimension);
}

}  // namespace soap
