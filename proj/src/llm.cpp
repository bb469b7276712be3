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

#include "soap/llm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap::llm {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::planner: return "planner";
        case Role::player: return "player";
        case Role::detector: return "detector";
        case Role::retriever: return "retriever";
    }
    return "planner";
}

std::optional<Role> parse_role(std::string_view s) {
    if (s == "planner") return Role::planner;
    if (s == "player") return Role::player;
    if (s == "detector") return Role::detector;
    if (s == "retriever") return Role::retriever;
    return std::nullopt;
}

std::string_view to_string(Schema s) {
    switch (s) {
        case Schema::plan: return "plan";
        case Schema::instruction: return "instruction";
        case Schema::findings: return "findings";
        case Schema::step_ids: return "step_ids";
    }
    return "plan";
}

MessageParts& MessageParts::text(std::string t) {
    parts.emplace_back(TextPart{std::move(t)});
    return *this;
}

MessageParts& MessageParts::image(ImagePart img) {
    parts.emplace_back(std::move(img));
    return *this;
}

std::string MessageParts::joined_text() const {
    std::string out;
    for (const auto& p : parts) {
        if (const auto* t = std::get_if<TextPart>(&p)) out += t->text;
    }
    return out;
}

std::size_t MessageParts::image_count() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += std::holds_alternative<ImagePart>(p) ? 1 : 0;
    return n;
}

std::string fingerprint(const MessageParts& parts) {
    std::string material;
    for (const auto& p : parts.parts) {
        if (const auto* t = std::get_if<TextPart>(&p)) {
            material += "text:" + std::to_string(t->text.size()) + ":" + t->text + "\n";
        } else {
            const auto& img = std::get<ImagePart>(p);
            material += "image:" + img.media_type + ":" + text::sha256_hex(img.bytes) + "\n";
        }
    }
    return text::sha256_hex(material);
}

nlohmann::ordered_json describe_query(const MessageParts& parts) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& p : parts.parts) {
        if (const auto* t = std::get_if<TextPart>(&p)) {
            j.push_back({{"type", "text"}, {"text", t->text}});
        } else {
            const auto& img = std::get<ImagePart>(p);
            j.push_back({{"type", "image"},
                         {"media_type", img.media_type},
                         {"width", img.width},
                         {"height", img.height},
                         {"sha256", text::sha256_hex(img.bytes)}});
        }
    }
    return j;
}

// HTTP

HttpChatBackend::HttpChatBackend(http::Endpoint endpoint, std::string model)
    : endpoint_(std::move(endpoint)), model_(std::move(model)) {}

namespace {

nlohmann::json content_parts(const MessageParts& parts) {
    nlohmann::json content = nlohmann::json::array();
    for (const auto& p : parts.parts) {
        if (const auto* t = std::get_if<TextPart>(&p)) {
            content.push_back({{"type", "text"}, {"text", t->text}});
        } else {
            const auto& img = std::get<ImagePart>(p);
            content.push_back({{"type", "image_url"},
                               {"image_url", {{"url", "data:" + img.media_type + ";base64," + text::base64_encode(img.bytes)}}}});
        }
    }
    return content;
}

}  // namespace

nlohmann::json HttpChatBackend::build_request(const ChatRequest& request) const {
    nlohmann::json messages = nlohmann::json::array();
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    for (const auto& rec : request.history) {
        messages.push_back({{"role", "user"}, {"content", content_parts(rec.query)}});
        messages.push_back({{"role", "assistant"}, {"content", rec.response}});
    }
    messages.push_back({{"role", "user"}, {"content", content_parts(request.query)}});
    return {{"model", model_}, {"messages", std::move(messages)}, {"temperature", 0}};
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    auto reply = http::post_json(endpoint_, "/chat/completions", build_request(request));
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw BackendError("chat reply content is not a string");
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unexpected chat reply: ") + e.what());
    }
}

// Transcripts

std::string serialize_entry(const TranscriptEntry& e) {
    nlohmann::ordered_json j;
    j["role"] = to_string(e.role);
    j["turn"] = e.turn;
    if (e.query_fingerprint) j["query_fingerprint"] = *e.query_fingerprint;
    j["response"] = e.response;
    if (e.query) j["query"] = *e.query;
    return j.dump();
}

std::vector<TranscriptEntry> parse_transcript(std::string_view contents, const std::string& file_name) {
    std::vector<TranscriptEntry> out;
    auto lines = text::split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(file_name, i + 1, std::string("invalid JSON: ") + e.what());
        }
        try {
            TranscriptEntry e;
            auto role = parse_role(j.at("role").get<std::string>());
            if (!role) throw FormatError(file_name, i + 1, "unknown role");
            e.role = *role;
            e.turn = j.at("turn").get<int>();
            if (e.turn < 1) throw FormatError(file_name, i + 1, "turn must be >= 1");
            if (auto it = j.find("query_fingerprint"); it != j.end() && !it->is_null()) {
                e.query_fingerprint = it->get<std::string>();
            }
            e.response = j.at("response").get<std::string>();
            if (auto it = j.find("query"); it != j.end()) e.query = nlohmann::ordered_json(*it);
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError(file_name, i + 1, std::string("bad transcript entry: ") + ex.what());
        }
    }
    return out;
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open transcript " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_transcript(ss.str(), path.string());
}

PlaybackBackend::PlaybackBackend(std::vector<TranscriptEntry> entries, std::string source) : source_(std::move(source)) {
    for (auto& e : entries) {
        auto key = std::make_pair(e.role, e.turn);
        if (entries_.contains(key)) {
            throw FormatError(source_, 0,
                              "duplicate transcript entry for " + std::string(to_string(e.role)) + " turn " +
                                  std::to_string(e.turn));
        }
        entries_.emplace(key, std::move(e));
    }
}

std::shared_ptr<PlaybackBackend> PlaybackBackend::from_file(const std::filesystem::path& path) {
    return std::make_shared<PlaybackBackend>(load_transcript(path), path.string());
}

std::string PlaybackBackend::complete(const ChatRequest& request) {
    auto it = entries_.find({request.role, request.turn});
    if (it == entries_.end()) {
        throw TranscriptExhausted("transcript " + source_ + " has no " + std::string(to_string(request.role)) +
                                  " turn " + std::to_string(request.turn));
    }
    const auto& e = it->second;
    if (e.query_fingerprint && *e.query_fingerprint != request.query_fingerprint) {
        throw TranscriptMismatch("transcript " + source_ + ": " + std::string(to_string(request.role)) + " turn " +
                                 std::to_string(request.turn) + " was recorded for a different query (expected " +
                                 *e.query_fingerprint + ", got " + request.query_fingerprint + ")");
    }
    return e.response;
}

std::size_t PlaybackBackend::turns_for(Role role) const {
    std::size_t n = 0;
    for (const auto& [key, _] : entries_) n += key.first == role ? 1 : 0;
    return n;
}

RoutingBackend& RoutingBackend::route(Role role, std::shared_ptr<ChatBackend> backend) {
    routes_[role] = std::move(backend);
    return *this;
}

std::string RoutingBackend::id() const {
    std::string out = "routed(" + (fallback_ ? fallback_->id() : std::string("none"));
    for (const auto& [role, b] : routes_) out += "," + std::string(to_string(role)) + "=" + b->id();
    return out + ")";
}

std::string RoutingBackend::complete(const ChatRequest& request) {
    auto it = routes_.find(request.role);
    if (it != routes_.end()) return it->second->complete(request);
    if (!fallback_) throw BackendError("no backend routed for " + std::string(to_string(request.role)));
    return fallback_->complete(request);
}

FileTranscriptSink::FileTranscriptSink(const std::filesystem::path& path) : path_(path) {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create transcript " + path_.string());
}

void FileTranscriptSink::write(const TranscriptEntry& entry) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to transcript " + path_.string());
    out << serialize_entry(entry) << '\n';
}

void MemoryTranscriptSink::write(const TranscriptEntry& entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
}

std::vector<TranscriptEntry> MemoryTranscriptSink::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

// Agents

void validate_prompt(std::string_view prompt) {
    std::size_t pos = 0;
    for (auto marker : {kRoleAssignmentMarker, kTaskDescriptionMarker, kOutputGuidelinesMarker}) {
        auto at = prompt.find(marker, pos);
        if (at == std::string_view::npos) {
            throw PromptValidationError("system prompt lacks '" + std::string(marker) + "' (or it is out of order)");
        }
        pos = at + marker.size();
    }
}

AgentHandle::AgentHandle(Role role, std::string system_prompt, std::shared_ptr<ChatBackend> backend, AgentOptions options)
    : role_(role), system_prompt_(std::move(system_prompt)), backend_(std::move(backend)), options_(std::move(options)) {
    if (!backend_) throw BackendError("agent needs a backend");
    backend_id_ = backend_->id();
}

std::string AgentHandle::query(const MessageParts& parts) {
    if (parts.parts.empty()) throw Error("query must have at least one part");
    std::span<const Record> history(session_.records());
    if (options_.window && history.size() > *options_.window) {
        history = history.subspan(history.size() - *options_.window);
    }
    const int turn = static_cast<int>(session_.size()) + 1;
    const auto fp = fingerprint(parts);
    ChatRequest req{role_, turn, system_prompt_, history, parts, fp};
    auto response = backend_->complete(req);
    if (options_.sink) {
        TranscriptEntry e;
        e.role = role_;
        e.turn = turn;
        e.query_fingerprint = fp;
        e.response = response;
        e.query = describe_query(parts);
        options_.sink->write(e);
    }
    session_.append({parts, response});
    return response;
}

AgentHandle create_agent(Role role, std::string system_prompt, std::shared_ptr<ChatBackend> backend,
                         AgentOptions options) {
    validate_prompt(system_prompt);
    return AgentHandle(role, std::move(system_prompt), std::move(backend), std::move(options));
}

// Structured replies

namespace {

std::string strip_fences(std::string_view text) {
    auto open = text.find("```");
    if (open == std::string_view::npos) return std::string(text::trim(text));
    auto close = text.find("```", open + 3);
    auto body = text.substr(open + 3, close == std::string_view::npos ? std::string_view::npos : close - open - 3);
    // language tag, e.g. ```json
    std::size_t tag = 0;
    while (tag < body.size() && std::isalpha(static_cast<unsigned char>(body[tag]))) ++tag;
    body.remove_prefix(tag);
    return std::string(text::trim(body));
}

nlohmann::json parse_lenient(std::string_view text) {
    auto stripped = strip_fences(text);
    try {
        return nlohmann::json::parse(stripped);
    } catch (const nlohmann::json::parse_error&) {
    }
    auto first = stripped.find('{');
    auto last = stripped.rfind('}');
    if (first != std::string::npos && last != std::string::npos && last > first) {
        try {
            return nlohmann::json::parse(stripped.substr(first, last - first + 1));
        } catch (const nlohmann::json::parse_error&) {
        }
    }
    throw SchemaViolation({"response is not valid JSON"});
}

bool is_string_array(const nlohmann::json& j) {
    if (!j.is_array()) return false;
    for (const auto& e : j) {
        if (!e.is_string()) return false;
    }
    return true;
}

void require_string_array(const nlohmann::json& obj, const char* key, bool required, std::vector<std::string>& problems,
                          const std::string& where = "") {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) problems.push_back(where + key);
        return;
    }
    if (!is_string_array(*it)) problems.push_back(where + key + " (expected array of strings)");
}

}  // namespace

nlohmann::json parse_json_response(std::string_view text, Schema schema) {
    auto j = parse_lenient(text);
    if (!j.is_object()) throw SchemaViolation({"response must be a JSON object"});
    std::vector<std::string> problems;
    switch (schema) {
        case Schema::plan: {
            auto next = j.find("NEXT STEP");
            if (next == j.end()) problems.push_back("NEXT STEP");
            else if (!next->is_string()) problems.push_back("NEXT STEP (expected string)");
            bool done = next != j.end() && next->is_string() && next->get<std::string>() == "DONE";
            require_string_array(j, "SUB STEPS", !done, problems);
            break;
        }
        case Schema::instruction: {
            auto action = j.find("action");
            if (action == j.end()) problems.push_back("action");
            else if (!action->is_string()) problems.push_back("action (expected string)");
            const nlohmann::json* args = &j;
            if (auto a = j.find("arguments"); a != j.end()) {
                if (!a->is_object()) problems.push_back("arguments (expected object)");
                else args = &*a;
            }
            if (auto p = args->find("position"); p != args->end() && !p->is_null() && !p->is_number_integer()) {
                if (!(p->is_string() && !p->get<std::string>().empty() &&
                      p->get<std::string>().find_first_not_of("0123456789") == std::string::npos)) {
                    problems.push_back("position (expected integer)");
                }
            }
            if (auto t = args->find("text"); t != args->end() && !t->is_null() && !t->is_string()) {
                problems.push_back("text (expected string)");
            }
            if (auto d = args->find("direction"); d != args->end() && !d->is_null() && !d->is_string()) {
                problems.push_back("direction (expected string)");
            }
            break;
        }
        case Schema::findings: {
            auto f = j.find("findings");
            if (f == j.end()) {
                problems.push_back("findings");
                break;
            }
            if (!f->is_array()) {
                problems.push_back("findings (expected array)");
                break;
            }
            for (std::size_t i = 0; i < f->size(); ++i) {
                const auto& item = (*f)[i];
                std::string where = "findings[" + std::to_string(i) + "].";
                if (!item.is_object()) {
                    problems.push_back(where + " (expected object)");
                    continue;
                }
                auto s = item.find("summary");
                if (s == item.end()) problems.push_back(where + "summary");
                else if (!s->is_string() || text::trim(s->get<std::string>()).empty()) {
                    problems.push_back(where + "summary (expected nonempty string)");
                }
                for (const char* k : {"s2rs", "ebs", "obs"}) require_string_array(item, k, false, problems, where);
                if (auto v = item.find("violated_oracles"); v != item.end()) {
                    if (!v->is_array()) {
                        problems.push_back(where + "violated_oracles (expected array)");
                    } else {
                        for (const auto& o : *v) {
                            if (!o.is_object() || !o.contains("text") || !o["text"].is_string()) {
                                problems.push_back(where + "violated_oracles[].text");
                            }
                            if (o.is_object() && o.contains("origin") && !o["origin"].is_string()) {
                                problems.push_back(where + "violated_oracles[].origin (expected string)");
                            }
                        }
                    }
                }
            }
            break;
        }
        case Schema::step_ids: {
            auto ids = j.find("step_ids");
            if (ids == j.end()) {
                problems.push_back("step_ids");
            } else if (!ids->is_array()) {
                problems.push_back("step_ids (expected array)");
            } else {
                for (const auto& id : *ids) {
                    if (!id.is_number_integer()) {
                        problems.push_back("step_ids (expected integers)");
                        break;
                    }
                }
            }
            break;
        }
    }
    if (!problems.empty()) throw SchemaViolation(std::move(problems));
    return j;
}

std::string retry_nudge(const std::string& problem) {
    return "Your previous reply could not be used (" + problem +
           "). Respond with valid JSON only, exactly as specified in the Output Guidelines.";
}

}  // namespace soap::llm
