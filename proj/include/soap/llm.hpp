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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "soap/http.hpp"

namespace soap::llm {

/// `retriever` is the optional oracle-reranking pass of the detector.
enum class Role { planner, player, detector, retriever };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct TextPart {
    std::string text;
};

struct ImagePart {
    std::vector<std::uint8_t> bytes;
    std::string media_type = "image/png";
    int width = 0;
    int height = 0;
};

using Part = std::variant<TextPart, ImagePart>;

/// One multi-modal query: ordered text and image parts.
struct MessageParts {
    std::vector<Part> parts;

    MessageParts& text(std::string t);
    MessageParts& image(ImagePart img);

    /// Concatenation of the text parts, in order.
    std::string joined_text() const;
    std::size_t image_count() const;
};

/// sha256 over the text parts and the sha256 digests of the image bytes.
std::string fingerprint(const MessageParts& parts);

struct Record {
    MessageParts query;
    std::string response;
};

/// Append-only query/response history of one agent.
class DialogueSession {
public:
    void append(Record r) { records_.push_back(std::move(r)); }
    const std::vector<Record>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }

private:
    std::vector<Record> records_;
};

struct ChatRequest {
    Role role;
    int turn;  // 1-based, per agent
    const std::string& system_prompt;
    std::span<const Record> history;
    const MessageParts& query;
    const std::string& query_fingerprint;
};

/// Backends must tolerate concurrent calls from distinct agents.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// OpenAI-compatible `/chat/completions`. Images travel as base64 data URLs.
class HttpChatBackend final : public ChatBackend {
public:
    HttpChatBackend(http::Endpoint endpoint, std::string model);
    std::string id() const override { return "http:" + model_; }
    std::string complete(const ChatRequest& request) override;

    /// Request body for `request`; exposed for tests.
    nlohmann::json build_request(const ChatRequest& request) const;

private:
    http::Endpoint endpoint_;
    std::string model_;
};

/// One line of a transcript file.
struct TranscriptEntry {
    Role role = Role::planner;
    int turn = 0;
    std::optional<std::string> query_fingerprint;  // absent: not checked on playback
    std::string response;
    std::optional<nlohmann::ordered_json> query;  // audit copy of the query, ignored on playback
};

std::string serialize_entry(const TranscriptEntry& e);
std::vector<TranscriptEntry> parse_transcript(std::string_view contents, const std::string& file_name = "<memory>");
std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);

/// Audit form of a query: its text parts verbatim plus an image digest list.
nlohmann::ordered_json describe_query(const MessageParts& parts);

/// Replays responses keyed by (role, turn). A recorded fingerprint must
/// match the live query's fingerprint.
class PlaybackBackend final : public ChatBackend {
public:
    explicit PlaybackBackend(std::vector<TranscriptEntry> entries, std::string source = "<memory>");
    static std::shared_ptr<PlaybackBackend> from_file(const std::filesystem::path& path);

    std::string id() const override { return "replay:" + source_; }
    std::string complete(const ChatRequest& request) override;

    /// Number of entries for `role` in the transcript.
    std::size_t turns_for(Role role) const;

private:
    std::map<std::pair<Role, int>, TranscriptEntry> entries_;
    std::string source_;
};

/// Routes each role to its own backend; roles without an explicit route use
/// the fallback.
class RoutingBackend final : public ChatBackend {
public:
    explicit RoutingBackend(std::shared_ptr<ChatBackend> fallback) : fallback_(std::move(fallback)) {}
    RoutingBackend& route(Role role, std::shared_ptr<ChatBackend> backend);
    std::string id() const override;
    std::string complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatBackend> fallback_;
    std::map<Role, std::shared_ptr<ChatBackend>> routes_;
};

/// Shared, thread-safe line writer for transcript entries.
class TranscriptSink {
public:
    virtual ~TranscriptSink() = default;
    virtual void write(const TranscriptEntry& entry) = 0;
};

class FileTranscriptSink final : public TranscriptSink {
public:
    explicit FileTranscriptSink(const std::filesystem::path& path);
    void write(const TranscriptEntry& entry) override;

private:
    std::mutex mutex_;
    std::filesystem::path path_;
};

class MemoryTranscriptSink final : public TranscriptSink {
public:
    void write(const TranscriptEntry& entry) override;
    std::vector<TranscriptEntry> entries() const;

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptEntry> entries_;
};

inline constexpr std::string_view kRoleAssignmentMarker = "## Role Assignment";
inline constexpr std::string_view kTaskDescriptionMarker = "## Task Description";
inline constexpr std::string_view kOutputGuidelinesMarker = "## Output Guidelines";

/// Throws PromptValidationError unless the three role-play markers appear,
/// in order.
void validate_prompt(std::string_view system_prompt);

struct AgentOptions {
    std::optional<std::size_t> window;  // keep only the last N records in the request context
    std::shared_ptr<TranscriptSink> sink;
};

/// A role-played chat agent with its own dialogue session. Not thread-safe.
class AgentHandle {
public:
    AgentHandle(Role role, std::string system_prompt, std::shared_ptr<ChatBackend> backend, AgentOptions options = {});

    Role role() const noexcept { return role_; }
    const std::string& system_prompt() const noexcept { return system_prompt_; }
    const DialogueSession& session() const noexcept { return session_; }
    const std::string& backend_id() const noexcept { return backend_id_; }

    /// Sends `parts` with the (windowed) session as context and records the
    /// exchange.
    std::string query(const MessageParts& parts);

private:
    Role role_;
    std::string system_prompt_;
    std::shared_ptr<ChatBackend> backend_;
    std::string backend_id_;
    AgentOptions options_;
    DialogueSession session_;
};

AgentHandle create_agent(Role role, std::string system_prompt, std::shared_ptr<ChatBackend> backend,
                         AgentOptions options = {});

enum class Schema { plan, instruction, findings, step_ids };

std::string_view to_string(Schema s);

/// Strips markdown fences, parses JSON and checks the schema's required
/// fields. Unknown fields are kept but ignored by consumers.
nlohmann::json parse_json_response(std::string_view text, Schema schema);

/// Queries and parses; on failure re-asks with a "valid JSON only" nudge up
/// to `max_retries` times. `accept` may throw to reject a parsed value.
/// Every attempt is a recorded turn.
template <typename T>
T query_structured(AgentHandle& agent, const MessageParts& parts, Schema schema,
                   const std::function<T(const nlohmann::json&)>& accept, int max_retries = 2);

std::string retry_nudge(const std::string& problem);

}  // namespace soap::llm

#include "soap/llm_inl.hpp"
