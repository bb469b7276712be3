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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace soap {

/// Root of every error raised by the library. Callers that only need to
/// report a failure can catch this; the subclasses carry the structured
/// details for callers that recover.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// corpus

class MalformedReport : public Error {
public:
    MalformedReport(std::string report_id, const std::string& why)
        : Error("malformed report '" + report_id + "': " + why), report_id_(std::move(report_id)) {}
    const std::string& report_id() const noexcept { return report_id_; }

private:
    std::string report_id_;
};

class EmptyScenario : public Error {
public:
    explicit EmptyScenario(std::string report_id)
        : Error("report '" + report_id + "' carries no steps and no oracles"),
          report_id_(std::move(report_id)) {}
    const std::string& report_id() const noexcept { return report_id_; }

private:
    std::string report_id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(std::string file, std::size_t line, const std::string& why)
        : Error(file + ":" + std::to_string(line) + ": " + why), file_(std::move(file)), line_(line) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// skg / retrieval

class EmbedderFailure : public Error {
public:
    EmbedderFailure(std::string text, const std::string& why)
        : Error("embedding failed for '" + text + "': " + why), text_(std::move(text)) {}
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

class UnknownStepId : public Error {
public:
    explicit UnknownStepId(int id) : Error("unknown step id " + std::to_string(id)), id_(id) {}
    int id() const noexcept { return id_; }

private:
    int id_;
};

class InvalidChunkParams : public Error {
public:
    using Error::Error;
};

class EmptyIndex : public Error {
public:
    EmptyIndex() : Error("search on an empty index") {}
};

// llm

class PromptValidationError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class TranscriptExhausted : public Error {
public:
    using Error::Error;
};

class TranscriptMismatch : public Error {
public:
    using Error::Error;
};

class SchemaViolation : public Error {
public:
    explicit SchemaViolation(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

// device

class DeviceUnavailable : public Error {
public:
    using Error::Error;
};

class CaptureTimeout : public Error {
public:
    using Error::Error;
};

class ImageDecodeError : public Error {
public:
    using Error::Error;
};

class LabelOutOfRange : public Error {
public:
    LabelOutOfRange(int label, int max_label)
        : Error("grid label " + std::to_string(label) + " outside 1.." + std::to_string(max_label)) {}
};

class InvalidInstruction : public Error {
public:
    using Error::Error;
};

class NoGridContext : public Error {
public:
    NoGridContext() : Error("instruction needs a position but no labeled capture is available") {}
};

// orchestrator

class MissingLabel : public Error {
public:
    using Error::Error;
};

}  // namespace soap
