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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace soap::corpus {

enum class Source { bugzilla, github_issue, github_pr, manual };

std::string_view to_string(Source s);
std::optional<Source> parse_source(std::string_view s);

struct RawReport {
    std::string id;
    Source source = Source::manual;
    std::string title;
    std::string body;
    std::vector<std::string> labels;
};

/// Sections recognized in a report body. `title` is always present; the
/// others are std::nullopt when the body has no matching heading.
struct SectionMap {
    std::string report_id;
    std::string title;
    std::optional<std::vector<std::string>> prerequisites;
    std::optional<std::vector<std::string>> s2rs;
    std::optional<std::vector<std::string>> ebs;
    std::optional<std::vector<std::string>> obs;
};

/// One report distilled into scenario knowledge. `id` is the id of the
/// report it came from.
struct Scenario {
    std::string id;
    std::string summary;
    std::vector<std::string> preconditions;
    std::vector<std::string> steps;
    std::vector<std::string> oracles;

    bool operator==(const Scenario&) const = default;
};

/// Case-insensitive heading spellings per section.
struct HeadingLexicon {
    std::vector<std::string> s2rs{"steps to reproduce", "s2r", "str", "reproduce"};
    std::vector<std::string> ebs{"expected behavior", "expected result", "eb"};
    std::vector<std::string> obs{"actual behavior", "actual result", "ob"};
    std::vector<std::string> prerequisites{"prerequisites", "preconditions", "environment"};
};

SectionMap extract_sections(const RawReport& report, const HeadingLexicon& lexicon = {});

/// Throws EmptyScenario when the sections hold neither steps nor oracles.
Scenario to_scenario(const SectionMap& sections, const std::string& id);

/// Strips one leading enumerator ("1.", "2)", "-", "*", "+", "•") and
/// normalizes whitespace.
std::string strip_enumerator(std::string_view item);

/// Splits one line at explicit enumerators: "1. A 2. B" yields {"1. A", "2. B"}.
/// Numbers must run consecutively from the first one found at line start.
std::vector<std::string> split_enumerated(std::string_view line);

struct SkippedReport {
    std::string id;
    std::string file;
    std::string reason;
};

struct CorpusLoad {
    std::vector<Scenario> scenarios;  // sorted by id
    std::vector<SkippedReport> skipped;
};

/// Parses one front-matter report file (see docs/formats.md).
RawReport parse_report_file(std::string_view contents, const std::string& file_name);

/// Parses a line-delimited export, one JSON report object per line.
std::vector<RawReport> parse_report_lines(std::string_view contents, const std::string& file_name);

/// Loads every report under `path` (a directory of report files, or one
/// `.jsonl` export) and distills them into scenarios.
CorpusLoad load_corpus(const std::filesystem::path& path, const HeadingLexicon& lexicon = {});

}  // namespace soap::corpus
