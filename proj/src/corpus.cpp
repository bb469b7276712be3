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

#include "soap/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap::corpus {

namespace fs = std::filesystem;

std::string_view to_string(Source s) {
    switch (s) {
        case Source::bugzilla: return "bugzilla";
        case Source::github_issue: return "github_issue";
        case Source::github_pr: return "github_pr";
        case Source::manual: return "manual";
    }
    return "manual";
}

std::optional<Source> parse_source(std::string_view s) {
    if (s == "bugzilla") return Source::bugzilla;
    if (s == "github_issue") return Source::github_issue;
    if (s == "github_pr") return Source::github_pr;
    if (s == "manual") return Source::manual;
    return std::nullopt;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a numeric enumerator ("12." / "3)") at the start of `s`
// including the delimiter, or 0.
std::size_t numeric_enumerator(std::string_view s, int* number = nullptr, char* delim = nullptr) {
    std::size_t i = 0;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == 0 || i > 3 || i >= s.size()) return 0;
    if (s[i] != '.' && s[i] != ')') return 0;
    if (i + 1 < s.size() && s[i + 1] != ' ' && s[i + 1] != '\t') return 0;
    if (number) *number = std::stoi(std::string(s.substr(0, i)));
    if (delim) *delim = s[i];
    return i + 1;
}

std::string strip_markup(std::string_view s) {
    s = text::trim(s);
    while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '_' || s.front() == '>')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == '#')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

enum class Section { none, prerequisites, s2rs, ebs, obs };

struct HeadingMatch {
    Section section = Section::none;
    bool is_heading = false;  // recognized or unrecognized heading line
    std::string inline_content;
};

bool phrase_matches(const std::string& label, const std::vector<std::string>& phrases) {
    for (const auto& p : phrases) {
        auto lp = text::to_lower(p);
        if (label == lp || label == lp + "s") return true;
    }
    return false;
}

HeadingMatch classify_line(std::string_view raw, const HeadingLexicon& lex) {
    HeadingMatch m;
    auto line = text::trim(raw);
    if (line.empty()) return m;
    bool markdown_heading = line.front() == '#';
    if (numeric_enumerator(line) > 0) return m;

    std::string label;
    std::string rest;
    bool had_colon = false;
    auto colon = line.find(':');
    if (colon != std::string_view::npos) {
        label = text::to_lower(strip_markup(line.substr(0, colon)));
        rest = strip_markup(line.substr(colon + 1));
        had_colon = true;
    } else {
        label = text::to_lower(strip_markup(line));
    }
    label = text::normalize_whitespace(label);

    Section s = Section::none;
    if (phrase_matches(label, lex.s2rs)) s = Section::s2rs;
    else if (phrase_matches(label, lex.ebs)) s = Section::ebs;
    else if (phrase_matches(label, lex.obs)) s = Section::obs;
    else if (phrase_matches(label, lex.prerequisites)) s = Section::prerequisites;

    if (s != Section::none && (had_colon || text::normalize_whitespace(text::to_lower(strip_markup(line))) == label)) {
        m.section = s;
        m.is_heading = true;
        m.inline_content = rest;
        return m;
    }
    if (markdown_heading) {
        m.is_heading = true;
        return m;
    }
    // "Some label:" with nothing after it closes the current section.
    if (had_colon && rest.empty() && colon == line.size() - 1) {
        auto words = text::whitespace_tokens(label);
        if (!words.empty() && words.size() <= 4) m.is_heading = true;
    }
    return m;
}

void append_items(std::vector<std::string>& dst, std::string_view line) {
    for (auto& piece : split_enumerated(line)) {
        auto item = strip_enumerator(piece);
        if (!item.empty()) dst.push_back(std::move(item));
    }
}

}  // namespace

std::string strip_enumerator(std::string_view item) {
    auto s = text::trim(item);
    if (auto n = numeric_enumerator(s); n > 0) {
        s.remove_prefix(n);
    } else if (s.size() >= 2 && (s[0] == '-' || s[0] == '*' || s[0] == '+') && (s[1] == ' ' || s[1] == '\t')) {
        s.remove_prefix(2);
    } else if (s.starts_with("\xE2\x80\xA2")) {  // bullet U+2022
        s.remove_prefix(3);
    }
    return text::normalize_whitespace(s);
}

std::vector<std::string> split_enumerated(std::string_view line) {
    auto s = text::trim(line);
    int number = 0;
    char delim = 0;
    if (numeric_enumerator(s, &number, &delim) == 0) return {std::string(s)};

    std::vector<std::string> pieces;
    std::size_t start = 0;
    std::size_t search_from = 1;
    for (;;) {
        std::string next = " " + std::to_string(number + 1) + delim + " ";
        auto pos = s.find(next, search_from);
        if (pos == std::string_view::npos) {
            // enumerator may sit at the very end of the line
            pieces.emplace_back(text::trim(s.substr(start)));
            break;
        }
        pieces.emplace_back(text::trim(s.substr(start, pos - start)));
        start = pos + 1;
        search_from = start + 1;
        ++number;
    }
    return pieces;
}

SectionMap extract_sections(const RawReport& report, const HeadingLexicon& lexicon) {
    if (report.body.find('\0') != std::string::npos) throw MalformedReport(report.id, "body contains NUL bytes");
    if (!text::is_valid_utf8(report.body)) throw MalformedReport(report.id, "body is not valid UTF-8");
    if (!text::is_valid_utf8(report.title)) throw MalformedReport(report.id, "title is not valid UTF-8");

    SectionMap out;
    out.report_id = report.id;
    out.title = text::normalize_whitespace(report.title);

    Section current = Section::none;
    auto slot = [&](Section s) -> std::vector<std::string>& {
        std::optional<std::vector<std::string>>* target = nullptr;
        switch (s) {
            case Section::prerequisites: target = &out.prerequisites; break;
            case Section::s2rs: target = &out.s2rs; break;
            case Section::ebs: target = &out.ebs; break;
            case Section::obs: target = &out.obs; break;
            case Section::none: break;
        }
        if (!target->has_value()) target->emplace();
        return **target;
    };

    for (const auto& line : text::split_lines(report.body)) {
        auto m = classify_line(line, lexicon);
        if (m.is_heading) {
            current = m.section;
            if (current != Section::none) {
                auto& items = slot(current);
                if (!m.inline_content.empty()) append_items(items, m.inline_content);
            }
            continue;
        }
        if (current == Section::none || text::trim(line).empty()) continue;
        append_items(slot(current), line);
    }
    return out;
}

Scenario to_scenario(const SectionMap& sections, const std::string& id) {
    Scenario sc;
    sc.id = id;
    sc.summary = text::normalize_whitespace(sections.title);
    if (sc.summary.empty()) throw MalformedReport(id, "empty title");
    auto convert = [](const std::optional<std::vector<std::string>>& items) {
        std::vector<std::string> out;
        if (!items) return out;
        for (const auto& it : *items) {
            auto s = strip_enumerator(it);
            if (!s.empty()) out.push_back(std::move(s));
        }
        return out;
    };
    sc.preconditions = convert(sections.prerequisites);
    sc.steps = convert(sections.s2rs);
    sc.oracles = convert(sections.ebs);
    if (sc.steps.empty() && sc.oracles.empty()) throw EmptyScenario(id);
    return sc;
}

RawReport parse_report_file(std::string_view contents, const std::string& file_name) {
    RawReport r;
    bool have_source = false;
    bool have_title = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool terminated = false;
    while (pos < contents.size()) {
        auto nl = contents.find('\n', pos);
        auto line = contents.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? contents.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line == "---") {
            terminated = true;
            break;
        }
        if (text::trim(line).empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw FormatError(file_name, line_no, "expected 'key: value' header line");
        auto key = text::trim(line.substr(0, colon));
        auto value = std::string(text::trim(line.substr(colon + 1)));
        if (key == "id") {
            r.id = value;
        } else if (key == "source") {
            auto src = parse_source(value);
            if (!src) throw FormatError(file_name, line_no, "unknown source '" + value + "'");
            r.source = *src;
            have_source = true;
        } else if (key == "title") {
            r.title = value;
            have_title = true;
        } else if (key == "labels") {
            std::stringstream ss(value);
            for (std::string lab; std::getline(ss, lab, ',');) {
                auto t = std::string(text::trim(lab));
                if (!t.empty()) r.labels.push_back(t);
            }
        } else {
            throw FormatError(file_name, line_no, "unknown header key '" + std::string(key) + "'");
        }
    }
    if (!terminated) throw FormatError(file_name, line_no, "header not terminated by '---'");
    if (r.id.empty()) throw FormatError(file_name, 1, "missing 'id' header");
    if (!have_source) throw FormatError(file_name, 1, "missing 'source' header");
    if (!have_title) throw FormatError(file_name, 1, "missing 'title' header");
    r.body = std::string(contents.substr(pos));
    if (text::trim(r.body).empty() && r.source != Source::manual) {
        throw FormatError(file_name, line_no, "empty body is only allowed for source 'manual'");
    }
    return r;
}

std::vector<RawReport> parse_report_lines(std::string_view contents, const std::string& file_name) {
    std::vector<RawReport> out;
    auto lines = text::split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(file_name, i + 1, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw FormatError(file_name, i + 1, "report must be a JSON object");
        auto str_field = [&](const char* key, bool required) -> std::string {
            auto it = j.find(key);
            if (it == j.end()) {
                if (required) throw FormatError(file_name, i + 1, std::string("missing field '") + key + "'");
                return {};
            }
            if (!it->is_string()) throw FormatError(file_name, i + 1, std::string("field '") + key + "' must be a string");
            return it->get<std::string>();
        };
        RawReport r;
        r.id = str_field("id", true);
        if (r.id.empty()) throw FormatError(file_name, i + 1, "empty id");
        auto src = str_field("source", true);
        auto parsed = parse_source(src);
        if (!parsed) throw FormatError(file_name, i + 1, "unknown source '" + src + "'");
        r.source = *parsed;
        r.title = str_field("title", true);
        r.body = str_field("body", false);
        if (auto it = j.find("labels"); it != j.end()) {
            if (!it->is_array()) throw FormatError(file_name, i + 1, "field 'labels' must be an array");
            for (const auto& l : *it) {
                if (!l.is_string()) throw FormatError(file_name, i + 1, "labels must be strings");
                r.labels.push_back(l.get<std::string>());
            }
        }
        if (text::trim(r.body).empty() && r.source != Source::manual) {
            throw FormatError(file_name, i + 1, "empty body is only allowed for source 'manual'");
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + p.string());
    return ss.str();
}

bool is_lines_export(const fs::path& p) { return p.extension() == ".jsonl" || p.extension() == ".ndjson"; }

}  // namespace

CorpusLoad load_corpus(const fs::path& path, const HeadingLexicon& lexicon) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw IoError("corpus path does not exist: " + path.string());

    std::vector<std::pair<RawReport, std::string>> reports;
    auto ingest_file = [&](const fs::path& file) {
        auto contents = read_file(file);
        if (is_lines_export(file)) {
            for (auto& r : parse_report_lines(contents, file.string())) reports.emplace_back(std::move(r), file.string());
        } else {
            reports.emplace_back(parse_report_file(contents, file.string()), file.string());
        }
    };

    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            auto name = entry.path().filename().string();
            if (name.empty() || name.front() == '.') continue;
            files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) ingest_file(f);
    } else {
        ingest_file(path);
    }

    std::map<std::string, std::string> seen;
    for (const auto& [r, file] : reports) {
        auto [it, inserted] = seen.emplace(r.id, file);
        if (!inserted) throw FormatError(file, 1, "duplicate report id '" + r.id + "' (first seen in " + it->second + ")");
    }

    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.first.id < b.first.id; });

    CorpusLoad out;
    for (const auto& [r, file] : reports) {
        try {
            out.scenarios.push_back(to_scenario(extract_sections(r, lexicon), r.id));
        } catch (const EmptyScenario& e) {
            spdlog::warn("skipping report {}: {}", r.id, e.what());
            out.skipped.push_back({r.id, file, e.what()});
        } catch (const MalformedReport& e) {
            spdlog::warn("skipping report {}: {}", r.id, e.what());
            out.skipped.push_back({r.id, file, e.what()});
        }
    }
    return out;
}

}  // namespace soap::corpus
