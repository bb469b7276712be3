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

#include "soap/simulator.hpp"

#include <fstream>
#include <sstream>

#include "soap/errors.hpp"
#include "soap/image.hpp"
#include "soap/text.hpp"

namespace soap::device {

namespace fs = std::filesystem;

namespace {

bool positional(Action a) {
    return a == Action::tap || a == Action::long_tap || a == Action::double_tap || a == Action::input;
}

bool argument_matches(const std::string& pattern, const std::string& actual) {
    if (pattern == "*") return true;
    std::stringstream ss(pattern);
    for (std::string item; std::getline(ss, item, ',');) {
        auto dash = item.find('-');
        if (dash != std::string::npos && dash > 0 && !actual.empty() && actual != "-") {
            try {
                int lo = std::stoi(item.substr(0, dash));
                int hi = std::stoi(item.substr(dash + 1));
                int v = std::stoi(actual);
                if (v >= lo && v <= hi) return true;
            } catch (const std::exception&) {
            }
        } else if (item == actual) {
            return true;
        }
    }
    return false;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open screen image " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

SimScenario parse_sim_scenario(std::string_view contents, const fs::path& base_dir, const std::string& file_name) {
    SimScenario sc;
    auto lines = text::split_lines(contents);
    bool header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto line = std::string(text::trim(lines[i]));
        if (line.empty() || line.front() == '#') continue;
        auto tok = text::whitespace_tokens(line);
        if (!header) {
            if (tok.size() != 2 || tok[0] != "soap-sim") {
                throw FormatError(file_name, line_no, "expected 'soap-sim <version>' header");
            }
            if (tok[1] != std::to_string(kSimulatorFormatVersion)) {
                throw FormatError(file_name, line_no, "unsupported simulator format version " + tok[1]);
            }
            header = true;
            continue;
        }
        const auto& kw = tok[0];
        if (kw == "cell") {
            if (tok.size() != 2) throw FormatError(file_name, line_no, "usage: cell <px>");
            sc.cell_size = std::stoi(tok[1]);
            if (sc.cell_size < kMinCellSize) throw FormatError(file_name, line_no, "cell size too small");
        } else if (kw == "screen") {
            if (tok.size() != 3) throw FormatError(file_name, line_no, "usage: screen <id> <png>");
            if (sc.screens.contains(tok[1])) throw FormatError(file_name, line_no, "duplicate screen " + tok[1]);
            sc.screens[tok[1]] = base_dir / tok[2];
        } else if (kw == "start" || kw == "home") {
            if (tok.size() != 2) throw FormatError(file_name, line_no, "usage: " + kw + " <screen>");
            (kw == "start" ? sc.start : sc.home) = tok[1];
        } else if (kw == "on") {
            if (tok.size() != 6 || tok[4] != "->") {
                throw FormatError(file_name, line_no, "usage: on <screen|*> <action> <arg> -> <screen>");
            }
            auto action = parse_action(tok[2]);
            if (!action) throw FormatError(file_name, line_no, "unknown action " + tok[2]);
            sc.transitions.push_back({tok[1], *action, tok[3], tok[5]});
        } else if (kw == "defect") {
            if (tok.size() < 4) throw FormatError(file_name, line_no, "usage: defect <screen> <id> <description>");
            auto desc_start = line.find(tok[2], line.find(tok[1], kw.size()) + tok[1].size()) + tok[2].size();
            sc.defects.push_back({tok[1], tok[2], std::string(text::trim(line.substr(desc_start)))});
        } else {
            throw FormatError(file_name, line_no, "unknown directive '" + kw + "'");
        }
    }
    if (!header) throw FormatError(file_name, 1, "missing 'soap-sim' header");
    if (sc.screens.empty()) throw FormatError(file_name, 1, "no screens declared");
    if (sc.start.empty()) throw FormatError(file_name, 1, "no start screen");
    if (sc.home.empty()) sc.home = sc.start;
    auto known = [&](const std::string& s) { return sc.screens.contains(s); };
    if (!known(sc.start)) throw FormatError(file_name, 1, "start screen '" + sc.start + "' is not declared");
    if (!known(sc.home)) throw FormatError(file_name, 1, "home screen '" + sc.home + "' is not declared");
    for (const auto& t : sc.transitions) {
        if (t.from != "*" && !known(t.from)) throw FormatError(file_name, 1, "transition from unknown screen " + t.from);
        if (!known(t.to)) throw FormatError(file_name, 1, "transition to unknown screen " + t.to);
    }
    for (const auto& d : sc.defects) {
        if (!known(d.screen)) throw FormatError(file_name, 1, "defect on unknown screen " + d.screen);
    }
    return sc;
}

SimScenario load_sim_scenario(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open simulator scenario " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sim_scenario(ss.str(), path.parent_path(), path.string());
}

SimulatorDevice::SimulatorDevice(SimScenario scenario) : scenario_(std::move(scenario)) {
    for (const auto& [id, path] : scenario_.screens) {
        auto bytes = read_bytes(path);
        sizes_[id] = png_dimensions(bytes);
        images_[id] = std::move(bytes);
    }
    current_ = scenario_.start;
    trace_.push_back(current_);
}

SimulatorDevice SimulatorDevice::from_file(const fs::path& path) { return SimulatorDevice(load_sim_scenario(path)); }

GuiStatus SimulatorDevice::capture() {
    GuiStatus s;
    s.png = images_.at(current_);
    auto [w, h] = sizes_.at(current_);
    s.width = w;
    s.height = h;
    s.captured_at = std::chrono::system_clock::now();
    return s;
}

std::vector<SeededDefect> SimulatorDevice::defects_on(const std::string& screen) const {
    std::vector<SeededDefect> out;
    for (const auto& d : scenario_.defects) {
        if (d.screen == screen) out.push_back(d);
    }
    return out;
}

ExecutionOutcome SimulatorDevice::perform(const UiInstruction& instruction, std::optional<Point> point) {
    ExecutionOutcome outcome;
    outcome.instruction = instruction;
    outcome.point = point;

    std::string argument = "-";
    if (positional(instruction.action)) {
        if (!point) throw NoGridContext();
        auto [w, h] = sizes_.at(current_);
        argument = std::to_string(label_at(*point, make_grid(w, h, scenario_.cell_size)));
    } else if (instruction.action == Action::scroll) {
        argument = std::string(to_string(*instruction.direction));
    }
    if (instruction.action == Action::input) typed_.push_back(*instruction.text);
    if (instruction.action == Action::landscape) landscape_ = true;
    if (instruction.action == Action::portrait) landscape_ = false;

    const SimTransition* match = nullptr;
    for (int pass = 0; pass < 2 && !match; ++pass) {
        for (const auto& t : scenario_.transitions) {
            if (t.action != instruction.action) continue;
            if (t.from != current_ && t.from != "*") continue;
            bool exact = t.argument != "*" && argument_matches(t.argument, argument);
            bool wildcard = t.argument == "*";
            if ((pass == 0 && exact) || (pass == 1 && wildcard)) {
                match = &t;
                break;
            }
        }
    }
    std::string next = current_;
    if (match) next = match->to;
    else if (instruction.action == Action::home) next = scenario_.home;

    outcome.commands.push_back("sim " + std::string(to_string(instruction.action)) + " " + argument + " : " + current_ +
                               " -> " + next);
    current_ = next;
    trace_.push_back(current_);
    return outcome;
}

}  // namespace soap::device
