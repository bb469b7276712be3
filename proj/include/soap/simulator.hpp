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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "soap/device.hpp"

namespace soap::device {

inline constexpr int kSimulatorFormatVersion = 1;

struct SimTransition {
    std::string from;
    Action action = Action::tap;
    std::string argument;  // cell label, direction, "-" (no argument) or "*" (any)
    std::string to;
};

struct SeededDefect {
    std::string screen;
    std::string id;
    std::string description;
};

/// Parsed simulator scenario file (docs/formats.md).
struct SimScenario {
    int cell_size = 100;
    std::map<std::string, std::filesystem::path> screens;  // id -> PNG path
    std::string start;
    std::string home;  // screen `home` resets to; defaults to start
    std::vector<SimTransition> transitions;
    std::vector<SeededDefect> defects;
};

SimScenario parse_sim_scenario(std::string_view contents, const std::filesystem::path& base_dir,
                               const std::string& file_name = "<memory>");
SimScenario load_sim_scenario(const std::filesystem::path& path);

/// Scripted state machine: each screen is a fixed screenshot, each action
/// looks up its transition; an unmatched action leaves the screen as is.
class SimulatorDevice final : public DeviceBackend {
public:
    explicit SimulatorDevice(SimScenario scenario);
    static SimulatorDevice from_file(const std::filesystem::path& path);

    std::string id() const override { return "sim"; }
    GuiStatus capture() override;
    ExecutionOutcome perform(const UiInstruction& instruction, std::optional<Point> point) override;

    const std::string& current_screen() const noexcept { return current_; }
    /// Screen ids visited, starting with the initial screen.
    const std::vector<std::string>& trace() const noexcept { return trace_; }
    bool landscape() const noexcept { return landscape_; }
    const std::vector<std::string>& typed_text() const noexcept { return typed_; }
    const SimScenario& scenario() const noexcept { return scenario_; }
    std::vector<SeededDefect> defects_on(const std::string& screen) const;

private:
    SimScenario scenario_;
    std::map<std::string, std::vector<std::uint8_t>> images_;
    std::map<std::string, std::pair<int, int>> sizes_;
    std::string current_;
    std::vector<std::string> trace_;
    std::vector<std::string> typed_;
    bool landscape_ = false;
};

}  // namespace soap::device
