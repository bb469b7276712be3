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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace soap::device {

// Instructions

enum class Action { tap, long_tap, double_tap, input, scroll, home, enter, landscape, portrait };
enum class Direction { up, down, left, right };

inline constexpr Action kAllActions[] = {Action::tap,  Action::long_tap, Action::double_tap,
                                         Action::input, Action::scroll,  Action::home,
                                         Action::enter, Action::landscape, Action::portrait};

std::string_view to_string(Action a);
std::string_view to_string(Direction d);
/// Accepts "long_tap" and "long-tap" style spellings, case-insensitively.
std::optional<Action> parse_action(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);

struct UiInstruction {
    Action action = Action::tap;
    std::optional<int> position;  // 1-based grid label
    std::optional<std::string> text;
    std::optional<Direction> direction;

    bool operator==(const UiInstruction&) const = default;
};

/// Argument rules per action:
///   tap, long_tap, double_tap: position only
///   input:                     position and nonempty text
///   scroll:                    direction only
///   home, enter, landscape, portrait: no arguments
/// Throws InvalidInstruction naming the broken rule.
void validate(const UiInstruction& instruction);
bool is_valid(const UiInstruction& instruction);

/// "[tap] position=32", "[scroll] direction=down", "[input] position=4 text=\"abc\"".
std::string describe(const UiInstruction& instruction);

nlohmann::json to_json(const UiInstruction& instruction);
/// Reads the instruction reply shape, arguments flat or under "arguments".
/// Throws SchemaViolation for unusable fields and InvalidInstruction for
/// rule breaches.
UiInstruction instruction_from_json(const nlohmann::json& j);

// Grid geometry

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

struct Cell {
    int row = 0;  // 0-based
    int col = 0;  // 0-based
    bool operator==(const Cell&) const = default;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool contains(Point p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
};

inline constexpr int kMinCellSize = 20;

/// Fixed-size cells numbered 1.. left to right, top to bottom. Edge cells
/// may be partial.
struct Grid {
    int width = 0;
    int height = 0;
    int cell_size = 100;
    int columns = 0;
    int rows = 0;

    int label_count() const noexcept { return columns * rows; }
    bool operator==(const Grid&) const = default;
};

Grid make_grid(int width, int height, int cell_size = 100);

Cell label_to_cell(int label, const Grid& grid);
int cell_to_label(Cell cell, const Grid& grid);
Rect cell_rect(int label, const Grid& grid);

/// Cell center, pulled back to at most width - cell_size/2 (and likewise
/// for y) for partial edge cells; always inside the cell.
Point label_to_coords(int label, const Grid& grid);

/// Label of the cell containing `p`.
int label_at(Point p, const Grid& grid);

// Screen state

struct GridOverlay {
    Grid grid;
    std::vector<std::uint8_t> labeled_png;
};

struct GuiStatus {
    std::vector<std::uint8_t> png;
    int width = 0;
    int height = 0;
    std::optional<GridOverlay> grid;
    std::chrono::system_clock::time_point captured_at{};
};

/// Overlays the numbered grid on `status`'s screenshot. Throws
/// ImageDecodeError for an undecodable screenshot.
GuiStatus label_grid(const GuiStatus& status, int cell_size = 100);

// Backends

struct ExecutionOutcome {
    UiInstruction instruction;
    std::optional<Point> point;
    std::vector<std::string> commands;  // commands issued, for audit
};

class DeviceBackend {
public:
    virtual ~DeviceBackend() = default;
    virtual std::string id() const = 0;
    virtual GuiStatus capture() = 0;
    /// `point` is resolved for positional actions; instruction already valid.
    virtual ExecutionOutcome perform(const UiInstruction& instruction, std::optional<Point> point) = 0;
};

/// Validates `instruction`, resolves its position against the grid of
/// `labeled` and forwards to the backend. Throws InvalidInstruction,
/// NoGridContext or LabelOutOfRange before touching the device.
ExecutionOutcome execute(DeviceBackend& device, const UiInstruction& instruction, const GuiStatus* labeled);

}  // namespace soap::device
