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

#include "soap/device.hpp"

#include <algorithm>

#include "soap/errors.hpp"
#include "soap/image.hpp"
#include "soap/text.hpp"

namespace soap::device {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::tap: return "tap";
        case Action::long_tap: return "long_tap";
        case Action::double_tap: return "double_tap";
        case Action::input: return "input";
        case Action::scroll: return "scroll";
        case Action::home: return "home";
        case Action::enter: return "enter";
        case Action::landscape: return "landscape";
        case Action::portrait: return "portrait";
    }
    return "tap";
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::up: return "up";
        case Direction::down: return "down";
        case Direction::left: return "left";
        case Direction::right: return "right";
    }
    return "up";
}

std::optional<Action> parse_action(std::string_view s) {
    auto norm = text::to_lower(text::trim(s));
    std::replace(norm.begin(), norm.end(), '-', '_');
    std::replace(norm.begin(), norm.end(), ' ', '_');
    for (Action a : kAllActions) {
        if (norm == to_string(a)) return a;
    }
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) {
    auto norm = text::to_lower(text::trim(s));
    for (Direction d : {Direction::up, Direction::down, Direction::left, Direction::right}) {
        if (norm == to_string(d)) return d;
    }
    return std::nullopt;
}

void validate(const UiInstruction& in) {
    auto fail = [&](const std::string& why) {
        throw InvalidInstruction("invalid " + std::string(to_string(in.action)) + " instruction: " + why);
    };
    if (in.position && *in.position < 1) fail("position must be a positive grid label");
    switch (in.action) {
        case Action::tap:
        case Action::long_tap:
        case Action::double_tap:
            if (!in.position) fail("position is required");
            if (in.text) fail("text is not allowed");
            if (in.direction) fail("direction is not allowed");
            break;
        case Action::input:
            if (!in.position) fail("position is required");
            if (!in.text || in.text->empty()) fail("text is required");
            if (in.direction) fail("direction is not allowed");
            break;
        case Action::scroll:
            if (!in.direction) fail("direction is required");
            if (in.position) fail("position is not allowed");
            if (in.text) fail("text is not allowed");
            break;
        case Action::home:
        case Action::enter:
        case Action::landscape:
        case Action::portrait:
            if (in.position || in.text || in.direction) fail("takes no arguments");
            break;
    }
}

bool is_valid(const UiInstruction& instruction) {
    try {
        validate(instruction);
        return true;
    } catch (const InvalidInstruction&) {
        return false;
    }
}

std::string describe(const UiInstruction& in) {
    std::string out = "[" + std::string(to_string(in.action)) + "]";
    if (in.position) out += " position=" + std::to_string(*in.position);
    if (in.text) out += " text=" + nlohmann::json(*in.text).dump();
    if (in.direction) out += " direction=" + std::string(to_string(*in.direction));
    return out;
}

nlohmann::json to_json(const UiInstruction& in) {
    nlohmann::json j{{"action", to_string(in.action)}};
    if (in.position) j["position"] = *in.position;
    if (in.text) j["text"] = *in.text;
    if (in.direction) j["direction"] = to_string(*in.direction);
    return j;
}

UiInstruction instruction_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string()) {
        throw SchemaViolation({"action"});
    }
    UiInstruction in;
    auto action = parse_action(j["action"].get<std::string>());
    if (!action) throw SchemaViolation({"action (unknown action '" + j["action"].get<std::string>() + "')"});
    in.action = *action;

    const nlohmann::json& args = j.contains("arguments") && j["arguments"].is_object() ? j["arguments"] : j;
    if (auto p = args.find("position"); p != args.end() && !p->is_null()) {
        if (p->is_number_integer()) in.position = p->get<int>();
        else if (p->is_string()) {
            try {
                std::size_t used = 0;
                auto s = p->get<std::string>();
                in.position = std::stoi(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
            } catch (const std::exception&) {
                throw SchemaViolation({"position (expected integer)"});
            }
        } else {
            throw SchemaViolation({"position (expected integer)"});
        }
    }
    if (auto t = args.find("text"); t != args.end() && !t->is_null()) {
        if (!t->is_string()) throw SchemaViolation({"text (expected string)"});
        in.text = t->get<std::string>();
    }
    if (auto d = args.find("direction"); d != args.end() && !d->is_null()) {
        if (!d->is_string()) throw SchemaViolation({"direction (expected string)"});
        auto dir = parse_direction(d->get<std::string>());
        if (!dir) throw SchemaViolation({"direction (unknown direction '" + d->get<std::string>() + "')"});
        in.direction = *dir;
    }
    validate(in);
    return in;
}

// Grid

Grid make_grid(int width, int height, int cell_size) {
    if (width <= 0 || height <= 0) throw Error("screen dimensions must be positive");
    if (cell_size < kMinCellSize) {
        throw Error("cell size must be at least " + std::to_string(kMinCellSize) + " px (got " +
                    std::to_string(cell_size) + ")");
    }
    Grid g;
    g.width = width;
    g.height = height;
    g.cell_size = cell_size;
    g.columns = (width + cell_size - 1) / cell_size;
    g.rows = (height + cell_size - 1) / cell_size;
    return g;
}

Cell label_to_cell(int label, const Grid& grid) {
    if (label < 1 || label > grid.label_count()) throw LabelOutOfRange(label, grid.label_count());
    int idx = label - 1;
    return {idx / grid.columns, idx % grid.columns};
}

int cell_to_label(Cell cell, const Grid& grid) {
    if (cell.row < 0 || cell.col < 0 || cell.row >= grid.rows || cell.col >= grid.columns) {
        throw Error("cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) + ") outside the grid");
    }
    return cell.row * grid.columns + cell.col + 1;
}

Rect cell_rect(int label, const Grid& grid) {
    auto c = label_to_cell(label, grid);
    Rect r;
    r.x0 = c.col * grid.cell_size;
    r.y0 = c.row * grid.cell_size;
    r.x1 = std::min(r.x0 + grid.cell_size, grid.width);
    r.y1 = std::min(r.y0 + grid.cell_size, grid.height);
    return r;
}

Point label_to_coords(int label, const Grid& grid) {
    auto r = cell_rect(label, grid);
    const int half = grid.cell_size / 2;
    auto axis = [&](int lo, int hi, int extent) {
        int v = std::min(lo + half, extent - half);
        if (v < lo) v = (lo + hi - 1) / 2;
        return v;
    };
    return {axis(r.x0, r.x1, grid.width), axis(r.y0, r.y1, grid.height)};
}

int label_at(Point p, const Grid& grid) {
    if (p.x < 0 || p.y < 0 || p.x >= grid.width || p.y >= grid.height) {
        throw Error("point (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") outside the screen");
    }
    return cell_to_label({p.y / grid.cell_size, p.x / grid.cell_size}, grid);
}

GuiStatus label_grid(const GuiStatus& status, int cell_size) {
    auto image = decode_png(status.png);
    auto grid = make_grid(image.width(), image.height(), cell_size);

    const Rgba border{255, 255, 255, 110};
    const Rgba ink{255, 32, 32, 255};
    const Rgba outline{255, 255, 255, 255};
    for (int c = 1; c < grid.columns; ++c) {
        int x = c * cell_size;
        for (int y = 0; y < image.height(); ++y) image.blend(x, y, border);
    }
    for (int r = 1; r < grid.rows; ++r) {
        int y = r * cell_size;
        for (int x = 0; x < image.width(); ++x) image.blend(x, y, border);
    }
    // label at the cell's top-left, shrunk until it fits the cell
    for (int label = 1; label <= grid.label_count(); ++label) {
        auto rect = cell_rect(label, grid);
        int scale = std::max(1, cell_size / 33);
        while (scale > 1) {
            auto [w, h] = number_extent(label, scale);
            if (w <= rect.x1 - rect.x0 - 2 && h <= rect.y1 - rect.y0 - 2) break;
            --scale;
        }
        draw_number(image, rect.x0 + 2, rect.y0 + 2, label, scale, ink, outline);
    }

    GuiStatus out = status;
    out.width = image.width();
    out.height = image.height();
    out.grid = GridOverlay{grid, encode_png(image)};
    return out;
}

ExecutionOutcome execute(DeviceBackend& device, const UiInstruction& instruction, const GuiStatus* labeled) {
    validate(instruction);
    std::optional<Point> point;
    if (instruction.position) {
        if (!labeled || !labeled->grid) throw NoGridContext();
        point = label_to_coords(*instruction.position, labeled->grid->grid);
    }
    return device.perform(instruction, point);
}

}  // namespace soap::device
