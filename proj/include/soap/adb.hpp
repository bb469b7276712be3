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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "soap/device.hpp"

namespace soap::device {

struct CommandResult {
    int exit_code = 0;
    std::string out;  // raw bytes
    std::string err;
    bool timed_out = false;
    bool not_found = false;  // executable could not be started
};

class CommandRunner {
public:
    virtual ~CommandRunner() = default;
    virtual CommandResult run(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) = 0;
};

/// Runs a subprocess (PATH lookup), capturing stdout and stderr.
class ProcessRunner final : public CommandRunner {
public:
    CommandResult run(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) override;
};

struct AdbOptions {
    std::string adb_path = "adb";
    std::string serial;  // empty: ANDROID_SERIAL, then adb's default device
    int long_tap_ms = 800;
    double scroll_span = 0.6;  // fraction of the screen a scroll swipe covers
    int swipe_ms = 300;
    std::chrono::milliseconds command_timeout{10000};
    std::chrono::milliseconds capture_timeout{15000};
};

/// Escapes text for `adb shell input text`.
std::string escape_input_text(const std::string& text);

/// Drives a device through `adb shell input ...`; screenshots come from
/// `adb exec-out screencap -p`.
class AdbDevice final : public DeviceBackend {
public:
    explicit AdbDevice(AdbOptions options = {}, std::shared_ptr<CommandRunner> runner = nullptr);

    std::string id() const override;
    GuiStatus capture() override;
    ExecutionOutcome perform(const UiInstruction& instruction, std::optional<Point> point) override;

    /// Shell command lines `perform` would issue for the instruction.
    std::vector<std::vector<std::string>> plan_commands(const UiInstruction& instruction, std::optional<Point> point);

private:
    std::vector<std::string> base_args() const;
    std::pair<int, int> screen_size();
    std::string shell(const std::vector<std::string>& command);

    AdbOptions options_;
    std::shared_ptr<CommandRunner> runner_;
    std::optional<std::pair<int, int>> screen_;
};

}  // namespace soap::device
