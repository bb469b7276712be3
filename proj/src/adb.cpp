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

#include "soap/adb.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <regex>

#include "soap/errors.hpp"
#include "soap/image.hpp"

extern char** environ;

namespace soap::device {

CommandResult ProcessRunner::run(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) {
    CommandResult result;
    if (argv.empty()) throw Error("empty command line");

    int out_pipe[2];
    int err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
    posix_spawn_file_actions_addclose(&actions, err_pipe[0]);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(out_pipe[1]);
    close(err_pipe[1]);
    if (rc != 0) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        result.not_found = true;
        result.exit_code = 127;
        result.err = std::strerror(rc);
        return result;
    }

    auto deadline = std::chrono::steady_clock::now() + timeout;
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    int open_fds = 2;
    char buf[65536];
    while (open_fds > 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
        int n = poll(fds, 2, static_cast<int>(left.count()));
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            auto got = read(fds[i].fd, buf, sizeof buf);
            if (got > 0) {
                (i == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(got));
            } else {
                close(fds[i].fd);
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }
    for (auto& f : fds) {
        if (f.fd >= 0) close(f.fd);
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
        if (result.exit_code == 127 && result.out.empty()) result.not_found = true;
    } else {
        result.exit_code = -1;
    }
    return result;
}

std::string escape_input_text(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == ' ') {
            out += "%s";
        } else if (std::strchr("\\\"'`$&|;<>()*?~#!{}[]%", c)) {
            out.push_back('\\');
            out.push_back(c);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

AdbDevice::AdbDevice(AdbOptions options, std::shared_ptr<CommandRunner> runner)
    : options_(std::move(options)), runner_(runner ? std::move(runner) : std::make_shared<ProcessRunner>()) {
    if (options_.serial.empty()) {
        if (const char* s = std::getenv("ANDROID_SERIAL")) options_.serial = s;
    }
}

std::string AdbDevice::id() const { return "adb:" + (options_.serial.empty() ? std::string("default") : options_.serial); }

std::vector<std::string> AdbDevice::base_args() const {
    std::vector<std::string> args{options_.adb_path};
    if (!options_.serial.empty()) {
        args.emplace_back("-s");
        args.push_back(options_.serial);
    }
    return args;
}

std::string AdbDevice::shell(const std::vector<std::string>& command) {
    auto argv = base_args();
    argv.emplace_back("shell");
    argv.insert(argv.end(), command.begin(), command.end());
    auto r = runner_->run(argv, options_.command_timeout);
    if (r.not_found) throw DeviceUnavailable("cannot run " + options_.adb_path + ": " + r.err);
    if (r.timed_out) throw DeviceUnavailable("adb shell timed out");
    if (r.exit_code != 0) throw DeviceUnavailable("adb shell failed (" + std::to_string(r.exit_code) + "): " + r.err);
    return r.out;
}

std::pair<int, int> AdbDevice::screen_size() {
    if (screen_) return *screen_;
    auto out = shell({"wm", "size"});
    std::smatch m;
    static const std::regex size_re(R"((\d+)x(\d+))");
    // an "Override size" line, when present, comes last and wins
    std::pair<int, int> size{0, 0};
    for (auto it = std::sregex_iterator(out.begin(), out.end(), size_re); it != std::sregex_iterator(); ++it) {
        size = {std::stoi((*it)[1]), std::stoi((*it)[2])};
    }
    if (size.first <= 0) throw DeviceUnavailable("cannot read screen size from 'wm size'");
    screen_ = size;
    return size;
}

GuiStatus AdbDevice::capture() {
    auto argv = base_args();
    argv.insert(argv.end(), {"exec-out", "screencap", "-p"});
    auto r = runner_->run(argv, options_.capture_timeout);
    if (r.not_found) throw DeviceUnavailable("cannot run " + options_.adb_path + ": " + r.err);
    if (r.timed_out) throw CaptureTimeout("screencap timed out");
    if (r.exit_code != 0) throw DeviceUnavailable("screencap failed (" + std::to_string(r.exit_code) + "): " + r.err);
    GuiStatus s;
    s.png.assign(r.out.begin(), r.out.end());
    auto [w, h] = png_dimensions(s.png);
    s.width = w;
    s.height = h;
    s.captured_at = std::chrono::system_clock::now();
    screen_ = std::make_pair(w, h);
    return s;
}

std::vector<std::vector<std::string>> AdbDevice::plan_commands(const UiInstruction& in, std::optional<Point> point) {
    auto xs = [&] { return std::to_string(point->x); };
    auto ys = [&] { return std::to_string(point->y); };
    switch (in.action) {
        case Action::tap: return {{"input", "tap", xs(), ys()}};
        case Action::long_tap:
            return {{"input", "swipe", xs(), ys(), xs(), ys(), std::to_string(options_.long_tap_ms)}};
        case Action::double_tap:
            // one shell invocation so the second tap is not delayed by an adb round trip
            return {{"input", "tap", xs(), ys(), "&&", "input", "tap", xs(), ys()}};
        case Action::input:
            return {{"input", "tap", xs(), ys()}, {"input", "text", escape_input_text(*in.text)}};
        case Action::scroll: {
            auto [w, h] = screen_size();
            const double span = options_.scroll_span;
            int cx = w / 2;
            int cy = h / 2;
            int dx = static_cast<int>(w * span / 2);
            int dy = static_cast<int>(h * span / 2);
            // a "down" scroll reveals content further down: the finger moves up
            int x0 = cx, y0 = cy, x1 = cx, y1 = cy;
            switch (*in.direction) {
                case Direction::down: y0 = cy + dy; y1 = cy - dy; break;
                case Direction::up: y0 = cy - dy; y1 = cy + dy; break;
                case Direction::right: x0 = cx + dx; x1 = cx - dx; break;
                case Direction::left: x0 = cx - dx; x1 = cx + dx; break;
            }
            return {{"input", "swipe", std::to_string(x0), std::to_string(y0), std::to_string(x1), std::to_string(y1),
                     std::to_string(options_.swipe_ms)}};
        }
        case Action::home: return {{"input", "keyevent", "KEYCODE_HOME"}};
        case Action::enter: return {{"input", "keyevent", "KEYCODE_ENTER"}};
        case Action::landscape:
            return {{"settings", "put", "system", "accelerometer_rotation", "0"},
                    {"settings", "put", "system", "user_rotation", "1"}};
        case Action::portrait:
            return {{"settings", "put", "system", "accelerometer_rotation", "0"},
                    {"settings", "put", "system", "user_rotation", "0"}};
    }
    return {};
}

ExecutionOutcome AdbDevice::perform(const UiInstruction& instruction, std::optional<Point> point) {
    ExecutionOutcome outcome;
    outcome.instruction = instruction;
    outcome.point = point;
    for (const auto& cmd : plan_commands(instruction, point)) {
        shell(cmd);
        std::string line = "shell";
        for (const auto& c : cmd) line += " " + c;
        outcome.commands.push_back(line);
    }
    if (instruction.action == Action::landscape || instruction.action == Action::portrait) screen_.reset();
    return outcome;
}

}  // namespace soap::device
