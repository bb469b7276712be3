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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soap::text {

std::string_view trim(std::string_view s);

/// Collapses every run of ASCII whitespace to one space and trims the ends.
/// No other mutation is applied.
std::string normalize_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

/// Whitespace-delimited tokens, verbatim.
std::vector<std::string> whitespace_tokens(std::string_view s);

/// Lowercased whitespace tokens with leading/trailing ASCII punctuation
/// removed; tokens that become empty are dropped.
std::vector<std::string> term_tokens(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view s);

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

}  // namespace soap::text
