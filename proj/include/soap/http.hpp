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
#include <string>

#include "json.hpp"

namespace soap::http {

struct Endpoint {
    std::string base_url;  // e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8080"
    std::string api_key;   // sent as a bearer token when nonempty
    std::chrono::milliseconds timeout{60000};
};

/// POSTs `body` to `base_url + path` and returns the decoded JSON reply.
/// Throws BackendError on transport failure, non-2xx status or a reply
/// that is not JSON.
nlohmann::json post_json(const Endpoint& endpoint, const std::string& path, const nlohmann::json& body);

}  // namespace soap::http
