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

#include "soap/errors.hpp"

namespace soap::llm {

template <typename T>
T query_structured(AgentHandle& agent, const MessageParts& parts, Schema schema,
                   const std::function<T(const nlohmann::json&)>& accept, int max_retries) {
    MessageParts current = parts;
    for (int attempt = 0;; ++attempt) {
        auto reply = agent.query(current);
        try {
            return accept(parse_json_response(reply, schema));
        } catch (const SchemaViolation& e) {
            if (attempt >= max_retries) throw;
            current = MessageParts{}.text(retry_nudge(e.what()));
        } catch (const InvalidInstruction& e) {
            if (attempt >= max_retries) throw;
            current = MessageParts{}.text(retry_nudge(e.what()));
        }
    }
}

}  // namespace soap::llm
