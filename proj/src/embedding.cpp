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

#include "soap/embedding.hpp"

#include <cmath>

#include "soap/errors.hpp"
#include "soap/text.hpp"

namespace soap {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double na = std::sqrt(dot(a, a));
    double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void normalize_l2(Vector& v) {
    double n = std::sqrt(dot(v, v));
    if (n == 0.0) return;
    for (double& x : v) x /= n;
}

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error("embedding dimension must be positive");
}

std::string HashEmbedder::id() const { return "hash-bow-" + std::to_string(dimension_); }

std::size_t HashEmbedder::bucket_of(std::string_view token) const {
    return static_cast<std::size_t>(text::fnv1a(token) % dimension_);
}

Vector HashEmbedder::embed(std::string_view input) const {
    auto terms = text::term_tokens(input);
    if (terms.empty()) throw EmbedderFailure(std::string(input), "no embeddable tokens");
    Vector v(dimension_, 0.0);
    for (const auto& t : terms) v[bucket_of(t)] += 1.0;
    normalize_l2(v);
    return v;
}

RemoteEmbedder::RemoteEmbedder(http::Endpoint endpoint, std::string model, std::size_t dimension)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dimension_(dimension) {}

Vector RemoteEmbedder::embed(std::string_view input) const {
    if (text::trim(input).empty()) throw EmbedderFailure(std::string(input), "empty text");
    nlohmann::json body{{"model", model_}, {"input", std::string(input)}, {"dimensions", dimension_}};
    nlohmann::json reply;
    try {
        reply = http::post_json(endpoint_, "/embeddings", body);
    } catch (const BackendError& e) {
        throw EmbedderFailure(std::string(input), e.what());
    }
    try {
        auto v = reply.at("data").at(0).at("embedding").get<Vector>();
        if (v.size() != dimension_) {
            throw EmbedderFailure(std::string(input), "backend returned dimension " + std::to_string(v.size()));
        }
        normalize_l2(v);
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw EmbedderFailure(std::string(input), std::string("unexpected embeddings reply: ") + e.what());
    }
}

}  // namespace soap
