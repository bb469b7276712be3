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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soap/http.hpp"

namespace soap {

using Vector = std::vector<double>;

/// Maps text to a unit-length vector of fixed dimension. Implementations
/// must be deterministic for a fixed id() and safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual Vector embed(std::string_view text) const = 0;
};

/// Bag of hashed term tokens: each lowercased, punctuation-trimmed token
/// adds 1 to bucket fnv1a(token) % dimension; the counts are L2-normalized.
/// Text without tokens throws EmbedderFailure.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dimension = 256);
    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    Vector embed(std::string_view text) const override;

    std::size_t bucket_of(std::string_view token) const;

private:
    std::size_t dimension_;
};

/// OpenAI-compatible `/embeddings` client.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(http::Endpoint endpoint, std::string model, std::size_t dimension = 256);
    std::string id() const override { return "remote:" + model_ + ":" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    Vector embed(std::string_view text) const override;

private:
    http::Endpoint endpoint_;
    std::string model_;
    std::size_t dimension_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

void normalize_l2(Vector& v);

}  // namespace soap
